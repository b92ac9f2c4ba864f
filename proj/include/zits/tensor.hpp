#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zits {

/// Raised when operand extents disagree. The message names the offending
/// dimension so callers can report it verbatim.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Up to four positive extents. Lower-rank shapes are right-aligned onto
/// (N, C, H, W): a rank-2 shape is (H, W), a rank-3 shape is (C, H, W).
class Shape {
public:
    static constexpr std::size_t kMaxRank = 4;

    Shape() = default;
    Shape(std::initializer_list<std::size_t> extents);
    explicit Shape(std::span<const std::size_t> extents);

    std::size_t rank() const { return rank_; }
    std::size_t operator[](std::size_t i) const { return extents_.at(i); }
    std::size_t numel() const;

    std::size_t n() const { return dim4(0); }
    std::size_t c() const { return dim4(1); }
    std::size_t h() const { return dim4(2); }
    std::size_t w() const { return dim4(3); }

    /// Extent along NCHW axis `axis`, 1 for axes absent at this rank.
    std::size_t dim4(std::size_t axis) const;

    std::string str() const;

    friend bool operator==(const Shape& a, const Shape& b);

private:
    std::array<std::size_t, kMaxRank> extents_{};
    std::size_t rank_ = 0;
};

/// Dense real array, row-major with W fastest.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor nchw(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0) {
        return Tensor(Shape{n, c, h, w}, fill);
    }

    const Shape& shape() const { return shape_; }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return ((n * shape_.c() + c) * shape_.h() + y) * shape_.w() + x;
    }
    double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) { return data_[index(n, c, y, x)]; }
    double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const { return data_[index(n, c, y, x)]; }

    /// Pointer to the H×W plane of (n, c).
    double* plane(std::size_t n, std::size_t c) { return data_.data() + index(n, c, 0, 0); }
    const double* plane(std::size_t n, std::size_t c) const { return data_.data() + index(n, c, 0, 0); }

    Tensor reshaped(Shape shape) const;
    bool all_finite() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double s);

private:
    Shape shape_;
    std::vector<double> data_;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
/// Elementwise (Hadamard) product.
Tensor hadamard(const Tensor& a, const Tensor& b);

double sum(const Tensor& t);
double mean(const Tensor& t);
double dot(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Throws ShapeError naming `what` unless the shapes are equal.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

/// Stack (1, C_i, H, W) tensors along the channel axis. All inputs share N, H, W.
Tensor concat_channels(std::span<const Tensor> parts);
/// Channels [begin, end) of x.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end);

}  // namespace zits
