#include "zits/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace zits {

Shape::Shape(std::initializer_list<std::size_t> extents)
    : Shape(std::span<const std::size_t>(extents.begin(), extents.size())) {}

Shape::Shape(std::span<const std::size_t> extents) {
    if (extents.size() > kMaxRank) {
        throw ShapeError("rank " + std::to_string(extents.size()) + " exceeds the maximum of 4");
    }
    for (std::size_t i = 0; i < extents.size(); ++i) {
        if (extents[i] == 0) {
            throw ShapeError("extent " + std::to_string(i) + " must be positive");
        }
        extents_[i] = extents[i];
    }
    rank_ = extents.size();
}

std::size_t Shape::numel() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank_; ++i) n *= extents_[i];
    return rank_ == 0 ? 0 : n;
}

std::size_t Shape::dim4(std::size_t axis) const {
    const std::size_t offset = kMaxRank - rank_;
    return axis < offset ? 1 : extents_[axis - offset];
}

std::string Shape::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < rank_; ++i) os << (i ? ", " : "") << extents_[i];
    os << ')';
    return os.str();
}

bool operator==(const Shape& a, const Shape& b) {
    if (a.rank_ != b.rank_) return false;
    for (std::size_t i = 0; i < a.rank_; ++i)
        if (a.extents_[i] != b.extents_[i]) return false;
    return true;
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
    }
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape.numel() != numel()) {
        throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
    }
    return Tensor(shape, data_);
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!(a.shape() == b.shape())) {
        throw ShapeError(std::string(what) + ": shape " + a.shape().str() + " vs " + b.shape().str());
    }
}

Tensor& Tensor::operator+=(const Tensor& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    require_same_shape(*this, other, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    out += b;
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    out -= b;
    return out;
}

Tensor operator*(double s, const Tensor& a) {
    Tensor out = a;
    out *= s;
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "hadamard");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
    return out;
}

double sum(const Tensor& t) {
    double s = 0.0;
    for (double v : t.data()) s += v;
    return s;
}

double mean(const Tensor& t) { return t.numel() ? sum(t) / static_cast<double>(t.numel()) : 0.0; }

double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Tensor concat_channels(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no inputs");
    const Shape& s0 = parts[0].shape();
    std::size_t channels = 0;
    for (const Tensor& p : parts) {
        const Shape& s = p.shape();
        if (s.n() != s0.n()) throw ShapeError("concat_channels: batch " + s.str() + " vs " + s0.str());
        if (s.h() != s0.h()) throw ShapeError("concat_channels: height " + s.str() + " vs " + s0.str());
        if (s.w() != s0.w()) throw ShapeError("concat_channels: width " + s.str() + " vs " + s0.str());
        channels += s.c();
    }
    Tensor out = Tensor::nchw(s0.n(), channels, s0.h(), s0.w());
    const std::size_t hw = s0.h() * s0.w();
    for (std::size_t n = 0; n < s0.n(); ++n) {
        std::size_t c_out = 0;
        for (const Tensor& p : parts) {
            for (std::size_t c = 0; c < p.shape().c(); ++c, ++c_out) {
                std::copy_n(p.plane(n, c), hw, out.plane(n, c_out));
            }
        }
    }
    return out;
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t end) {
    const Shape& s = x.shape();
    if (begin >= end || end > s.c()) {
        throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for channel extent " + std::to_string(s.c()));
    }
    Tensor out = Tensor::nchw(s.n(), end - begin, s.h(), s.w());
    const std::size_t hw = s.h() * s.w();
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = begin; c < end; ++c) std::copy_n(x.plane(n, c), hw, out.plane(n, c - begin));
    return out;
}

}  // namespace zits
