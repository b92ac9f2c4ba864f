#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zits/io.hpp"
#include "zits/tensor.hpp"

namespace zits {

/// Binary hole map: 1 marks a masked (missing) pixel, 0 a known one.
class MaskMap {
public:
    MaskMap() = default;
    MaskMap(std::size_t height, std::size_t width, bool masked = false);

    /// Accepts an (…, H, W) tensor with a single plane whose values are
    /// exactly 0 or 1.
    static MaskMap from_tensor(const Tensor& t);
    /// Netpbm convention: sample 0 is a hole, maxval is known. Samples
    /// below maxval/2 count as holes.
    static MaskMap from_netpbm(const Netpbm& img);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    bool masked(std::size_t y, std::size_t x) const { return values_[y * width_ + x] != 0; }
    void set(std::size_t y, std::size_t x, bool masked) { values_[y * width_ + x] = masked ? 1 : 0; }
    std::span<const std::uint8_t> values() const { return values_; }
    std::size_t masked_count() const;

    /// (1, 1, H, W) tensor of 0/1 values.
    Tensor to_tensor() const;
    /// Inverse of from_netpbm, written with maxval 255.
    Netpbm to_netpbm() const;

    MaskMap transposed() const;
    MaskMap mirrored() const;

    friend bool operator==(const MaskMap& a, const MaskMap& b) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint8_t> values_;
};

}  // namespace zits
