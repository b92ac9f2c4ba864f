#include "zits/mask.hpp"

#include <algorithm>
#include <string>

namespace zits {

MaskMap::MaskMap(std::size_t height, std::size_t width, bool masked)
    : height_(height), width_(width), values_(height * width, masked ? 1 : 0) {
    if (height == 0 || width == 0) throw ShapeError("mask: extents must be positive");
}

MaskMap MaskMap::from_tensor(const Tensor& t) {
    const Shape& s = t.shape();
    if (s.n() * s.c() != 1) throw ShapeError("mask: expected a single plane, got " + s.str());
    MaskMap m(s.h(), s.w());
    for (std::size_t i = 0; i < t.numel(); ++i) {
        if (t[i] != 0.0 && t[i] != 1.0) {
            throw std::invalid_argument("mask: value " + std::to_string(t[i]) + " at index " + std::to_string(i) +
                                        " is not binary");
        }
        m.values_[i] = t[i] == 1.0 ? 1 : 0;
    }
    return m;
}

MaskMap MaskMap::from_netpbm(const Netpbm& img) {
    if (img.channels != 1) throw IoError("mask: expected a greyscale image");
    MaskMap m(img.height, img.width);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        m.values_[i] = 2u * img.samples[i] < img.maxval ? 1 : 0;
    }
    return m;
}

std::size_t MaskMap::masked_count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

Tensor MaskMap::to_tensor() const {
    Tensor t = Tensor::nchw(1, 1, height_, width_);
    for (std::size_t i = 0; i < values_.size(); ++i) t[i] = values_[i];
    return t;
}

Netpbm MaskMap::to_netpbm() const {
    Netpbm img{width_, height_, 1, 255, {}};
    img.samples.resize(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) img.samples[i] = values_[i] ? 0 : 255;
    return img;
}

MaskMap MaskMap::transposed() const {
    MaskMap t(width_, height_);
    for (std::size_t y = 0; y < height_; ++y)
        for (std::size_t x = 0; x < width_; ++x) t.set(x, y, masked(y, x));
    return t;
}

MaskMap MaskMap::mirrored() const {
    MaskMap t(height_, width_);
    for (std::size_t y = 0; y < height_; ++y)
        for (std::size_t x = 0; x < width_; ++x) t.set(y, width_ - 1 - x, masked(y, x));
    return t;
}

}  // namespace zits
