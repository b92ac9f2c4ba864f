#include "zits/lka.hpp"

#include <stdexcept>
#include <string>

namespace zits {
namespace {

int same_pad(std::size_t span) { return static_cast<int>(span / 2); }

}  // namespace

std::size_t lka_dilated_kernel(std::size_t kernel, std::size_t dilation) {
    if (kernel == 0 || dilation == 0) throw std::invalid_argument("lka: kernel and dilation must be positive");
    return (kernel + dilation - 1) / dilation;
}

std::size_t lka_support(std::size_t kernel, std::size_t dilation) {
    return (lka_dilated_kernel(kernel, dilation) - 1) * dilation + 2 * dilation - 1;
}

LkaParams make_lka(Rng& rng, std::size_t channels, std::size_t kernel, std::size_t dilation) {
    const std::size_t k2 = lka_dilated_kernel(kernel, dilation);
    const int groups = static_cast<int>(channels);
    const int d = static_cast<int>(dilation);
    LkaParams p;
    p.kernel = kernel;
    p.dilation = dilation;
    p.dw = make_conv(rng, channels, channels, 2 * dilation - 1, ConvSpec{.pad = d - 1, .groups = groups});
    p.dw_dil = make_conv(rng, channels, channels, k2,
                         ConvSpec{.dilation = d, .pad = same_pad((k2 - 1) * dilation + 1), .groups = groups});
    p.pw = make_conv(rng, channels, channels, 1);
    p.ffn = make_conv(rng, channels, channels, 3, ConvSpec{.pad = 1});
    return p;
}

Tensor depthwise_same(const Tensor& x, const ConvLayer& layer) {
    Tensor y = layer.forward(x);
    const Shape& in = x.shape();
    const Shape& out = y.shape();
    if (out.h() == in.h() && out.w() == in.w()) return y;
    if (out.h() < in.h() || out.w() < in.w()) {
        throw ShapeError("depthwise_same: output " + out.str() + " smaller than input " + in.str());
    }
    // Dropping the leading rows/columns of a symmetric over-pad is the same
    // as padding one less on that side.
    const std::size_t dy = out.h() - in.h(), dx = out.w() - in.w();
    Tensor cropped = Tensor::nchw(out.n(), out.c(), in.h(), in.w());
    for (std::size_t n = 0; n < out.n(); ++n)
        for (std::size_t c = 0; c < out.c(); ++c)
            for (std::size_t r = 0; r < in.h(); ++r)
                for (std::size_t q = 0; q < in.w(); ++q) cropped.at(n, c, r, q) = y.at(n, c, r + dy, q + dx);
    return cropped;
}

Tensor lka_attention(const Tensor& x, const LkaParams& p) {
    return p.pw.forward(depthwise_same(depthwise_same(x, p.dw), p.dw_dil));
}

Tensor lka_block(const Tensor& x, const LkaParams& p) {
    return hadamard(x, lka_attention(x, p)) + p.ffn.forward(x);
}

}  // namespace zits
