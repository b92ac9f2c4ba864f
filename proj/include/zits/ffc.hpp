#pragma once

#include <cstddef>
#include <vector>

#include "zits/fft.hpp"
#include "zits/nn.hpp"
#include "zits/random.hpp"
#include "zits/tensor.hpp"

// Fast Fourier convolution: channels split into a local group, processed by
// ordinary 3×3 convolutions, and a global group, processed pointwise in the
// frequency domain so every output pixel sees the whole image.

namespace zits {

/// Complex 1×1 convolution on the rfft2 spectrum. On the stacked
/// [real; imaginary] channels it is the real map [[wr, −wi], [wi, wr]], which
/// commutes with cyclic shifts of the input.
struct FourierUnit {
    Tensor wr, wi;  // (Cout, Cin)

    Tensor forward(const Tensor& x) const;
};

FourierUnit make_fourier_unit(Rng& rng, std::size_t cin, std::size_t cout);
/// wr = I, wi = 0.
FourierUnit identity_fourier_unit(std::size_t channels);

/// irfft2(H · rfft2(x)) for every plane of x, where H is a per-frequency
/// complex multiplier over the (height, width/2 + 1) half-plane.
Tensor spectral_multiply(const Tensor& x, const std::vector<double>& h_re, const std::vector<double>& h_im);

struct FfcParams {
    std::size_t local = 0, global = 0;
    ConvLayer l2l, l2g, g2l;  // 3×3, padding 1
    FourierUnit g2g;
};

/// Splits `channels` into local and global parts by `global_ratio`. Throws
/// ShapeError when the split is not integral (an odd count at ratio ½).
FfcParams make_ffc(Rng& rng, std::size_t channels, double global_ratio = 0.5);

/// [l2l(x_l) + g2l(x_g) ; l2g(x_l) + g2g(x_g)].
Tensor ffc_layer(const Tensor& x, const FfcParams& p);

/// Residual pair of FFC layers, each followed by batch norm and Swish.
struct FfcBlock {
    FfcParams first, second;
    BatchNorm norm_first, norm_second;
};

FfcBlock make_ffc_block(Rng& rng, std::size_t channels);
Tensor ffc_block(const Tensor& x, const FfcBlock& b);

}  // namespace zits
