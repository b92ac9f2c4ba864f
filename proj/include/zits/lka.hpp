#pragma once

#include <cstddef>

#include "zits/nn.hpp"
#include "zits/random.hpp"
#include "zits/tensor.hpp"

// Large kernel attention: a K×K depthwise receptive field built from a
// (2d−1)×(2d−1) depthwise conv, a ⌈K/d⌉×⌈K/d⌉ depthwise conv with dilation d
// and a 1×1 conv. The inpainting block gates its input with that map and adds
// a 3×3 conv shortcut.

namespace zits {

inline constexpr std::size_t kDefaultLkaKernel = 21;
inline constexpr std::size_t kDefaultLkaDilation = 3;

struct LkaParams {
    std::size_t kernel = kDefaultLkaKernel;
    std::size_t dilation = kDefaultLkaDilation;
    ConvLayer dw;      // (C, 1, 2d−1, 2d−1)
    ConvLayer dw_dil;  // (C, 1, ⌈K/d⌉, ⌈K/d⌉), dilation d
    ConvLayer pw;      // (C, C, 1, 1)
    ConvLayer ffn;     // (C, C, 3, 3)
};

/// ⌈K/d⌉.
std::size_t lka_dilated_kernel(std::size_t kernel, std::size_t dilation);
/// Side of the composed receptive field: (⌈K/d⌉ − 1)·d + 2d − 1.
std::size_t lka_support(std::size_t kernel, std::size_t dilation);

LkaParams make_lka(Rng& rng, std::size_t channels, std::size_t kernel = kDefaultLkaKernel,
                   std::size_t dilation = kDefaultLkaDilation);

/// Depthwise convolution whose output keeps the input's H×W. Kernels with an
/// even span get one more row/column of padding before than after.
Tensor depthwise_same(const Tensor& x, const ConvLayer& layer);

/// pw(dw_dil(dw(x))).
Tensor lka_attention(const Tensor& x, const LkaParams& p);
/// x ⊙ lka_attention(x) + ffn(x).
Tensor lka_block(const Tensor& x, const LkaParams& p);

}  // namespace zits
