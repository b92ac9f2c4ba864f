#pragma once

#include <cstdint>

#include "zits/autodiff.hpp"
#include "zits/losses.hpp"
#include "zits/nn.hpp"

// Small fixed-weight patch discriminator standing in for a trained one when
// loss terms are evaluated outside training.

namespace zits {

struct PatchDiscriminator {
    ConvLayer conv1, conv2;  // 4×4 stride 2, Swish
    ConvLayer head;          // 3×3 to one channel, sigmoid

    /// Patches are stride× stride pixels of the input.
    static constexpr std::size_t stride = 4;

    /// Probabilities (N, 1, H/4, W/4) and the two hidden feature maps.
    DiscOutput forward(const Tensor& x) const;
    /// mean of the probability map, recorded on x's tape.
    ad::Var critic(ad::Var x) const;
};

PatchDiscriminator make_patch_discriminator(std::size_t in_channels, std::size_t width, std::uint64_t seed);

}  // namespace zits
