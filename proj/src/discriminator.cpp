#include "zits/discriminator.hpp"

#include "zits/random.hpp"

namespace zits {

namespace {

constexpr ConvSpec kDown{.stride = 2, .pad = 1};
constexpr ConvSpec kHead{.pad = 1};

}  // namespace

DiscOutput PatchDiscriminator::forward(const Tensor& x) const {
    DiscOutput out;
    const Tensor h1 = activate(conv1.forward(x), Activation::Swish);
    const Tensor h2 = activate(conv2.forward(h1), Activation::Swish);
    out.prob = activate(head.forward(h2), Activation::Sigmoid);
    out.features = {h1, h2};
    return out;
}

ad::Var PatchDiscriminator::critic(ad::Var x) const {
    ad::Tape& tape = *x.tape();
    const auto layer = [&](ad::Var v, const ConvLayer& c, Activation act) {
        return ad::activation(ad::conv2d(v, tape.constant(c.w), tape.constant(c.b), c.spec), act);
    };
    ad::Var h = layer(x, conv1, Activation::Swish);
    h = layer(h, conv2, Activation::Swish);
    return ad::mean(layer(h, head, Activation::Sigmoid));
}

PatchDiscriminator make_patch_discriminator(std::size_t in_channels, std::size_t width, std::uint64_t seed) {
    Rng rng(seed);
    return {make_conv(rng, in_channels, width, 4, kDown), make_conv(rng, width, 2 * width, 4, kDown),
            make_conv(rng, 2 * width, 1, 3, kHead)};
}

}  // namespace zits
