#pragma once

#include <functional>

#include "zits/conv.hpp"
#include "zits/ops.hpp"
#include "zits/random.hpp"
#include "zits/tensor.hpp"

// Layer primitives shared by the attention, Fourier, large-kernel and model
// code: convolution layers with their own weights, per-position linear maps,
// layer and batch normalisation, gated convolution and ZeroRA residuals.

namespace zits {

/// Convolution (or transposed convolution) with owned weights and bias.
struct ConvLayer {
    Tensor w;  // conv: (Cout, Cin/groups, kh, kw); transposed: (Cin, Cout/groups, kh, kw)
    Tensor b;  // (Cout) or empty
    ConvSpec spec;
    bool transposed = false;

    std::size_t in_channels() const;
    std::size_t out_channels() const;
    Tensor forward(const Tensor& x) const;
    Shape output_shape(const Shape& in) const;
};

/// He-normal weights, zero bias.
ConvLayer make_conv(Rng& rng, std::size_t cin, std::size_t cout, std::size_t kernel, ConvSpec spec = {},
                    bool transposed = false, bool bias = true);

/// Per-position affine map over channels: out[:, o] = Σ_i x[:, i]·w(i, o) + b(o).
/// `w` is (Cin, Cout); the matrix acts on channel row vectors.
struct Linear {
    Tensor w;  // (Cin, Cout)
    Tensor b;  // (Cout)

    Tensor forward(const Tensor& x) const;
};

Linear make_linear(Rng& rng, std::size_t cin, std::size_t cout, double stddev);
Linear zero_linear(std::size_t cin, std::size_t cout);

/// Normalises each position's channel vector to zero mean and unit variance,
/// then applies a learned per-channel scale and shift.
struct LayerNorm {
    Tensor gamma, beta;  // (C)
    double eps = 1e-5;

    Tensor forward(const Tensor& x) const;
};

LayerNorm make_layer_norm(std::size_t channels);

/// Batch normalisation in inference mode: fixed running statistics.
struct BatchNorm {
    Tensor gamma, beta, mean, var;  // (C)
    double eps = 1e-5;

    Tensor forward(const Tensor& x) const;
};

BatchNorm make_batch_norm(std::size_t channels);

/// out = feature(x) ⊙ sigmoid(gate(x)).
struct GatedConv {
    ConvLayer feature, gate;

    Tensor forward(const Tensor& x) const;
    Shape output_shape(const Shape& in) const;
};

GatedConv make_gated_conv(Rng& rng, std::size_t cin, std::size_t cout, std::size_t kernel, ConvSpec spec = {},
                          bool transposed = false);
Tensor gated_conv(const Tensor& x, const ConvLayer& feature, const ConvLayer& gate);

/// x + α·F(x). F(x) must have the shape of x; at α = 0 the result is x itself.
Tensor zerora_apply(const Tensor& x, const std::function<Tensor(const Tensor&)>& f, double alpha);
/// x + α·s with the same α = 0 guarantee.
Tensor zerora_add(const Tensor& x, const Tensor& s, double alpha);

/// act(norm(conv(x + α·s))).
Tensor sfe_inject(const Tensor& x, const Tensor& s, double alpha, const ConvLayer& conv, const BatchNorm& norm,
                  Activation act = Activation::Relu);

}  // namespace zits
