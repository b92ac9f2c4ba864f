#include "zits/nn.hpp"

#include <cmath>
#include <string>

#include <Eigen/Core>

namespace zits {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void require_channels(const Tensor& x, std::size_t c, const char* what) {
    if (x.shape().c() != c) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(c) + " channels, got " + x.shape().str());
    }
}

}  // namespace

std::size_t ConvLayer::in_channels() const {
    return transposed ? w.shape().n() : w.shape().c() * static_cast<std::size_t>(spec.groups);
}

std::size_t ConvLayer::out_channels() const {
    return transposed ? w.shape().c() * static_cast<std::size_t>(spec.groups) : w.shape().n();
}

Tensor ConvLayer::forward(const Tensor& x) const {
    return transposed ? transposed_conv2d(x, w, b.data(), spec) : conv2d(x, w, b.data(), spec);
}

Shape ConvLayer::output_shape(const Shape& in) const {
    if (in.c() != in_channels()) {
        throw ShapeError("conv: expected " + std::to_string(in_channels()) + " input channels, got " + in.str());
    }
    const std::size_t kh = w.shape().h(), kw = w.shape().w();
    if (transposed) {
        return Shape{in.n(), out_channels(), transposed_output_extent(in.h(), kh, spec),
                     transposed_output_extent(in.w(), kw, spec)};
    }
    return Shape{in.n(), out_channels(), conv_output_extent(in.h(), kh, spec), conv_output_extent(in.w(), kw, spec)};
}

ConvLayer make_conv(Rng& rng, std::size_t cin, std::size_t cout, std::size_t kernel, ConvSpec spec, bool transposed,
                    bool bias) {
    const auto groups = static_cast<std::size_t>(spec.groups);
    if (groups == 0 || cin % groups != 0 || cout % groups != 0) {
        throw ShapeError("make_conv: channels " + std::to_string(cin) + "->" + std::to_string(cout) +
                         " not divisible by groups " + std::to_string(groups));
    }
    const double fan_in = static_cast<double>(cin / groups * kernel * kernel);
    const Shape ws = transposed ? Shape{cin, cout / groups, kernel, kernel} : Shape{cout, cin / groups, kernel, kernel};
    ConvLayer layer;
    layer.w = random_normal(ws, rng, std::sqrt(2.0 / fan_in));
    if (bias) layer.b = Tensor(Shape{cout});
    layer.spec = spec;
    layer.transposed = transposed;
    return layer;
}

Tensor Linear::forward(const Tensor& x) const {
    const std::size_t cin = w.shape().h(), cout = w.shape().w();
    require_channels(x, cin, "linear");
    const Shape& s = x.shape();
    const std::size_t hw = s.h() * s.w();
    Tensor out = Tensor::nchw(s.n(), cout, s.h(), s.w());
    const ConstMap wm(w.data().data(), static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(cout));
    for (std::size_t n = 0; n < s.n(); ++n) {
        const ConstMap xm(x.plane(n, 0), static_cast<Eigen::Index>(cin), static_cast<Eigen::Index>(hw));
        MutMap om(out.plane(n, 0), static_cast<Eigen::Index>(cout), static_cast<Eigen::Index>(hw));
        om.noalias() = wm.transpose() * xm;
        if (!b.empty())
            for (std::size_t o = 0; o < cout; ++o) om.row(static_cast<Eigen::Index>(o)).array() += b[o];
    }
    return out;
}

Linear make_linear(Rng& rng, std::size_t cin, std::size_t cout, double stddev) {
    return {random_normal(Shape{cin, cout}, rng, stddev), Tensor(Shape{cout})};
}

Linear zero_linear(std::size_t cin, std::size_t cout) { return {Tensor(Shape{cin, cout}), Tensor(Shape{cout})}; }

Tensor LayerNorm::forward(const Tensor& x) const {
    const std::size_t C = gamma.numel();
    require_channels(x, C, "layer_norm");
    const Shape& s = x.shape();
    const std::size_t hw = s.h() * s.w();
    Tensor out(s);
    for (std::size_t n = 0; n < s.n(); ++n) {
        const double* src = x.plane(n, 0);
        double* dst = out.plane(n, 0);
        for (std::size_t p = 0; p < hw; ++p) {
            double mu = 0.0;
            for (std::size_t c = 0; c < C; ++c) mu += src[c * hw + p];
            mu /= static_cast<double>(C);
            double var = 0.0;
            for (std::size_t c = 0; c < C; ++c) var += (src[c * hw + p] - mu) * (src[c * hw + p] - mu);
            const double inv = 1.0 / std::sqrt(var / static_cast<double>(C) + eps);
            for (std::size_t c = 0; c < C; ++c) dst[c * hw + p] = (src[c * hw + p] - mu) * inv * gamma[c] + beta[c];
        }
    }
    return out;
}

LayerNorm make_layer_norm(std::size_t channels) { return {Tensor(Shape{channels}, 1.0), Tensor(Shape{channels})}; }

Tensor BatchNorm::forward(const Tensor& x) const {
    const std::size_t C = gamma.numel();
    require_channels(x, C, "batch_norm");
    const Shape& s = x.shape();
    const std::size_t hw = s.h() * s.w();
    Tensor out(s);
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < C; ++c) {
            const double k = gamma[c] / std::sqrt(var[c] + eps), shift = beta[c] - mean[c] * k;
            const double* src = x.plane(n, c);
            double* dst = out.plane(n, c);
            for (std::size_t p = 0; p < hw; ++p) dst[p] = src[p] * k + shift;
        }
    return out;
}

BatchNorm make_batch_norm(std::size_t channels) {
    return {Tensor(Shape{channels}, 1.0), Tensor(Shape{channels}), Tensor(Shape{channels}), Tensor(Shape{channels}, 1.0)};
}

Tensor gated_conv(const Tensor& x, const ConvLayer& feature, const ConvLayer& gate) {
    if (feature.out_channels() != gate.out_channels()) {
        throw ShapeError("gated_conv: feature has " + std::to_string(feature.out_channels()) + " output channels, gate " +
                         std::to_string(gate.out_channels()));
    }
    Tensor out = feature.forward(x);
    const Tensor g = gate.forward(x);
    require_same_shape(out, g, "gated_conv");
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= sigmoid(g[i]);
    return out;
}

Tensor GatedConv::forward(const Tensor& x) const { return gated_conv(x, feature, gate); }

Shape GatedConv::output_shape(const Shape& in) const { return feature.output_shape(in); }

GatedConv make_gated_conv(Rng& rng, std::size_t cin, std::size_t cout, std::size_t kernel, ConvSpec spec,
                          bool transposed) {
    GatedConv g;
    g.feature = make_conv(rng, cin, cout, kernel, spec, transposed);
    g.gate = make_conv(rng, cin, cout, kernel, spec, transposed);
    return g;
}

Tensor zerora_add(const Tensor& x, const Tensor& s, double alpha) {
    require_same_shape(x, s, "zerora");
    if (alpha == 0.0) return x;
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += alpha * s[i];
    return out;
}

Tensor zerora_apply(const Tensor& x, const std::function<Tensor(const Tensor&)>& f, double alpha) {
    return zerora_add(x, f(x), alpha);
}

Tensor sfe_inject(const Tensor& x, const Tensor& s, double alpha, const ConvLayer& conv, const BatchNorm& norm,
                  Activation act) {
    return activate(norm.forward(conv.forward(zerora_add(x, s, alpha))), act);
}

}  // namespace zits
