#include "zits/attention.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Core>

namespace zits {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;

ConstMap as_matrix(const Tensor& w) {
    return ConstMap(w.data().data(), static_cast<Eigen::Index>(w.shape().h()), static_cast<Eigen::Index>(w.shape().w()));
}

void require_square(const Tensor& w, std::size_t c, const char* what) {
    if (!(w.shape() == Shape{c, c})) {
        throw ShapeError(std::string(what) + ": expected a " + std::to_string(c) + "x" + std::to_string(c) +
                         " projection, got " + w.shape().str());
    }
}

void softmax_rows(RowMat& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        r.array() = (r.array() - r.maxCoeff()).exp();
        r /= r.sum();
    }
}

// Attention over the rows of `tokens` (L × C); `bias(i, j)` is added to the
// logits before the softmax.
template <class Bias>
RowMat attend(const RowMat& tokens, const Tensor& wq, const Tensor& wk, const Tensor& wv, double scale, Bias bias) {
    const RowMat q = tokens * as_matrix(wq);
    const RowMat k = tokens * as_matrix(wk);
    const RowMat v = tokens * as_matrix(wv);
    RowMat a = (q * k.transpose()) * scale;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) += bias(i, j);
    softmax_rows(a);
    return a * v;
}

}  // namespace

AxisAttention make_axis_attention(Rng& rng, std::size_t channels, std::size_t capacity) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(channels));
    AxisAttention a;
    a.wq = random_normal(Shape{channels, channels}, rng, sd);
    a.wk = random_normal(Shape{channels, channels}, rng, sd);
    a.wv = random_normal(Shape{channels, channels}, rng, sd);
    a.rpe = Tensor(Shape{2 * capacity - 1});
    return a;
}

AxialParams make_axial_params(Rng& rng, std::size_t channels, std::size_t capacity) {
    AxialParams p;
    p.row = make_axis_attention(rng, channels, capacity);
    p.col = make_axis_attention(rng, channels, capacity);
    return p;
}

Tensor axial_attention(const Tensor& x, const AxisAttention& p, Axis axis) {
    const Shape& s = x.shape();
    const std::size_t C = s.c(), H = s.h(), W = s.w();
    for (const Tensor* w : {&p.wq, &p.wk, &p.wv}) require_square(*w, C, "axial_attention");
    const std::size_t len = axis == Axis::Row ? W : H, lines = axis == Axis::Row ? H : W;
    if (p.rpe.numel() % 2 == 0 || len > p.capacity()) {
        throw ShapeError("axial_attention: axis length " + std::to_string(len) + " exceeds the position table capacity " +
                         std::to_string(p.capacity()));
    }
    const auto bias = [&p](Eigen::Index i, Eigen::Index j) { return p.bias(i, j); };
    Tensor out(s);
    RowMat tokens(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(C));
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t line = 0; line < lines; ++line) {
            const auto offset = [&](std::size_t pos) { return axis == Axis::Row ? line * W + pos : pos * W + line; };
            for (std::size_t c = 0; c < C; ++c) {
                const double* src = x.plane(n, c);
                for (std::size_t i = 0; i < len; ++i) tokens(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = src[offset(i)];
            }
            const RowMat o = attend(tokens, p.wq, p.wk, p.wv, 1.0, bias);
            for (std::size_t c = 0; c < C; ++c) {
                double* dst = out.plane(n, c);
                for (std::size_t i = 0; i < len; ++i) dst[offset(i)] = o(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            }
        }
    return out;
}

Tensor axial_attention(const Tensor& x, const AxialParams& p, Axis axis) {
    return axial_attention(x, axis == Axis::Row ? p.row : p.col, axis);
}

StandardAttentionParams make_standard_attention(Rng& rng, std::size_t channels) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(channels));
    return {random_normal(Shape{channels, channels}, rng, sd), random_normal(Shape{channels, channels}, rng, sd),
            random_normal(Shape{channels, channels}, rng, sd)};
}

Tensor standard_attention(const Tensor& x, const StandardAttentionParams& p) {
    const Shape& s = x.shape();
    const std::size_t C = s.c(), hw = s.h() * s.w();
    for (const Tensor* w : {&p.wq, &p.wk, &p.wv}) require_square(*w, C, "standard_attention");
    Tensor out(s);
    for (std::size_t n = 0; n < s.n(); ++n) {
        const RowMat tokens =
            ConstMap(x.plane(n, 0), static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(hw)).transpose();
        const RowMat o = attend(tokens, p.wq, p.wk, p.wv, 1.0 / std::sqrt(static_cast<double>(C)),
                                [](Eigen::Index, Eigen::Index) { return 0.0; });
        Eigen::Map<RowMat>(out.plane(n, 0), static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(hw)) = o.transpose();
    }
    return out;
}

double gelu(double v) {
    const double k = std::sqrt(2.0 / std::numbers::pi);
    return 0.5 * v * (1.0 + std::tanh(k * (v + 0.044715 * v * v * v)));
}

TransformerBlockParams make_transformer_block(Rng& rng, std::size_t channels, std::size_t capacity, bool use_standard) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(channels));
    TransformerBlockParams p;
    p.norm_row = make_layer_norm(channels);
    p.norm_col = make_layer_norm(channels);
    p.norm_std = make_layer_norm(channels);
    p.norm_ffn = make_layer_norm(channels);
    p.axial = make_axial_params(rng, channels, capacity);
    p.out_row = make_linear(rng, channels, channels, sd);
    p.out_col = make_linear(rng, channels, channels, sd);
    p.use_standard = use_standard;
    if (use_standard) {
        p.standard = make_standard_attention(rng, channels);
        p.out_std = make_linear(rng, channels, channels, sd);
    }
    p.ffn_in = make_linear(rng, channels, 4 * channels, sd);
    p.ffn_out = make_linear(rng, 4 * channels, channels, 0.5 * sd);
    return p;
}

Tensor transformer_block(const Tensor& x, const TransformerBlockParams& p) {
    Tensor h = x;
    h += p.out_row.forward(axial_attention(p.norm_row.forward(h), p.axial.row, Axis::Row));
    h += p.out_col.forward(axial_attention(p.norm_col.forward(h), p.axial.col, Axis::Col));
    if (p.use_standard) h += p.out_std.forward(standard_attention(p.norm_std.forward(h), p.standard));
    Tensor f = p.ffn_in.forward(p.norm_ffn.forward(h));
    for (double& v : f.data()) v = gelu(v);
    h += p.ffn_out.forward(f);
    return h;
}

}  // namespace zits
