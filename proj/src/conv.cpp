#include "zits/conv.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <vector>

namespace zits {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

struct Geometry {
    std::size_t n, cin, h, w;
    std::size_t cout, kh, kw;
    std::size_t oh, ow;
    std::size_t groups, cin_g, cout_g;
};

void check_spec(const ConvSpec& spec) {
    if (spec.stride < 1) throw ShapeError("conv: stride must be >= 1, got " + std::to_string(spec.stride));
    if (spec.dilation < 1) throw ShapeError("conv: dilation must be >= 1, got " + std::to_string(spec.dilation));
    if (spec.pad < 0) throw ShapeError("conv: pad must be >= 0, got " + std::to_string(spec.pad));
    if (spec.groups < 1) throw ShapeError("conv: groups must be >= 1, got " + std::to_string(spec.groups));
}

// Range of output positions o with 0 <= o*stride + offset < extent.
std::pair<long, long> valid_range(long offset, long extent, long stride, long out_extent) {
    long lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
    long hi_num = extent - 1 - offset;
    long hi = hi_num < 0 ? -1 : hi_num / stride;
    return {std::min(lo, out_extent), std::clamp(hi + 1, 0L, out_extent)};
}

// Geometry of the convolution mapping `in` (N, Cin, H, W) through weights
// laid out (Cout, Cin/groups, kh, kw) to an output of extent (oh, ow).
Geometry make_geometry(const Shape& in, const Shape& weight, const ConvSpec& spec, std::size_t oh, std::size_t ow) {
    check_spec(spec);
    Geometry g{};
    g.n = in.n();
    g.cin = in.c();
    g.h = in.h();
    g.w = in.w();
    g.cout = weight.dim4(0);
    g.kh = weight.dim4(2);
    g.kw = weight.dim4(3);
    g.oh = oh;
    g.ow = ow;
    g.groups = static_cast<std::size_t>(spec.groups);
    if (g.cin % g.groups != 0) {
        throw ShapeError("conv: input channels " + std::to_string(g.cin) + " not divisible by groups " +
                         std::to_string(g.groups));
    }
    if (g.cout % g.groups != 0) {
        throw ShapeError("conv: output channels " + std::to_string(g.cout) + " not divisible by groups " +
                         std::to_string(g.groups));
    }
    g.cin_g = g.cin / g.groups;
    g.cout_g = g.cout / g.groups;
    if (weight.dim4(1) != g.cin_g) {
        throw ShapeError("conv: weight input-channel extent " + std::to_string(weight.dim4(1)) + " but input has " +
                         std::to_string(g.cin) + " channels in " + std::to_string(g.groups) + " groups");
    }
    return g;
}

// Unfold the C×H×W block at `in` into a (C·kh·kw) × (oh·ow) matrix.
void im2col(const double* in, const Geometry& g, std::size_t channels, const ConvSpec& s, double* cols) {
    const std::size_t ohw = g.oh * g.ow;
    for (std::size_t c = 0; c < channels; ++c) {
        const double* plane = in + c * g.h * g.w;
        for (std::size_t ky = 0; ky < g.kh; ++ky) {
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                double* row = cols + ((c * g.kh + ky) * g.kw + kx) * ohw;
                std::fill(row, row + ohw, 0.0);
                const long offy = static_cast<long>(ky) * s.dilation - s.pad;
                const long offx = static_cast<long>(kx) * s.dilation - s.pad;
                auto [y0, y1] = valid_range(offy, static_cast<long>(g.h), s.stride, static_cast<long>(g.oh));
                auto [x0, x1] = valid_range(offx, static_cast<long>(g.w), s.stride, static_cast<long>(g.ow));
                for (long oy = y0; oy < y1; ++oy) {
                    const double* src = plane + (oy * s.stride + offy) * static_cast<long>(g.w) + offx;
                    double* dst = row + oy * static_cast<long>(g.ow);
                    for (long ox = x0; ox < x1; ++ox) dst[ox] = src[ox * s.stride];
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add the column matrix back onto the C×H×W block.
void col2im(const double* cols, const Geometry& g, std::size_t channels, const ConvSpec& s, double* out) {
    const std::size_t ohw = g.oh * g.ow;
    for (std::size_t c = 0; c < channels; ++c) {
        double* plane = out + c * g.h * g.w;
        for (std::size_t ky = 0; ky < g.kh; ++ky) {
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                const double* row = cols + ((c * g.kh + ky) * g.kw + kx) * ohw;
                const long offy = static_cast<long>(ky) * s.dilation - s.pad;
                const long offx = static_cast<long>(kx) * s.dilation - s.pad;
                auto [y0, y1] = valid_range(offy, static_cast<long>(g.h), s.stride, static_cast<long>(g.oh));
                auto [x0, x1] = valid_range(offx, static_cast<long>(g.w), s.stride, static_cast<long>(g.ow));
                for (long oy = y0; oy < y1; ++oy) {
                    double* dst = plane + (oy * s.stride + offy) * static_cast<long>(g.w) + offx;
                    const double* src = row + oy * static_cast<long>(g.ow);
                    for (long ox = x0; ox < x1; ++ox) dst[ox * s.stride] += src[ox];
                }
            }
        }
    }
}

// Scratch space for unfolded columns, reused across calls so large layers do
// not fault in fresh pages every time.
double* column_buffer(std::size_t size) {
    thread_local std::vector<double> buf;
    if (buf.size() < size) buf.resize(size);
    return buf.data();
}

void add_bias(Tensor& out, std::span<const double> bias) {
    if (bias.empty()) return;
    const Shape& s = out.shape();
    if (bias.size() != s.c()) {
        throw ShapeError("conv: bias length " + std::to_string(bias.size()) + " but " + std::to_string(s.c()) +
                         " output channels");
    }
    const std::size_t hw = s.h() * s.w();
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c) {
            double* p = out.plane(n, c);
            for (std::size_t i = 0; i < hw; ++i) p[i] += bias[c];
        }
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvSpec& spec) {
    check_spec(spec);
    const long span = static_cast<long>(spec.dilation) * (static_cast<long>(kernel) - 1) + 1;
    const long padded = static_cast<long>(in) + 2L * spec.pad;
    if (padded < span) {
        throw ShapeError("conv: padded extent " + std::to_string(padded) + " smaller than kernel span " +
                         std::to_string(span));
    }
    return static_cast<std::size_t>((padded - span) / spec.stride + 1);
}

std::size_t transposed_output_extent(std::size_t in, std::size_t kernel, const ConvSpec& spec) {
    check_spec(spec);
    if (spec.output_padding < 0 || spec.output_padding >= spec.stride) {
        throw ShapeError("transposed conv: output_padding must lie in [0, stride)");
    }
    const long out = (static_cast<long>(in) - 1) * spec.stride - 2L * spec.pad +
                     static_cast<long>(spec.dilation) * (static_cast<long>(kernel) - 1) + spec.output_padding + 1;
    if (out < 1) throw ShapeError("transposed conv: output extent " + std::to_string(out) + " < 1");
    return static_cast<std::size_t>(out);
}

Tensor conv2d(const Tensor& x, const Tensor& w, std::span<const double> bias, const ConvSpec& spec) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    const std::size_t oh = conv_output_extent(xs.h(), ws.dim4(2), spec);
    const std::size_t ow = conv_output_extent(xs.w(), ws.dim4(3), spec);
    const Geometry g = make_geometry(xs, ws, spec, oh, ow);
    if (g.groups == g.cin && g.cout == g.cin) return depthwise_conv2d(x, w, bias, spec);

    Tensor out = Tensor::nchw(g.n, g.cout, oh, ow);
    const std::size_t k = g.cin_g * g.kh * g.kw;
    const std::size_t ohw = oh * ow;
    double* cols = column_buffer(k * ohw);
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t grp = 0; grp < g.groups; ++grp) {
            im2col(x.plane(n, grp * g.cin_g), g, g.cin_g, spec, cols);
            ConstMap wg(w.data().data() + grp * g.cout_g * k, static_cast<Eigen::Index>(g.cout_g),
                        static_cast<Eigen::Index>(k));
            ConstMap cm(cols, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ohw));
            MutMap ym(out.plane(n, grp * g.cout_g), static_cast<Eigen::Index>(g.cout_g),
                      static_cast<Eigen::Index>(ohw));
            ym.noalias() = wg * cm;
        }
    }
    add_bias(out, bias);
    return out;
}

Tensor conv2d_input_grad(const Tensor& grad_out, const Tensor& w, const Shape& input_shape, const ConvSpec& spec) {
    const Shape& gs = grad_out.shape();
    const Shape& ws = w.shape();
    const Geometry g = make_geometry(input_shape, ws, spec, gs.h(), gs.w());
    if (conv_output_extent(g.h, g.kh, spec) != gs.h()) {
        throw ShapeError("conv input grad: height " + std::to_string(gs.h()) + " inconsistent with input height " +
                         std::to_string(g.h));
    }
    if (conv_output_extent(g.w, g.kw, spec) != gs.w()) {
        throw ShapeError("conv input grad: width " + std::to_string(gs.w()) + " inconsistent with input width " +
                         std::to_string(g.w));
    }
    if (gs.c() != g.cout) {
        throw ShapeError("conv input grad: channels " + std::to_string(gs.c()) + " but weight has " +
                         std::to_string(g.cout) + " output channels");
    }
    if (gs.n() != g.n) throw ShapeError("conv input grad: batch extent mismatch");

    Tensor dx = Tensor::nchw(g.n, g.cin, g.h, g.w);
    const std::size_t k = g.cin_g * g.kh * g.kw;
    const std::size_t ohw = g.oh * g.ow;
    double* cols = column_buffer(k * ohw);
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t grp = 0; grp < g.groups; ++grp) {
            ConstMap wg(w.data().data() + grp * g.cout_g * k, static_cast<Eigen::Index>(g.cout_g),
                        static_cast<Eigen::Index>(k));
            ConstMap gm(grad_out.plane(n, grp * g.cout_g), static_cast<Eigen::Index>(g.cout_g),
                        static_cast<Eigen::Index>(ohw));
            MutMap cm(cols, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ohw));
            cm.noalias() = wg.transpose() * gm;
            col2im(cols, g, g.cin_g, spec, dx.plane(n, grp * g.cin_g));
        }
    }
    return dx;
}

Tensor conv2d_weight_grad(const Tensor& x, const Tensor& grad_out, const Shape& weight_shape, const ConvSpec& spec) {
    const Shape& xs = x.shape();
    const Shape& gs = grad_out.shape();
    const Geometry g = make_geometry(xs, weight_shape, spec, gs.h(), gs.w());
    if (conv_output_extent(g.h, g.kh, spec) != gs.h() || conv_output_extent(g.w, g.kw, spec) != gs.w()) {
        throw ShapeError("conv weight grad: gradient extent " + gs.str() + " inconsistent with input " + xs.str());
    }
    if (gs.c() != g.cout) throw ShapeError("conv weight grad: gradient channel extent mismatch");
    if (gs.n() != g.n) throw ShapeError("conv weight grad: batch extent mismatch");

    Tensor dw(weight_shape);
    const std::size_t k = g.cin_g * g.kh * g.kw;
    const std::size_t ohw = g.oh * g.ow;
    double* cols = column_buffer(k * ohw);
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t grp = 0; grp < g.groups; ++grp) {
            im2col(x.plane(n, grp * g.cin_g), g, g.cin_g, spec, cols);
            ConstMap cm(cols, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ohw));
            ConstMap gm(grad_out.plane(n, grp * g.cout_g), static_cast<Eigen::Index>(g.cout_g),
                        static_cast<Eigen::Index>(ohw));
            MutMap dwg(dw.data().data() + grp * g.cout_g * k, static_cast<Eigen::Index>(g.cout_g),
                       static_cast<Eigen::Index>(k));
            dwg.noalias() += gm * cm.transpose();
        }
    }
    return dw;
}

Tensor channel_sums(const Tensor& grad_out) {
    const Shape& s = grad_out.shape();
    Tensor out(Shape{s.c()});
    const std::size_t hw = s.h() * s.w();
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c) {
            const double* p = grad_out.plane(n, c);
            double acc = 0.0;
            for (std::size_t i = 0; i < hw; ++i) acc += p[i];
            out[c] += acc;
        }
    return out;
}

Tensor transposed_conv2d(const Tensor& x, const Tensor& w, std::span<const double> bias, const ConvSpec& spec) {
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    if (xs.c() != ws.dim4(0)) {
        throw ShapeError("transposed conv: input channels " + std::to_string(xs.c()) + " but weight expects " +
                         std::to_string(ws.dim4(0)));
    }
    const std::size_t oh = transposed_output_extent(xs.h(), ws.dim4(2), spec);
    const std::size_t ow = transposed_output_extent(xs.w(), ws.dim4(3), spec);
    const std::size_t out_channels = ws.dim4(1) * static_cast<std::size_t>(std::max(spec.groups, 1));
    Tensor out = conv2d_input_grad(x, w, Shape{xs.n(), out_channels, oh, ow}, spec);
    add_bias(out, bias);
    return out;
}

Tensor depthwise_conv2d(const Tensor& x, const Tensor& w, std::span<const double> bias, const ConvSpec& spec) {
    check_spec(spec);
    const Shape& xs = x.shape();
    const Shape& ws = w.shape();
    const std::size_t channels = xs.c();
    if (ws.dim4(0) != channels || ws.dim4(1) != 1) {
        throw ShapeError("depthwise conv: weight " + ws.str() + " does not match " + std::to_string(channels) +
                         " channels");
    }
    if (!bias.empty() && bias.size() != channels) throw ShapeError("depthwise conv: bias length mismatch");
    const std::size_t kh = ws.dim4(2), kw = ws.dim4(3);
    const std::size_t oh = conv_output_extent(xs.h(), kh, spec);
    const std::size_t ow = conv_output_extent(xs.w(), kw, spec);
    const long h = static_cast<long>(xs.h()), wd = static_cast<long>(xs.w());
    Tensor out = Tensor::nchw(xs.n(), channels, oh, ow);
    for (std::size_t n = 0; n < xs.n(); ++n) {
        for (std::size_t c = 0; c < channels; ++c) {
            const double* in = x.plane(n, c);
            double* dst = out.plane(n, c);
            if (!bias.empty()) std::fill(dst, dst + oh * ow, bias[c]);
            for (std::size_t ky = 0; ky < kh; ++ky) {
                const long offy = static_cast<long>(ky) * spec.dilation - spec.pad;
                auto [y0, y1] = valid_range(offy, h, spec.stride, static_cast<long>(oh));
                for (std::size_t kx = 0; kx < kw; ++kx) {
                    const double wv = w[(c * kh + ky) * kw + kx];
                    const long offx = static_cast<long>(kx) * spec.dilation - spec.pad;
                    auto [x0, x1] = valid_range(offx, wd, spec.stride, static_cast<long>(ow));
                    for (long oy = y0; oy < y1; ++oy) {
                        const double* src = in + (oy * spec.stride + offy) * wd + offx;
                        double* row = dst + oy * static_cast<long>(ow);
                        if (spec.stride == 1) {
                            for (long ox = x0; ox < x1; ++ox) row[ox] += wv * src[ox];
                        } else {
                            for (long ox = x0; ox < x1; ++ox) row[ox] += wv * src[ox * spec.stride];
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace zits
