#pragma once

#include <cstddef>
#include <span>

#include "zits/tensor.hpp"

namespace zits {

/// Geometry of a 2-D convolution. Kernel extents come from the weight
/// tensor; padding is symmetric and zero-valued.
struct ConvSpec {
    int stride = 1;
    int dilation = 1;
    int pad = 0;
    int groups = 1;
    /// Extra rows/columns appended to a transposed-convolution output so it
    /// can invert a strided convolution whose input size was not a multiple
    /// of the stride. Ignored by conv2d.
    int output_padding = 0;
};

/// floor((in + 2·pad − dilation·(k−1) − 1)/stride) + 1; throws if < 1.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvSpec& spec);
/// (in − 1)·stride − 2·pad + dilation·(k−1) + output_padding + 1; throws if < 1.
std::size_t transposed_output_extent(std::size_t in, std::size_t kernel, const ConvSpec& spec);

/// Cross-correlation (no kernel flip) of x (N, Cin, H, W) with
/// w (Cout, Cin/groups, kh, kw). `bias` is empty or has Cout entries.
Tensor conv2d(const Tensor& x, const Tensor& w, std::span<const double> bias, const ConvSpec& spec);
inline Tensor conv2d(const Tensor& x, const Tensor& w, const ConvSpec& spec = {}) { return conv2d(x, w, {}, spec); }

/// Adjoint of conv2d in its input. x is (N, A, H, W) and w is laid out as for
/// a convolution mapping B channels to A, i.e. (A, B/groups, kh, kw); the
/// result has B channels.
Tensor transposed_conv2d(const Tensor& x, const Tensor& w, std::span<const double> bias, const ConvSpec& spec);
inline Tensor transposed_conv2d(const Tensor& x, const Tensor& w, const ConvSpec& spec = {}) {
    return transposed_conv2d(x, w, {}, spec);
}

/// Gradient of <conv2d(x, w), grad_out> with respect to w.
Tensor conv2d_weight_grad(const Tensor& x, const Tensor& grad_out, const Shape& weight_shape, const ConvSpec& spec);
/// Gradient with respect to x, for an input of shape `input_shape`.
Tensor conv2d_input_grad(const Tensor& grad_out, const Tensor& w, const Shape& input_shape, const ConvSpec& spec);
/// Per-output-channel sum of grad_out (the bias gradient).
Tensor channel_sums(const Tensor& grad_out);

/// Depthwise convolution evaluated with direct loops (one kernel per
/// channel, w is (C, 1, kh, kw)). Used by conv2d for depthwise layers and
/// by the large-kernel benchmark.
Tensor depthwise_conv2d(const Tensor& x, const Tensor& w, std::span<const double> bias, const ConvSpec& spec);

}  // namespace zits
