#pragma once

#include <cstddef>
#include <string_view>

#include "zits/tensor.hpp"

namespace zits {

enum class PoolMode { Max, Avg };
enum class ResizeMode { Nearest, Bilinear };
enum class Activation { Identity, Relu, Sigmoid, Tanh, Swish };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation kind);

/// Non-overlapping window pooling over H and W. Both extents must be
/// divisible by `window`; there is no implicit padding.
Tensor pool2d(const Tensor& x, std::size_t window, PoolMode mode);
/// Routes grad_out back through pool2d(x). Max mode sends each window's
/// gradient to the first maximal element in row-major scan order.
Tensor pool2d_backward(const Tensor& x, const Tensor& grad_out, std::size_t window, PoolMode mode);

/// Nearest samples source floor((i + 0.5)·H/new_h). Bilinear uses half-pixel
/// centres (align_corners = false) with edge clamping.
Tensor resize(const Tensor& x, std::size_t new_h, std::size_t new_w, ResizeMode mode);
/// Scatter-add adjoint of nearest resize, producing a gradient of shape `input_shape`.
Tensor resize_nearest_backward(const Tensor& grad_out, const Shape& input_shape);

/// Source row for output row i under nearest resizing from `in` to `out` rows.
std::size_t nearest_source(std::size_t i, std::size_t in, std::size_t out);

double sigmoid(double v);
double activate(double v, Activation kind);
/// d activate(v)/dv evaluated at the pre-activation v. ReLU uses 0 at v = 0.
double activate_derivative(double v, Activation kind);
Tensor activate(const Tensor& x, Activation kind);

}  // namespace zits
