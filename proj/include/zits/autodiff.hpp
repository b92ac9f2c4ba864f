#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "zits/conv.hpp"
#include "zits/ops.hpp"
#include "zits/tensor.hpp"

// Reverse-mode differentiation over a recorded tape of tensor operations.
// Nodes are appended in evaluation order, so the tape index order is already
// a topological order of the graph and backward simply walks it in reverse.

namespace zits::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    bool valid() const { return tape_ != nullptr; }
    std::size_t id() const { return id_; }
    Tape* tape() const { return tape_; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    /// Called with the node's accumulated gradient; adds into parent_grads
    /// entries that are non-null (parents that need a gradient).
    using BackwardFn = std::function<void(const Tape&, const Tensor& grad, std::span<Tensor* const> parent_grads)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Differentiable input.
    Var leaf(Tensor value);
    /// Input excluded from differentiation.
    Var constant(Tensor value);
    /// Appends an operation result. Parents must already be on this tape.
    Var record(Tensor value, std::vector<Var> parents, BackwardFn backward);

    /// Accumulates d(root)/d(node) into every node reachable from a
    /// scalar root. Gradients from earlier calls are cleared first.
    void backward(Var root);

    const Tensor& value(Var v) const;
    /// Gradient of the last backward root with respect to v; zeros when v
    /// did not contribute.
    Tensor grad(Var v) const;
    bool needs_grad(Var v) const;
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> parents;
        BackwardFn backward;
        bool needs_grad = false;
    };

    const Node& node(Var v) const;

    std::vector<Node> nodes_;
};

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// s·a + shift, elementwise.
Var affine(Var a, double s, double shift);
/// alpha·x for a single-element alpha.
Var mul_scalar(Var alpha, Var x);

Var conv2d(Var x, Var w, const ConvSpec& spec);
Var conv2d(Var x, Var w, Var bias, const ConvSpec& spec);
Var transposed_conv2d(Var x, Var w, const ConvSpec& spec);
Var transposed_conv2d(Var x, Var w, Var bias, const ConvSpec& spec);

Var activation(Var x, Activation kind);
Var resize_nearest(Var x, std::size_t new_h, std::size_t new_w);
Var pool2d(Var x, std::size_t window, PoolMode mode);

Var sum(Var x);
Var mean(Var x);
/// Mean binary cross-entropy between probabilities p (clamped to
/// [eps, 1 − eps]) and a constant target of the same shape.
Var binary_cross_entropy(Var p, const Tensor& target, double eps = 1e-7);

/// Central differences (f(x + h·e_i) − f(x − h·e_i)) / (2h) for every element.
Tensor finite_diff(const std::function<double(const Tensor&)>& f, const Tensor& x, double step);

/// Analytic-versus-numeric gradient discrepancy for one parameter.
struct GradReport {
    std::string name;
    double max_abs_err = 0.0;
    /// max_abs_err divided by the larger of the two gradients' max norms.
    double max_rel_err = 0.0;
};

GradReport compare_gradients(std::string name, const Tensor& analytic, const Tensor& numeric);

}  // namespace zits::ad
