#include "zits/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zits::ad {

const Tensor& Var::value() const {
    if (!tape_) throw std::logic_error("autodiff: use of an unbound Var");
    return tape_->value(*this);
}

const Tape::Node& Tape::node(Var v) const {
    if (v.tape_ != this || v.id_ >= nodes_.size()) throw std::logic_error("autodiff: Var belongs to another tape");
    return nodes_[v.id_];
}

Var Tape::leaf(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, true});
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<Var> parents, BackwardFn backward) {
    Node n{std::move(value), {}, {}, {}, false};
    for (const Var& p : parents) {
        n.needs_grad = n.needs_grad || node(p).needs_grad;
        n.parents.push_back(p.id_);
    }
    if (n.needs_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var root) {
    const Node& r = node(root);
    if (r.value.numel() != 1) {
        throw std::invalid_argument("autodiff: backward root must be scalar, got shape " + r.value.shape().str());
    }
    for (Node& n : nodes_) n.grad = Tensor();
    nodes_[root.id_].grad = Tensor(r.value.shape(), 1.0);

    std::vector<Tensor*> parent_grads;
    for (std::size_t i = root.id_ + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
        parent_grads.clear();
        for (std::size_t p : n.parents) {
            Node& pn = nodes_[p];
            if (!pn.needs_grad) {
                parent_grads.push_back(nullptr);
                continue;
            }
            if (pn.grad.empty()) pn.grad = Tensor(pn.value.shape());
            parent_grads.push_back(&pn.grad);
        }
        n.backward(*this, n.grad, parent_grads);
    }
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Tensor Tape::grad(Var v) const {
    const Node& n = node(v);
    return n.grad.empty() ? Tensor(n.value.shape()) : n.grad;
}

bool Tape::needs_grad(Var v) const { return node(v).needs_grad; }

namespace {

Tape& same_tape(Var a, Var b) {
    if (!a.valid() || a.tape() != b.tape()) throw std::logic_error("autodiff: operands on different tapes");
    return *a.tape();
}

void accumulate(Tensor* dst, const Tensor& g) {
    if (dst) *dst += g;
}

}  // namespace

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return t.record(a.value() + b.value(), {a, b}, [](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
        accumulate(pg[0], g);
        accumulate(pg[1], g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return t.record(a.value() - b.value(), {a, b}, [](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
        accumulate(pg[0], g);
        if (pg[1]) *pg[1] -= g;
    });
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    return t.record(hadamard(a.value(), b.value()), {a, b},
                    [a, b](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                        if (pg[0]) *pg[0] += hadamard(g, b.value());
                        if (pg[1]) *pg[1] += hadamard(g, a.value());
                    });
}

Var scale(Var a, double s) { return affine(a, s, 0.0); }

Var affine(Var a, double s, double shift) {
    Tensor out = a.value();
    for (double& v : out.data()) v = s * v + shift;
    return a.tape()->record(std::move(out), {a}, [s](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
        if (pg[0]) *pg[0] += s * g;
    });
}

Var mul_scalar(Var alpha, Var x) {
    Tape& t = same_tape(alpha, x);
    if (alpha.value().numel() != 1) throw ShapeError("mul_scalar: alpha must have one element");
    const double a = alpha.value()[0];
    return t.record(a * x.value(), {alpha, x}, [alpha, x](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
        if (pg[0]) (*pg[0])[0] += dot(g, x.value());
        if (pg[1]) *pg[1] += alpha.value()[0] * g;
    });
}

Var conv2d(Var x, Var w, const ConvSpec& spec) {
    Tape& t = same_tape(x, w);
    return t.record(zits::conv2d(x.value(), w.value(), {}, spec), {x, w},
                    [x, w, spec](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                        if (pg[0]) *pg[0] += conv2d_input_grad(g, w.value(), x.shape(), spec);
                        if (pg[1]) *pg[1] += conv2d_weight_grad(x.value(), g, w.shape(), spec);
                    });
}

Var conv2d(Var x, Var w, Var bias, const ConvSpec& spec) {
    Tape& t = same_tape(x, w);
    same_tape(x, bias);
    return t.record(zits::conv2d(x.value(), w.value(), bias.value().data(), spec), {x, w, bias},
                    [x, w, spec](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                        if (pg[0]) *pg[0] += conv2d_input_grad(g, w.value(), x.shape(), spec);
                        if (pg[1]) *pg[1] += conv2d_weight_grad(x.value(), g, w.shape(), spec);
                        if (pg[2]) *pg[2] += channel_sums(g).reshaped(pg[2]->shape());
                    });
}

Var transposed_conv2d(Var x, Var w, const ConvSpec& spec) {
    Tape& t = same_tape(x, w);
    return t.record(zits::transposed_conv2d(x.value(), w.value(), {}, spec), {x, w},
                    [x, w, spec](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                        if (pg[0]) *pg[0] += zits::conv2d(g, w.value(), {}, spec);
                        if (pg[1]) *pg[1] += conv2d_weight_grad(g, x.value(), w.shape(), spec);
                    });
}

Var transposed_conv2d(Var x, Var w, Var bias, const ConvSpec& spec) {
    Tape& t = same_tape(x, w);
    same_tape(x, bias);
    return t.record(zits::transposed_conv2d(x.value(), w.value(), bias.value().data(), spec), {x, w, bias},
                    [x, w, spec](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                        if (pg[0]) *pg[0] += zits::conv2d(g, w.value(), {}, spec);
                        if (pg[1]) *pg[1] += conv2d_weight_grad(g, x.value(), w.shape(), spec);
                        if (pg[2]) *pg[2] += channel_sums(g).reshaped(pg[2]->shape());
                    });
}

Var activation(Var x, Activation kind) {
    return x.tape()->record(activate(x.value(), kind), {x},
                            [x, kind](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                                if (!pg[0]) return;
                                const Tensor& in = x.value();
                                Tensor& dst = *pg[0];
                                for (std::size_t i = 0; i < g.numel(); ++i)
                                    dst[i] += g[i] * activate_derivative(in[i], kind);
                            });
}

Var resize_nearest(Var x, std::size_t new_h, std::size_t new_w) {
    return x.tape()->record(resize(x.value(), new_h, new_w, ResizeMode::Nearest), {x},
                            [x](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                                if (pg[0]) *pg[0] += resize_nearest_backward(g, x.shape());
                            });
}

Var pool2d(Var x, std::size_t window, PoolMode mode) {
    return x.tape()->record(zits::pool2d(x.value(), window, mode), {x},
                            [x, window, mode](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                                if (pg[0]) *pg[0] += pool2d_backward(x.value(), g, window, mode);
                            });
}

Var sum(Var x) {
    return x.tape()->record(Tensor(Shape{1}, zits::sum(x.value())), {x},
                            [](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                                if (!pg[0]) return;
                                for (double& v : pg[0]->data()) v += g[0];
                            });
}

Var mean(Var x) {
    const double inv = 1.0 / static_cast<double>(x.value().numel());
    return x.tape()->record(Tensor(Shape{1}, zits::sum(x.value()) * inv), {x},
                            [inv](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                                if (!pg[0]) return;
                                for (double& v : pg[0]->data()) v += g[0] * inv;
                            });
}

Var binary_cross_entropy(Var p, const Tensor& target, double eps) {
    require_same_shape(p.value(), target, "binary_cross_entropy");
    const Tensor& pv = p.value();
    const double inv = 1.0 / static_cast<double>(pv.numel());
    double loss = 0.0;
    for (std::size_t i = 0; i < pv.numel(); ++i) {
        const double q = std::clamp(pv[i], eps, 1.0 - eps);
        loss -= target[i] * std::log(q) + (1.0 - target[i]) * std::log(1.0 - q);
    }
    return p.tape()->record(Tensor(Shape{1}, loss * inv), {p},
                            [p, target, eps, inv](const Tape&, const Tensor& g, std::span<Tensor* const> pg) {
                                if (!pg[0]) return;
                                const Tensor& pv2 = p.value();
                                Tensor& dst = *pg[0];
                                for (std::size_t i = 0; i < pv2.numel(); ++i) {
                                    const double q = pv2[i];
                                    if (q < eps || q > 1.0 - eps) continue;
                                    dst[i] += g[0] * inv * (-target[i] / q + (1.0 - target[i]) / (1.0 - q));
                                }
                            });
}

Tensor finite_diff(const std::function<double(const Tensor&)>& f, const Tensor& x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff: step must be positive");
    Tensor grad(x.shape());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.numel(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + step;
        const double up = f(probe);
        probe[i] = orig - step;
        const double down = f(probe);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

GradReport compare_gradients(std::string name, const Tensor& analytic, const Tensor& numeric) {
    GradReport r{std::move(name), max_abs_diff(analytic, numeric), 0.0};
    const double scale = std::max({max_abs(analytic), max_abs(numeric), 1e-300});
    r.max_rel_err = r.max_abs_err / scale;
    return r;
}

}  // namespace zits::ad
