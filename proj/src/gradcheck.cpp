#include "zits/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace zits::ad {

namespace {

double evaluate(const Builder& build, const std::vector<Tensor>& inputs) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& t : inputs) leaves.push_back(tape.constant(t));
    return build(tape, leaves).value()[0];
}

// Random values bounded away from activation kinks.
Tensor away_from_zero(Shape s, Rng& rng) {
    Tensor t = random_uniform(s, rng);
    for (double& v : t.data())
        if (std::abs(v) < 1e-3) v = v < 0 ? -0.5 : 0.5;
    return t;
}

// Random-weighted sum so gradients are not uniform.
Var weighted_sum(Tape& tape, Var v, std::uint64_t seed) {
    Rng rng(seed);
    return sum(mul(v, tape.constant(random_uniform(v.shape(), rng))));
}

}  // namespace

GradReport check_gradients(const Builder& build, const std::vector<Tensor>& inputs, double step) {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t));
    tape.backward(build(tape, leaves));
    GradReport worst;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Tensor numeric = finite_diff(
            [&](const Tensor& probe) {
                std::vector<Tensor> in = inputs;
                in[k] = probe;
                return evaluate(build, in);
            },
            inputs[k], step);
        const GradReport r = compare_gradients("", tape.grad(leaves[k]), numeric);
        worst.max_abs_err = std::max(worst.max_abs_err, r.max_abs_err);
        worst.max_rel_err = std::max(worst.max_rel_err, r.max_rel_err);
    }
    return worst;
}

double worst_relative_error(const Builder& build, const std::vector<Tensor>& inputs, double step) {
    return check_gradients(build, inputs, step).max_rel_err;
}

std::vector<OpCheck> op_checks() {
    return {
        {"add", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{3, 4}, r), random_uniform(Shape{3, 4}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, add(v[0], v[1]), 1); }},
        {"sub", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{3, 4}, r), random_uniform(Shape{3, 4}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, sub(v[0], v[1]), 2); }},
        {"mul", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{3, 4}, r), random_uniform(Shape{3, 4}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, mul(v[0], v[1]), 3); }},
        {"affine", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{5}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, affine(v[0], -1.7, 0.3), 4); }},
        {"mul_scalar", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{1}, r), random_uniform(Shape{2, 3}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, mul_scalar(v[0], v[1]), 5); }},
        {"conv2d",
         [](Rng& r) {
             return std::vector<Tensor>{random_uniform(Shape{2, 4, 7, 6}, r), random_uniform(Shape{4, 2, 3, 2}, r),
                                        random_uniform(Shape{4}, r)};
         },
         [](Tape& t, const std::vector<Var>& v) {
             return weighted_sum(t, conv2d(v[0], v[1], v[2], ConvSpec{.stride = 2, .dilation = 1, .pad = 1, .groups = 2}), 6);
         }},
        {"conv2d_dilated",
         [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{1, 2, 8, 8}, r), random_uniform(Shape{3, 2, 3, 3}, r)}; },
         [](Tape& t, const std::vector<Var>& v) {
             return weighted_sum(t, conv2d(v[0], v[1], ConvSpec{.dilation = 2, .pad = 2}), 7);
         }},
        {"transposed_conv2d",
         [](Rng& r) {
             return std::vector<Tensor>{random_uniform(Shape{1, 3, 4, 4}, r), random_uniform(Shape{3, 2, 4, 4}, r),
                                        random_uniform(Shape{2}, r)};
         },
         [](Tape& t, const std::vector<Var>& v) {
             return weighted_sum(t, transposed_conv2d(v[0], v[1], v[2], ConvSpec{.stride = 2, .pad = 1}), 8);
         }},
        {"relu", [](Rng& r) { return std::vector<Tensor>{away_from_zero(Shape{4, 4}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, activation(v[0], Activation::Relu), 9); }},
        {"sigmoid", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{4, 4}, r, -4, 4)}; },
         [](Tape& t, const std::vector<Var>& v) {
             return weighted_sum(t, activation(v[0], Activation::Sigmoid), 10);
         }},
        {"tanh", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{4, 4}, r, -3, 3)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, activation(v[0], Activation::Tanh), 11); }},
        {"swish", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{4, 4}, r, -4, 4)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, activation(v[0], Activation::Swish), 12); }},
        {"resize_nearest", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{1, 2, 3, 5}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, resize_nearest(v[0], 7, 4), 13); }},
        {"max_pool",
         [](Rng& r) {
             // Distinct values keep each window's maximum unique, so the
             // function is differentiable at the sample point.
             Tensor x(Shape{1, 2, 4, 6});
             std::vector<double> vals(x.numel());
             for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.1 * static_cast<double>(i);
             std::shuffle(vals.begin(), vals.end(), r.engine());
             for (std::size_t i = 0; i < vals.size(); ++i) x[i] = vals[i];
             return std::vector<Tensor>{x};
         },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, pool2d(v[0], 2, PoolMode::Max), 14); }},
        {"avg_pool", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{1, 2, 4, 6}, r)}; },
         [](Tape& t, const std::vector<Var>& v) { return weighted_sum(t, pool2d(v[0], 2, PoolMode::Avg), 15); }},
        {"mean", [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{3, 3}, r)}; },
         [](Tape&, const std::vector<Var>& v) { return mean(mul(v[0], v[0])); }},
        {"bce",
         [](Rng& r) { return std::vector<Tensor>{random_uniform(Shape{2, 5}, r, 0.05, 0.95)}; },
         [](Tape&, const std::vector<Var>& v) {
             Tensor target(Shape{2, 5});
             for (std::size_t i = 0; i < target.numel(); ++i) target[i] = (i % 3) / 2.0;
             return binary_cross_entropy(v[0], target);
         }},
    };
}

std::vector<GradReport> gradient_suite(std::size_t instances, std::uint64_t seed, double step) {
    Rng rng(seed);
    std::vector<GradReport> reports;
    for (const OpCheck& c : op_checks()) {
        GradReport r{c.name, 0.0, 0.0};
        for (std::size_t i = 0; i < instances; ++i) {
            const GradReport one = check_gradients(c.build, c.inputs(rng), step);
            r.max_abs_err = std::max(r.max_abs_err, one.max_abs_err);
            r.max_rel_err = std::max(r.max_rel_err, one.max_rel_err);
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace zits::ad
