#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "zits/autodiff.hpp"
#include "zits/gradcheck.hpp"
#include "zits/random.hpp"

using namespace zits;
namespace ad = zits::ad;

namespace {

// Builds a scalar on a fresh tape from leaf values and returns the value
// together with each leaf's analytic gradient.
using Builder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

double evaluate(const Builder& build, const std::vector<Tensor>& inputs) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const Tensor& t : inputs) leaves.push_back(tape.constant(t));
    return build(tape, leaves).value()[0];
}

std::vector<Tensor> analytic(const Builder& build, const std::vector<Tensor>& inputs) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    for (const Tensor& t : inputs) leaves.push_back(tape.leaf(t));
    tape.backward(build(tape, leaves));
    std::vector<Tensor> grads;
    for (const ad::Var& v : leaves) grads.push_back(tape.grad(v));
    return grads;
}

double fd_worst_error(const Builder& build, const std::vector<Tensor>& inputs) {
    const std::vector<Tensor> grads = analytic(build, inputs);
    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const Tensor numeric = ad::finite_diff(
            [&](const Tensor& probe) {
                std::vector<Tensor> in = inputs;
                in[k] = probe;
                return evaluate(build, in);
            },
            inputs[k], 1e-5);
        worst = std::max(worst, ad::compare_gradients("p", grads[k], numeric).max_rel_err);
    }
    return worst;
}

// Random-weighted sum so gradients are not uniform.
ad::Var weighted_sum(ad::Tape& tape, ad::Var v, std::uint64_t seed) {
    Rng rng(seed);
    return ad::sum(ad::mul(v, tape.constant(random_uniform(v.shape(), rng))));
}

}  // namespace

TEST(Autodiff, SumGradientIsOnes) {
    ad::Tape tape;
    Rng rng(1);
    const ad::Var x = tape.leaf(random_uniform(Shape{2, 3, 4}, rng));
    tape.backward(ad::sum(x));
    const Tensor g = tape.grad(x);
    for (double v : g.data()) EXPECT_EQ(v, 1.0);
}

TEST(Autodiff, SumOfSquaresGradientIsTwiceInput) {
    ad::Tape tape;
    Rng rng(2);
    const Tensor xv = random_uniform(Shape{5, 5}, rng);
    const ad::Var x = tape.leaf(xv);
    tape.backward(ad::sum(ad::mul(x, x)));
    const Tensor g = tape.grad(x);
    for (std::size_t i = 0; i < xv.numel(); ++i) EXPECT_DOUBLE_EQ(g[i], 2.0 * xv[i]);
}

TEST(Autodiff, FanOutAccumulates) {
    ad::Tape tape;
    const ad::Var x = tape.leaf(Tensor(Shape{3}, 1.5));
    tape.backward(ad::sum(ad::add(ad::scale(x, 2.0), ad::scale(x, 3.0))));
    const Tensor g = tape.grad(x);
    for (double v : g.data()) EXPECT_EQ(v, 5.0);
}

TEST(Autodiff, NonScalarRootThrows) {
    ad::Tape tape;
    const ad::Var x = tape.leaf(Tensor(Shape{3}, 1.0));
    EXPECT_THROW(tape.backward(x), std::invalid_argument);
}

TEST(Autodiff, GradientShapeEqualsValueShape) {
    ad::Tape tape;
    Rng rng(3);
    const ad::Var x = tape.leaf(random_uniform(Shape{1, 2, 6, 6}, rng));
    const ad::Var w = tape.leaf(random_uniform(Shape{3, 2, 3, 3}, rng));
    const ad::Var unused = tape.leaf(Tensor(Shape{4, 4}));
    tape.backward(ad::sum(ad::conv2d(x, w, ConvSpec{.pad = 1})));
    EXPECT_EQ(tape.grad(x).shape(), x.shape());
    EXPECT_EQ(tape.grad(w).shape(), w.shape());
    EXPECT_EQ(tape.grad(unused).shape(), unused.shape());
    EXPECT_EQ(max_abs(tape.grad(unused)), 0.0);
}

TEST(Autodiff, ConvSumMatchesFiniteDifferences) {
    Rng rng(4);
    const Builder f = [](ad::Tape&, const std::vector<ad::Var>& v) { return ad::sum(ad::conv2d(v[0], v[1], ConvSpec{})); };
    EXPECT_LE(fd_worst_error(f, {random_uniform(Shape{1, 2, 6, 6}, rng), random_uniform(Shape{2, 2, 3, 3}, rng)}),
              1e-6);
}

TEST(FiniteDiff, SumGivesOnes) {
    Rng rng(5);
    const Tensor g = ad::finite_diff([](const Tensor& t) { return sum(t); }, random_uniform(Shape{7}, rng), 1e-3);
    for (double v : g.data()) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(FiniteDiff, SumOfSquaresGivesTwiceInput) {
    Rng rng(6);
    const Tensor x = random_uniform(Shape{9}, rng);
    const Tensor g = ad::finite_diff([](const Tensor& t) { return dot(t, t); }, x, 1e-5);
    for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(g[i], 2.0 * x[i], 1e-7);
}

TEST(FiniteDiff, RejectsNonPositiveStep) {
    EXPECT_THROW(ad::finite_diff([](const Tensor&) { return 0.0; }, Tensor(Shape{1}), 0.0), std::invalid_argument);
}

TEST(FiniteDiff, AgreesWithBackwardOnThreeLayerSwishNet) {
    Rng rng(7);
    const Builder net = [](ad::Tape& tape, const std::vector<ad::Var>& v) {
        ad::Var h = ad::activation(ad::conv2d(v[0], v[1], v[2], ConvSpec{.pad = 1}), Activation::Swish);
        h = ad::activation(ad::conv2d(h, v[3], ConvSpec{.stride = 2, .pad = 1}), Activation::Swish);
        h = ad::conv2d(h, v[4], ConvSpec{});
        return weighted_sum(tape, h, 99);
    };
    const std::vector<Tensor> in{random_uniform(Shape{1, 2, 6, 6}, rng), random_uniform(Shape{3, 2, 3, 3}, rng),
                                 random_uniform(Shape{3}, rng), random_uniform(Shape{3, 3, 3, 3}, rng),
                                 random_uniform(Shape{1, 3, 1, 1}, rng)};
    EXPECT_LE(fd_worst_error(net, in), 1e-5);
}

// Every differentiable op, 20 random instances each.
TEST(Autodiff, EveryOpMatchesFiniteDifferences) {
    Rng rng(8);
    for (const ad::OpCheck& c : ad::op_checks()) {
        for (int i = 0; i < 20; ++i) {
            EXPECT_LE(fd_worst_error(c.build, c.inputs(rng)), 1e-5) << c.name << " instance " << i;
        }
    }
}

TEST(Autodiff, ZeroAlphaResidualPassesGradientThrough) {
    // x' = x + α·F(x) at α = 0: the input gradient is exactly the upstream one.
    Rng rng(9);
    ad::Tape tape;
    const ad::Var x = tape.leaf(random_uniform(Shape{1, 2, 5, 5}, rng));
    const ad::Var w = tape.leaf(random_uniform(Shape{2, 2, 3, 3}, rng));
    const ad::Var alpha = tape.leaf(Tensor(Shape{1}, 0.0));
    const ad::Var fx = ad::activation(ad::conv2d(x, w, ConvSpec{.pad = 1}), Activation::Swish);
    const Tensor upstream = random_uniform(x.shape(), rng);
    const ad::Var out = ad::sum(ad::mul(ad::add(x, ad::mul_scalar(alpha, fx)), tape.constant(upstream)));
    tape.backward(out);
    EXPECT_EQ(tape.grad(x).vec(), upstream.vec());
    EXPECT_EQ(max_abs(tape.grad(w)), 0.0);
    EXPECT_NE(tape.grad(alpha)[0], 0.0);
}
