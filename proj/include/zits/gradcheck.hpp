#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zits/autodiff.hpp"
#include "zits/random.hpp"

// Finite-difference audit of every differentiable tape operation.

namespace zits::ad {

/// Builds a scalar from leaf handles on `tape`.
using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Worst absolute and normwise relative errors between backward and central
/// differences over all inputs of `build` evaluated at `inputs`.
GradReport check_gradients(const Builder& build, const std::vector<Tensor>& inputs, double step = 1e-5);

/// Worst normwise relative error between backward and central differences
/// over all inputs of `build` evaluated at `inputs`.
double worst_relative_error(const Builder& build, const std::vector<Tensor>& inputs, double step = 1e-5);

struct OpCheck {
    std::string name;
    std::function<std::vector<Tensor>(Rng&)> inputs;
    Builder build;
};

/// One case per differentiable op, each reduced to a randomly weighted sum.
std::vector<OpCheck> op_checks();

/// Runs every op check on `instances` random draws and reports the worst
/// errors per op.
std::vector<GradReport> gradient_suite(std::size_t instances, std::uint64_t seed, double step = 1e-5);

}  // namespace zits::ad
