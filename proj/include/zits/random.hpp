#pragma once

#include <cstdint>
#include <random>

#include "zits/tensor.hpp"

namespace zits {

/// Seeded generator shared by every stochastic routine so runs are
/// reproducible from a single integer.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline Tensor random_uniform(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(shape);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

inline Tensor random_normal(Shape shape, Rng& rng, double stddev = 1.0) {
    Tensor t(shape);
    for (double& v : t.data()) v = rng.normal(0.0, stddev);
    return t;
}

}  // namespace zits
