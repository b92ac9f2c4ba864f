#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "zits/io.hpp"
#include "zits/priors.hpp"
#include "zits/random.hpp"
#include "zits/tensor.hpp"

// Structure upsampler: a four-layer CNN that doubles the resolution of a
// grey line or edge map. Layer 1 is a 4×4 stride-2 transposed convolution,
// layers 2–4 are 3×3 convolutions, with ReLU between layers. The raw output
// r is mapped to a probability by sigmoid(γ·(r + β)).

namespace zits {

inline constexpr std::size_t kDefaultSsuWidth = 16;
inline constexpr double kSsuGamma = 2.0;
inline constexpr double kSsuBeta = 2.0;

struct SsuWeights {
    Tensor up_w, up_b;      // (1, width, 4, 4), (width)
    Tensor c1_w, c1_b;      // (width, width, 3, 3), (width)
    Tensor c2_w, c2_b;
    Tensor head_w, head_b;  // (1, width, 3, 3), (1)

    std::size_t width() const { return up_b.numel(); }
    ParamList to_params() const;
    static SsuWeights from_params(const ParamList& params);
};

/// He-normal weights and zero biases, except the head bias, which starts at
/// −(β + 3) so the untrained output is near 0 on blank input.
SsuWeights ssu_init(std::size_t width, std::uint64_t seed);

/// Raw (pre-sigmoid) output for an (N, 1, H, W) input: (N, 1, 2H, 2W).
Tensor ssu_raw(const Tensor& x, const SsuWeights& w);
/// sigmoid(γ·(raw + β)).
Tensor ssu_forward(const Tensor& x, const SsuWeights& w, double gamma = kSsuGamma, double beta = kSsuBeta);

/// Applies ssu_forward ⌈log2(max(target_h / H, target_w / W))⌉ times, then
/// resizes bilinearly to exactly (target_h, target_w). Throws
/// std::invalid_argument when the target is smaller than the input.
Tensor ssu_upsample(const Tensor& prior, const SsuWeights& w, std::size_t target_h, std::size_t target_w,
                    double gamma = kSsuGamma, double beta = kSsuBeta);

/// 2–8 random segments, each at least `min_length` pixels long, with
/// endpoints inside [0, size]².
std::vector<LineSegment> random_segments(Rng& rng, std::size_t size, double min_length = 8.0);

struct SsuPair {
    Tensor input;   // (1, 1, size, size)
    Tensor target;  // (1, 1, 2·size, 2·size)
};
/// Low/high-resolution rasterisations of the same random segments.
std::vector<SsuPair> make_ssu_corpus(std::size_t count, std::size_t size, std::uint64_t seed);

struct SsuTrainConfig {
    std::size_t epochs = 6;
    double step = 0.05;
    double momentum = 0.9;
    /// Decay the step linearly to zero over the whole run, so the final
    /// weights are not dominated by the last few batches' random γ and β.
    bool linear_decay = true;
    std::size_t batch = 8;
    /// When non-zero, each step trains on a random crop×crop window of the
    /// input (and the matching 2×crop window of the target) instead of the
    /// whole pair. Windows with no line pixels are redrawn a few times.
    std::size_t crop = 24;
    /// γ and β are redrawn per batch from [gamma_lo, gamma_hi].
    double gamma_lo = 1.5;
    double gamma_hi = 3.0;
    std::uint64_t seed = 0;
};

struct SsuTrainReport {
    std::vector<double> epoch_losses;  // mean BCE per epoch
    std::vector<double> epoch_scores;  // empty without a score callback
    std::size_t best_epoch = 0;
};

using SsuScore = std::function<double(const SsuWeights&)>;

/// Minibatch SGD with momentum on mean binary cross-entropy between
/// ssu_forward(input) and target. Throws std::runtime_error if the loss
/// stops being finite. `progress` (optional) is called after every epoch.
/// With a `score` callback the weights of the highest-scoring epoch are
/// returned instead of the last ones.
SsuTrainReport ssu_train(SsuWeights& weights, const std::vector<SsuPair>& corpus, const SsuTrainConfig& config,
                         const std::function<void(std::size_t epoch, double loss)>& progress = {},
                         const SsuScore& score = {});

struct SsuEvaluation {
    double f1_2x = 0;  // mean F1 of one ssu_forward against direct 2× rasterisation
    double f1_4x = 0;  // mean F1 of ssu_upsample to 4× against direct 4× rasterisation
};

/// Scores weights on `count` fresh random segment sets of side `size`,
/// drawn with `seed` (disjoint from training when the seeds differ).
SsuEvaluation ssu_evaluate(const SsuWeights& w, std::size_t count, std::size_t size, std::uint64_t seed);

}  // namespace zits
