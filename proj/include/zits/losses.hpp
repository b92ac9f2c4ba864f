#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "zits/autodiff.hpp"
#include "zits/mask.hpp"
#include "zits/tensor.hpp"

// Inpainting objectives. Every expectation is a plain mean over all elements,
// batch included. Masks are (H, W) and broadcast over batch and channels.

namespace zits {

struct LossWeights {
    double l1 = 10.0;
    double adv = 10.0;
    double fm = 100.0;
    double hrf = 30.0;
    double gp = 1e-3;

    /// Throws std::invalid_argument on a negative or non-finite weight.
    void validate() const;
};

/// mean((1 − M) ⊙ |gt − pred|): only known pixels contribute.
double masked_l1(const Tensor& pred, const Tensor& gt, const MaskMap& mask);

enum class MaskResize { Nearest, Maxpool };

MaskResize parse_mask_resize(std::string_view name);
std::string_view to_string(MaskResize mode);

/// Patch labels for a discriminator of stride `factor`. Maxpool marks a
/// patch masked when any of its pixels is; nearest samples one pixel per
/// patch with the usual resize convention.
MaskMap resize_mask_for_patches(const MaskMap& mask, std::size_t factor, MaskResize mode);

inline constexpr double kProbabilityClamp = 1e-7;

struct DiscOutput {
    /// (N, 1, h, w) patch probabilities.
    Tensor prob;
    std::vector<Tensor> features;
};

struct AdversarialLosses {
    double d = 0.0;
    double g = 0.0;
};

/// L_D = −mean log D(real) − mean[(1 − M) log D(fake)] − mean[M log(1 − D(fake))],
/// L_G = −mean log D(fake). Probabilities are clamped to [ε, 1 − ε]; values
/// outside [0, 1] or NaN throw std::domain_error.
AdversarialLosses adversarial_losses(const DiscOutput& real, const DiscOutput& fake, const MaskMap& patch_mask);

/// Scalar-valued discriminator built on the autodiff tape.
using ScalarCritic = std::function<ad::Var(ad::Var)>;

/// mean over the batch of ‖∇_x D(x_n)‖², each sample evaluated on its own.
/// Throws std::invalid_argument when D does not return a single element.
double gradient_penalty(const ScalarCritic& critic, const Tensor& real);

/// Mean absolute difference per layer, averaged over layers.
double feature_match(const std::vector<Tensor>& real, const std::vector<Tensor>& fake);

using FeatureExtractor = std::function<std::vector<Tensor>(const Tensor&)>;

/// Mean squared feature difference per layer, averaged over layers.
double hrf_loss(const FeatureExtractor& extractor, const Tensor& gt, const Tensor& pred);

inline constexpr double kGradientBeta1 = 0.1;
inline constexpr double kGradientBeta2 = 20.0;
inline constexpr std::size_t kGradientBlurSize = 10;
inline constexpr double kGradientBlurSigma = 1.0;

/// 10-tap Gaussian with σ = 1 sampled at offsets −4.5 … 4.5, summing to 1.
std::vector<double> gradient_blur_taps();

/// Separable blur of each plane with gradient_blur_taps and zero padding.
/// Output pixel y weights input rows y − 4 … y + 5.
Tensor gradient_blur(const Tensor& map);

/// β₁·mean|Δ| + β₂·mean[(g ∗ C) ⊙ |Δ|] with Δ = pred_g − gt_g. canny is
/// (N or 1, 1, H, W) and broadcasts over the gradient channels.
double gradient_prior_loss(const Tensor& pred_g, const Tensor& gt_g, const Tensor& canny);

struct LossParts {
    double l1 = 0.0;
    double adv_d = 0.0;
    double adv_g = 0.0;
    double gp = 0.0;
    double fm = 0.0;
    double hrf = 0.0;
};

/// λ_L1·L1 + λ_adv·(L_D + L_G + λ_GP·GP) + λ_fm·FM + λ_hrf·HRF. A NaN part
/// throws std::domain_error naming it.
double total_loss(const LossParts& parts, const LossWeights& w = {});

}  // namespace zits
