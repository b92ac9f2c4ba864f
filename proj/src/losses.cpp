#include "zits/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "zits/ops.hpp"

namespace zits {

namespace {

void require_mask_extent(const Shape& s, const MaskMap& mask, const char* what) {
    if (s.rank() != 4 || s.h() != mask.height() || s.w() != mask.width()) {
        throw ShapeError(std::string(what) + ": tensor " + s.str() + " does not match mask " +
                         std::to_string(mask.height()) + "x" + std::to_string(mask.width()));
    }
}

double checked_prob(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("adversarial_losses: probability " + std::to_string(p));
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

}  // namespace

void LossWeights::validate() const {
    for (double v : {l1, adv, fm, hrf, gp}) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("LossWeights: weights must be finite and >= 0");
    }
}

double masked_l1(const Tensor& pred, const Tensor& gt, const MaskMap& mask) {
    require_same_shape(pred, gt, "masked_l1");
    const Shape& s = pred.shape();
    require_mask_extent(s, mask, "masked_l1");
    const std::size_t hw = s.h() * s.w();
    const auto m = mask.values();
    double acc = 0.0;
    for (std::size_t p = 0; p < s.n() * s.c(); ++p) {
        const double* a = pred.data().data() + p * hw;
        const double* b = gt.data().data() + p * hw;
        for (std::size_t i = 0; i < hw; ++i) {
            if (!m[i]) acc += std::abs(b[i] - a[i]);
        }
    }
    return acc / static_cast<double>(pred.numel());
}

MaskResize parse_mask_resize(std::string_view name) {
    if (name == "nearest") return MaskResize::Nearest;
    if (name == "maxpool") return MaskResize::Maxpool;
    throw std::invalid_argument("unknown mask resize mode '" + std::string(name) + "'");
}

std::string_view to_string(MaskResize mode) { return mode == MaskResize::Nearest ? "nearest" : "maxpool"; }

MaskMap resize_mask_for_patches(const MaskMap& mask, std::size_t factor, MaskResize mode) {
    if (factor == 0 || mask.height() % factor != 0 || mask.width() % factor != 0) {
        throw ShapeError("resize_mask_for_patches: " + std::to_string(mask.height()) + "x" +
                         std::to_string(mask.width()) + " not divisible by " + std::to_string(factor));
    }
    const std::size_t h = mask.height() / factor, w = mask.width() / factor;
    MaskMap out(h, w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            bool m = false;
            if (mode == MaskResize::Nearest) {
                m = mask.masked(nearest_source(y, mask.height(), h), nearest_source(x, mask.width(), w));
            } else {
                for (std::size_t dy = 0; dy < factor && !m; ++dy)
                    for (std::size_t dx = 0; dx < factor && !m; ++dx) m = mask.masked(y * factor + dy, x * factor + dx);
            }
            out.set(y, x, m);
        }
    return out;
}

AdversarialLosses adversarial_losses(const DiscOutput& real, const DiscOutput& fake, const MaskMap& patch_mask) {
    const Shape& rs = real.prob.shape();
    const Shape& fs = fake.prob.shape();
    require_mask_extent(rs, patch_mask, "adversarial_losses");
    require_mask_extent(fs, patch_mask, "adversarial_losses");
    if (rs.c() != 1 || fs.c() != 1) throw ShapeError("adversarial_losses: probability maps must have one channel");

    double log_real = 0.0;
    for (double p : real.prob.data()) log_real += std::log(checked_prob(p));

    const std::size_t hw = fs.h() * fs.w();
    const auto m = patch_mask.values();
    double fake_as_real = 0.0, fake_as_fake = 0.0, log_fake = 0.0;
    for (std::size_t i = 0; i < fake.prob.numel(); ++i) {
        const double p = checked_prob(fake.prob[i]);
        log_fake += std::log(p);
        if (m[i % hw]) {
            fake_as_fake += std::log(1.0 - p);
        } else {
            fake_as_real += std::log(p);
        }
    }
    const double nr = static_cast<double>(real.prob.numel()), nf = static_cast<double>(fake.prob.numel());
    return {-log_real / nr - fake_as_real / nf - fake_as_fake / nf, -log_fake / nf};
}

double gradient_penalty(const ScalarCritic& critic, const Tensor& real) {
    const Shape& s = real.shape();
    if (s.rank() != 4 || s.n() == 0) throw ShapeError("gradient_penalty: expected a non-empty NCHW batch");
    const std::size_t per = real.numel() / s.n();
    double acc = 0.0;
    for (std::size_t n = 0; n < s.n(); ++n) {
        Tensor sample = Tensor::nchw(1, s.c(), s.h(), s.w());
        std::copy_n(real.data().begin() + static_cast<std::ptrdiff_t>(n * per), per, sample.data().begin());
        ad::Tape tape;
        const ad::Var x = tape.leaf(std::move(sample));
        const ad::Var d = critic(x);
        if (!d.valid() || d.value().numel() != 1) {
            throw std::invalid_argument("gradient_penalty: critic must return a single element");
        }
        tape.backward(d);
        const Tensor g = tape.grad(x);
        acc += dot(g, g);
    }
    return acc / static_cast<double>(s.n());
}

double feature_match(const std::vector<Tensor>& real, const std::vector<Tensor>& fake) {
    if (real.size() != fake.size()) {
        throw ShapeError("feature_match: " + std::to_string(real.size()) + " vs " + std::to_string(fake.size()) +
                         " layers");
    }
    if (real.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < real.size(); ++k) {
        require_same_shape(real[k], fake[k], "feature_match");
        double layer = 0.0;
        for (std::size_t i = 0; i < real[k].numel(); ++i) layer += std::abs(real[k][i] - fake[k][i]);
        acc += layer / static_cast<double>(real[k].numel());
    }
    return acc / static_cast<double>(real.size());
}

double hrf_loss(const FeatureExtractor& extractor, const Tensor& gt, const Tensor& pred) {
    const std::vector<Tensor> a = extractor(gt), b = extractor(pred);
    if (a.size() != b.size()) throw ShapeError("hrf_loss: extractor returned different layer counts");
    if (a.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        require_same_shape(a[k], b[k], "hrf_loss");
        double layer = 0.0;
        for (std::size_t i = 0; i < a[k].numel(); ++i) layer += (a[k][i] - b[k][i]) * (a[k][i] - b[k][i]);
        acc += layer / static_cast<double>(a[k].numel());
    }
    return acc / static_cast<double>(a.size());
}

std::vector<double> gradient_blur_taps() {
    std::vector<double> taps(kGradientBlurSize);
    double total = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double t = static_cast<double>(i) - 0.5 * static_cast<double>(kGradientBlurSize - 1);
        taps[i] = std::exp(-t * t / (2.0 * kGradientBlurSigma * kGradientBlurSigma));
        total += taps[i];
    }
    for (double& v : taps) v /= total;
    return taps;
}

Tensor gradient_blur(const Tensor& map) {
    const Shape& s = map.shape();
    if (s.rank() != 4) throw ShapeError("gradient_blur: expected NCHW, got " + s.str());
    const std::vector<double> taps = gradient_blur_taps();
    const long lead = static_cast<long>(kGradientBlurSize / 2) - 1;
    const long H = static_cast<long>(s.h()), W = static_cast<long>(s.w());
    Tensor rows(s), out(s);
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c) {
            const double* src = map.plane(n, c);
            double* mid = rows.plane(n, c);
            double* dst = out.plane(n, c);
            for (long y = 0; y < H; ++y)
                for (long x = 0; x < W; ++x) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < taps.size(); ++k) {
                        const long q = x - lead + static_cast<long>(k);
                        if (q >= 0 && q < W) acc += taps[k] * src[y * W + q];
                    }
                    mid[y * W + x] = acc;
                }
            for (long y = 0; y < H; ++y)
                for (long x = 0; x < W; ++x) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < taps.size(); ++k) {
                        const long r = y - lead + static_cast<long>(k);
                        if (r >= 0 && r < H) acc += taps[k] * mid[r * W + x];
                    }
                    dst[y * W + x] = acc;
                }
        }
    return out;
}

double gradient_prior_loss(const Tensor& pred_g, const Tensor& gt_g, const Tensor& canny) {
    require_same_shape(pred_g, gt_g, "gradient_prior_loss");
    const Shape& s = pred_g.shape();
    const Shape& cs = canny.shape();
    if (s.rank() != 4 || cs.rank() != 4 || cs.c() != 1 || cs.h() != s.h() || cs.w() != s.w() ||
        (cs.n() != 1 && cs.n() != s.n())) {
        throw ShapeError("gradient_prior_loss: canny " + cs.str() + " does not broadcast to " + s.str());
    }
    const Tensor weight = gradient_blur(canny);
    const std::size_t hw = s.h() * s.w();
    double plain = 0.0, weighted = 0.0;
    for (std::size_t n = 0; n < s.n(); ++n) {
        const double* w = weight.plane(cs.n() == 1 ? 0 : n, 0);
        for (std::size_t c = 0; c < s.c(); ++c) {
            const double* a = pred_g.plane(n, c);
            const double* b = gt_g.plane(n, c);
            for (std::size_t i = 0; i < hw; ++i) {
                const double d = std::abs(a[i] - b[i]);
                plain += d;
                weighted += w[i] * d;
            }
        }
    }
    const double count = static_cast<double>(pred_g.numel());
    return kGradientBeta1 * plain / count + kGradientBeta2 * weighted / count;
}

double total_loss(const LossParts& parts, const LossWeights& w) {
    const std::pair<const char*, double> named[] = {{"l1", parts.l1}, {"adv_d", parts.adv_d}, {"adv_g", parts.adv_g},
                                                    {"gp", parts.gp}, {"fm", parts.fm},       {"hrf", parts.hrf}};
    for (const auto& [name, v] : named) {
        if (std::isnan(v)) throw std::domain_error(std::string("total_loss: part '") + name + "' is NaN");
    }
    return w.l1 * parts.l1 + w.adv * (parts.adv_d + parts.adv_g + w.gp * parts.gp) + w.fm * parts.fm +
           w.hrf * parts.hrf;
}

}  // namespace zits
