#include "zits/ssu.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "zits/autodiff.hpp"
#include "zits/conv.hpp"
#include "zits/ops.hpp"

namespace zits {
namespace {

constexpr ConvSpec kUpSpec{.stride = 2, .pad = 1};
constexpr ConvSpec kConvSpec{.pad = 1};

const char* const kNames[] = {"up_w", "up_b", "c1_w", "c1_b", "c2_w", "c2_b", "head_w", "head_b"};

std::array<Tensor*, 8> fields(SsuWeights& w) {
    return {&w.up_w, &w.up_b, &w.c1_w, &w.c1_b, &w.c2_w, &w.c2_b, &w.head_w, &w.head_b};
}

// Stacks the selected pairs into (B, 1, ·, ·) input and target batches,
// optionally cutting a random window out of each pair.
std::pair<Tensor, Tensor> make_batch(const std::vector<SsuPair>& corpus, std::span<const std::size_t> idx,
                                     std::size_t crop, Rng& rng) {
    const Shape& s = corpus[idx[0]].input.shape();
    const std::size_t ih = crop ? std::min(crop, s.h()) : s.h();
    const std::size_t iw = crop ? std::min(crop, s.w()) : s.w();
    Tensor in = Tensor::nchw(idx.size(), 1, ih, iw), out = Tensor::nchw(idx.size(), 1, 2 * ih, 2 * iw);
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const SsuPair& p = corpus[idx[b]];
        if (!(p.input.shape() == s) || !(p.target.shape() == Shape{1, 1, 2 * s.h(), 2 * s.w()})) {
            throw ShapeError("ssu corpus: pair " + std::to_string(idx[b]) + " has inconsistent shapes");
        }
        std::size_t y0 = 0, x0 = 0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            y0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(s.h() - ih)));
            x0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(s.w() - iw)));
            double ink = 0.0;
            for (std::size_t y = 0; y < ih; ++y)
                for (std::size_t x = 0; x < iw; ++x) ink += p.input.at(0, 0, y0 + y, x0 + x);
            if (ink > 0.0) break;
        }
        for (std::size_t y = 0; y < ih; ++y)
            for (std::size_t x = 0; x < iw; ++x) in.at(b, 0, y, x) = p.input.at(0, 0, y0 + y, x0 + x);
        for (std::size_t y = 0; y < 2 * ih; ++y)
            for (std::size_t x = 0; x < 2 * iw; ++x) out.at(b, 0, y, x) = p.target.at(0, 0, 2 * y0 + y, 2 * x0 + x);
    }
    return {std::move(in), std::move(out)};
}

}  // namespace

ParamList SsuWeights::to_params() const {
    SsuWeights copy = *this;
    ParamList out;
    auto f = fields(copy);
    for (std::size_t i = 0; i < f.size(); ++i) out.push_back({kNames[i], *f[i]});
    return out;
}

SsuWeights SsuWeights::from_params(const ParamList& params) {
    SsuWeights w;
    auto f = fields(w);
    for (std::size_t i = 0; i < f.size(); ++i) *f[i] = find_param(params, kNames[i]);
    const std::size_t width = w.up_b.numel();
    const bool ok = w.up_w.shape() == Shape{1, width, 4, 4} && w.c1_w.shape() == Shape{width, width, 3, 3} &&
                    w.c1_b.numel() == width && w.c2_w.shape() == Shape{width, width, 3, 3} && w.c2_b.numel() == width &&
                    w.head_w.shape() == Shape{1, width, 3, 3} && w.head_b.numel() == 1;
    if (!ok) throw IoError("ssu: inconsistent parameter shapes");
    return w;
}

SsuWeights ssu_init(std::size_t width, std::uint64_t seed) {
    if (width == 0) throw std::invalid_argument("ssu: width must be positive");
    Rng rng(seed);
    const auto he = [&](Shape s, double fan_in) { return random_normal(s, rng, std::sqrt(2.0 / fan_in)); };
    SsuWeights w;
    // Stride-2 4×4 transposed conv: each output pixel sees 2×2 taps of one channel.
    w.up_w = he(Shape{1, width, 4, 4}, 4.0);
    w.up_b = Tensor(Shape{width});
    w.c1_w = he(Shape{width, width, 3, 3}, 9.0 * width);
    w.c1_b = Tensor(Shape{width});
    w.c2_w = he(Shape{width, width, 3, 3}, 9.0 * width);
    w.c2_b = Tensor(Shape{width});
    w.head_w = he(Shape{1, width, 3, 3}, 9.0 * width);
    w.head_b = Tensor(Shape{1}, -(kSsuBeta + 3.0));
    return w;
}

Tensor ssu_raw(const Tensor& x, const SsuWeights& w) {
    if (x.shape().c() != 1) throw ShapeError("ssu: expected one input channel, got " + x.shape().str());
    Tensor h = activate(transposed_conv2d(x, w.up_w, w.up_b.data(), kUpSpec), Activation::Relu);
    h = activate(conv2d(h, w.c1_w, w.c1_b.data(), kConvSpec), Activation::Relu);
    h = activate(conv2d(h, w.c2_w, w.c2_b.data(), kConvSpec), Activation::Relu);
    return conv2d(h, w.head_w, w.head_b.data(), kConvSpec);
}

Tensor ssu_forward(const Tensor& x, const SsuWeights& w, double gamma, double beta) {
    Tensor out = ssu_raw(x, w);
    for (double& v : out.data()) v = sigmoid(gamma * (v + beta));
    return out;
}

Tensor ssu_upsample(const Tensor& prior, const SsuWeights& w, std::size_t target_h, std::size_t target_w, double gamma,
                    double beta) {
    const Shape& s = prior.shape();
    if (target_h < s.h() || target_w < s.w()) {
        throw std::invalid_argument("ssu_upsample: target " + std::to_string(target_h) + "x" + std::to_string(target_w) +
                                    " is smaller than the input " + std::to_string(s.h()) + "x" + std::to_string(s.w()));
    }
    const double ratio = std::max(static_cast<double>(target_h) / static_cast<double>(s.h()),
                                  static_cast<double>(target_w) / static_cast<double>(s.w()));
    const int doublings = static_cast<int>(std::ceil(std::log2(ratio) - 1e-12));
    Tensor x = prior.reshaped(Shape{s.n() * s.c(), 1, s.h(), s.w()});
    for (int i = 0; i < doublings; ++i) x = ssu_forward(x, w, gamma, beta);
    if (x.shape().h() != target_h || x.shape().w() != target_w) x = resize(x, target_h, target_w, ResizeMode::Bilinear);
    return x.reshaped(Shape{s.n(), s.c(), target_h, target_w});
}

std::vector<LineSegment> random_segments(Rng& rng, std::size_t size, double min_length) {
    const double S = static_cast<double>(size);
    if (min_length > S) throw std::invalid_argument("random_segments: min_length exceeds the image size");
    const int count = rng.uniform_int(2, 8);
    std::vector<LineSegment> out;
    while (static_cast<int>(out.size()) < count) {
        const double x1 = rng.uniform(0.0, S), y1 = rng.uniform(0.0, S);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double len = rng.uniform(min_length, S);
        const double x2 = x1 + len * std::cos(angle), y2 = y1 + len * std::sin(angle);
        if (x2 < 0.0 || x2 > S || y2 < 0.0 || y2 > S) continue;
        out.push_back({x1, y1, x2, y2});
    }
    return out;
}

std::vector<SsuPair> make_ssu_corpus(std::size_t count, std::size_t size, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SsuPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::vector<LineSegment> segs = random_segments(rng, size);
        out.push_back({rasterize_lines(segs, size, size), rasterize_lines(scale_segments(segs, 2.0, size, size), 2 * size, 2 * size)});
    }
    return out;
}

SsuTrainReport ssu_train(SsuWeights& weights, const std::vector<SsuPair>& corpus, const SsuTrainConfig& config,
                         const std::function<void(std::size_t, double)>& progress, const SsuScore& score) {
    if (corpus.empty()) throw std::invalid_argument("ssu_train: empty corpus");
    if (config.batch == 0) throw std::invalid_argument("ssu_train: batch must be positive");
    Rng rng(config.seed);
    auto params = fields(weights);
    std::vector<Tensor> velocity;
    for (Tensor* p : params) velocity.emplace_back(p->shape());
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t batches_per_epoch = (corpus.size() + config.batch - 1) / config.batch;
    const double total_steps = static_cast<double>(batches_per_epoch * config.epochs);
    std::size_t step_index = 0;

    SsuTrainReport report;
    SsuWeights best = weights;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch) {
            const std::size_t end = std::min(order.size(), start + config.batch);
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            const double gamma = rng.uniform(config.gamma_lo, config.gamma_hi);
            const double beta = rng.uniform(config.gamma_lo, config.gamma_hi);

            auto [input, target] = make_batch(corpus, idx, config.crop, rng);

            ad::Tape tape;
            std::array<ad::Var, 8> v;
            for (std::size_t i = 0; i < params.size(); ++i) v[i] = tape.leaf(*params[i]);
            ad::Var h = tape.constant(std::move(input));
            h = ad::activation(ad::transposed_conv2d(h, v[0], v[1], kUpSpec), Activation::Relu);
            h = ad::activation(ad::conv2d(h, v[2], v[3], kConvSpec), Activation::Relu);
            h = ad::activation(ad::conv2d(h, v[4], v[5], kConvSpec), Activation::Relu);
            h = ad::conv2d(h, v[6], v[7], kConvSpec);
            const ad::Var prob = ad::activation(ad::affine(h, gamma, gamma * beta), Activation::Sigmoid);
            const ad::Var loss = ad::binary_cross_entropy(prob, target);
            const double lv = loss.value()[0];
            if (!std::isfinite(lv)) {
                throw std::runtime_error("ssu_train: loss became " + std::to_string(lv) + " at epoch " +
                                         std::to_string(epoch) + ", batch " + std::to_string(batches) +
                                         "; lower the step size");
            }
            tape.backward(loss);
            const double lr =
                config.linear_decay ? config.step * (1.0 - static_cast<double>(step_index) / total_steps) : config.step;
            ++step_index;
            for (std::size_t i = 0; i < params.size(); ++i) {
                Tensor& vel = velocity[i];
                vel *= config.momentum;
                vel -= lr * tape.grad(v[i]);
                *params[i] += vel;
            }
            loss_sum += lv;
            ++batches;
        }
        report.epoch_losses.push_back(loss_sum / static_cast<double>(batches));
        if (progress) progress(epoch, report.epoch_losses.back());
        if (score) {
            report.epoch_scores.push_back(score(weights));
            if (report.epoch_scores.back() >= report.epoch_scores[report.best_epoch]) {
                report.best_epoch = epoch;
                best = weights;
            }
        }
    }
    if (score) weights = std::move(best);
    return report;
}

SsuEvaluation ssu_evaluate(const SsuWeights& w, std::size_t count, std::size_t size, std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("ssu_evaluate: count must be positive");
    Rng rng(seed);
    SsuEvaluation e;
    for (std::size_t i = 0; i < count; ++i) {
        const std::vector<LineSegment> segs = random_segments(rng, size);
        const Tensor base = rasterize_lines(segs, size, size);
        e.f1_2x += binary_f1(ssu_forward(base, w), rasterize_lines(scale_segments(segs, 2.0, size, size), 2 * size, 2 * size));
        e.f1_4x += binary_f1(ssu_upsample(base, w, 4 * size, 4 * size),
                             rasterize_lines(scale_segments(segs, 4.0, size, size), 4 * size, 4 * size));
    }
    e.f1_2x /= static_cast<double>(count);
    e.f1_4x /= static_cast<double>(count);
    return e;
}

}  // namespace zits
