#include "zits/probes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "zits/conv.hpp"
#include "zits/lka.hpp"
#include "zits/random.hpp"

namespace zits {

Box impulse_rf(const BlockFn& f, std::size_t channels, std::size_t size, std::size_t channel) {
    if (channel >= channels) throw std::invalid_argument("impulse_rf: channel out of range");
    Tensor x = Tensor::nchw(1, channels, size, size);
    x.at(0, channel, size / 2, size / 2) = 1.0;
    const Tensor y = f(x);
    const Shape& s = y.shape();
    Box box{s.h(), s.w(), 0, 0};
    bool any = false;
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c)
            for (std::size_t r = 0; r < s.h(); ++r)
                for (std::size_t q = 0; q < s.w(); ++q) {
                    if (std::abs(y.at(n, c, r, q)) <= 1e-12) continue;
                    any = true;
                    box.y0 = std::min(box.y0, r);
                    box.x0 = std::min(box.x0, q);
                    box.y1 = std::max(box.y1, r);
                    box.x1 = std::max(box.x1, q);
                }
    if (!any) throw std::runtime_error("impulse_rf: empty response");
    if (box.y0 == 0 || box.x0 == 0 || box.y1 + 1 == s.h() || box.x1 + 1 == s.w()) {
        throw std::runtime_error("impulse_rf: response reaches the border of the " + std::to_string(size) + "x" +
                                 std::to_string(size) + " probe; use a larger size");
    }
    return box;
}

MacCount direct_depthwise_macs(std::size_t kernel) { return {kernel * kernel, 0}; }

MacCount lka_macs(std::size_t kernel, std::size_t dilation, std::size_t channels) {
    const std::size_t k1 = 2 * dilation - 1, k2 = lka_dilated_kernel(kernel, dilation);
    return {k1 * k1 + k2 * k2, channels};
}

LkaBenchmark bench_lka(std::size_t size, std::size_t channels, std::size_t kernel, std::size_t dilation,
                       std::size_t repeats, std::uint64_t seed) {
    if (repeats == 0) throw std::invalid_argument("bench_lka: repeats must be positive");
    Rng rng(seed);
    const Tensor x = random_uniform(Shape{1, channels, size, size}, rng);
    const LkaParams p = make_lka(rng, channels, kernel, dilation);
    const Tensor direct_w = random_normal(Shape{channels, 1, kernel, kernel}, rng, 1.0 / static_cast<double>(kernel));
    const ConvSpec direct_spec{.pad = static_cast<int>(kernel / 2), .groups = static_cast<int>(channels)};

    const auto time = [&](auto&& fn) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const Tensor y = fn();
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (y.empty()) throw std::logic_error("bench_lka: empty output");
            best = std::min(best, dt);
        }
        return best;
    };
    LkaBenchmark b;
    b.repeats = repeats;
    b.direct_seconds = time([&] { return depthwise_conv2d(x, direct_w, {}, direct_spec); });
    b.decomposed_seconds = time([&] { return lka_attention(x, p); });
    return b;
}

}  // namespace zits
