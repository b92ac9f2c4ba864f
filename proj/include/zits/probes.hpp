#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "zits/tensor.hpp"

// Receptive-field and cost probes for convolution blocks.

namespace zits {

struct Box {
    std::size_t y0 = 0, x0 = 0, y1 = 0, x1 = 0;  // inclusive

    std::size_t height() const { return y1 - y0 + 1; }
    std::size_t width() const { return x1 - x0 + 1; }
};

using BlockFn = std::function<Tensor(const Tensor&)>;

/// Feeds a unit impulse at the centre of channel `channel` of a
/// (1, channels, size, size) zero input through `f` and returns the tight
/// bounding box of |output| > 1e-12 over all output channels. Throws
/// std::runtime_error when the response is empty or touches the border, since
/// the probe is then inconclusive.
Box impulse_rf(const BlockFn& f, std::size_t channels, std::size_t size, std::size_t channel = 0);

/// Multiply-adds per output pixel per channel.
struct MacCount {
    std::size_t depthwise = 0;
    std::size_t pointwise = 0;

    std::size_t total() const { return depthwise + pointwise; }
};

/// K² for a direct K×K depthwise conv.
MacCount direct_depthwise_macs(std::size_t kernel);
/// (2d−1)² + ⌈K/d⌉² depthwise, plus C for the 1×1 conv when `channels` > 0.
MacCount lka_macs(std::size_t kernel, std::size_t dilation, std::size_t channels = 0);

struct LkaBenchmark {
    double direct_seconds = 0;      // K×K depthwise
    double decomposed_seconds = 0;  // the LKA attention path
    std::size_t repeats = 0;

    double speedup() const { return direct_seconds / decomposed_seconds; }
};

/// Best-of-`repeats` wall time of a direct K×K depthwise conv against the
/// decomposed attention path on a (1, channels, size, size) random input.
LkaBenchmark bench_lka(std::size_t size, std::size_t channels, std::size_t kernel, std::size_t dilation,
                       std::size_t repeats, std::uint64_t seed = 0);

}  // namespace zits
