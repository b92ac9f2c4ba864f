#include "zits/mpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zits/ops.hpp"

namespace zits {
namespace {

constexpr int kUncovered = -1;

// Multi-source BFS from every known pixel. A pixel p is reached at step k+1
// from a pixel q reached at step k when p + e == q for an offset e of the
// structuring element, which reproduces iterated dilation by that element.
template <std::size_t N>
std::vector<int> first_cover(const MaskMap& mask, const std::array<std::array<int, 2>, N>& element, int limit) {
    const long h = static_cast<long>(mask.height()), w = static_cast<long>(mask.width());
    std::vector<int> step(mask.values().size(), kUncovered);
    std::vector<std::size_t> frontier, next;
    for (std::size_t i = 0; i < step.size(); ++i) {
        if (mask.values()[i] == 0) {
            step[i] = 0;
            frontier.push_back(i);
        }
    }
    for (int k = 1; !frontier.empty() && k <= limit; ++k) {
        next.clear();
        for (std::size_t q : frontier) {
            const long qy = static_cast<long>(q) / w, qx = static_cast<long>(q) % w;
            for (const auto& e : element) {
                const long py = qy - e[0], px = qx - e[1];
                if (py < 0 || py >= h || px < 0 || px >= w) continue;
                const auto p = static_cast<std::size_t>(py * w + px);
                if (step[p] != kUncovered) continue;
                step[p] = k;
                next.push_back(p);
            }
        }
        frontier.swap(next);
    }
    return step;
}

}  // namespace

DistanceMap masking_distance(const MaskMap& mask, int max_distance) {
    if (max_distance < 1) throw std::invalid_argument("masking_distance: max_distance must be positive");
    static constexpr std::array<std::array<int, 2>, 8> kNeighbourhood{
        {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
    DistanceMap out{mask.height(), mask.width(), max_distance, first_cover(mask, kNeighbourhood, max_distance)};
    for (int& v : out.values)
        if (v == kUncovered) v = max_distance;
    return out;
}

std::array<std::array<int, 2>, 3> direction_element(Direction dir) {
    switch (dir) {
        case Direction::Up: return {{{-1, -1}, {-1, 0}, {-1, 1}}};
        case Direction::Down: return {{{1, -1}, {1, 0}, {1, 1}}};
        case Direction::Left: return {{{-1, -1}, {0, -1}, {1, -1}}};
        case Direction::Right: return {{{-1, 1}, {0, 1}, {1, 1}}};
    }
    return {};
}

DirectionMap masking_direction(const MaskMap& mask) {
    DirectionMap out{mask.height(), mask.width(), std::vector<std::uint8_t>(mask.values().size() * kDirections, 0),
                     false};
    if (mask.masked_count() == mask.values().size()) {
        out.no_cover = true;
        return out;
    }
    std::array<std::vector<int>, kDirections> steps;
    for (std::size_t d = 0; d < kDirections; ++d) {
        steps[d] = first_cover(mask, direction_element(static_cast<Direction>(d)), std::numeric_limits<int>::max());
    }
    for (std::size_t i = 0; i < mask.values().size(); ++i) {
        if (mask.values()[i] == 0) continue;
        int best = std::numeric_limits<int>::max();
        for (std::size_t d = 0; d < kDirections; ++d)
            if (steps[d][i] != kUncovered) best = std::min(best, steps[d][i]);
        for (std::size_t d = 0; d < kDirections; ++d)
            out.values[i * kDirections + d] = steps[d][i] == best ? 1 : 0;
    }
    return out;
}

Tensor sinusoidal_encode(const DistanceMap& distance, std::size_t channels) {
    if (channels == 0 || channels % 2 != 0) {
        throw std::invalid_argument("sinusoidal_encode: channel count must be even and positive, got " +
                                    std::to_string(channels));
    }
    Tensor out = Tensor::nchw(1, channels, distance.height, distance.width);
    const std::size_t hw = distance.height * distance.width;
    for (std::size_t i = 0; i < channels / 2; ++i) {
        const double divisor = std::pow(10000.0, static_cast<double>(i) / static_cast<double>(channels));
        double* s = out.plane(0, 2 * i);
        double* c = out.plane(0, 2 * i + 1);
        for (std::size_t p = 0; p < hw; ++p) {
            const double d = std::clamp(distance.values[p], 0, distance.max_distance);
            s[p] = std::sin(d / divisor);
            c[p] = std::cos(d / divisor);
        }
    }
    return out;
}

Tensor direction_embedding(const DirectionMap& directions, const Tensor& table) {
    const Shape& ts = table.shape();
    if (ts.rank() != 2 || ts[0] != kDirections) {
        throw ShapeError("direction_embedding: table must be (4, d), got " + ts.str());
    }
    const std::size_t channels = ts[1];
    Tensor out = Tensor::nchw(1, channels, directions.height, directions.width);
    const std::size_t hw = directions.height * directions.width;
    for (std::size_t ch = 0; ch < channels; ++ch) {
        double* dst = out.plane(0, ch);
        for (std::size_t p = 0; p < hw; ++p) {
            double acc = 0.0;
            for (std::size_t d = 0; d < kDirections; ++d)
                if (directions.values[p * kDirections + d]) acc += table[d * channels + ch];
            dst[p] = acc;
        }
    }
    return out;
}

MaskMap resize_mask_nearest(const MaskMap& mask, std::size_t height, std::size_t width) {
    MaskMap out(height, width);
    for (std::size_t y = 0; y < height; ++y) {
        const std::size_t sy = nearest_source(y, mask.height(), height);
        for (std::size_t x = 0; x < width; ++x) out.set(y, x, mask.masked(sy, nearest_source(x, mask.width(), width)));
    }
    return out;
}

Tensor mpe(const MaskMap& mask, const Tensor& direction_table, std::size_t channels, std::size_t target_h,
           std::size_t target_w, const MpeOptions& options) {
    const Shape& ts = direction_table.shape();
    if (ts.rank() != 2 || ts[0] != kDirections || ts[1] != channels) {
        throw ShapeError("mpe: direction table must be (4, " + std::to_string(channels) + "), got " + ts.str());
    }
    const std::size_t base = options.base_size;
    const MaskMap& m =
        mask.height() == base && mask.width() == base ? mask : resize_mask_nearest(mask, base, base);
    Tensor enc = sinusoidal_encode(masking_distance(m, options.max_distance), channels);
    enc += direction_embedding(masking_direction(m), direction_table);
    if (target_h == base && target_w == base) return enc;
    return resize(enc, target_h, target_w, ResizeMode::Nearest);
}

}  // namespace zits
