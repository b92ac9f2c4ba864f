#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "zits/mask.hpp"
#include "zits/tensor.hpp"

// Masking positional encoding: for each hole pixel, how far it sits from
// the nearest known pixel (sinusoidally encoded) and in which direction
// that pixel lies (a learned embedding of a 4-way multi-hot code).

namespace zits {

inline constexpr int kDefaultMaxDistance = 128;
inline constexpr std::size_t kDefaultEncodingChannels = 64;
inline constexpr std::size_t kMpeBaseSize = 256;

struct DistanceMap {
    std::size_t height = 0;
    std::size_t width = 0;
    int max_distance = kDefaultMaxDistance;
    std::vector<int> values;

    int at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

/// First step at which iterated 3×3 dilation of the known region covers
/// each pixel, i.e. the Chebyshev distance to the nearest known pixel,
/// clipped at `max_distance`. Known pixels are 0; a mask with no known
/// pixel yields `max_distance` everywhere.
DistanceMap masking_distance(const MaskMap& mask, int max_distance = kDefaultMaxDistance);

enum class Direction : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr std::size_t kDirections = 4;

/// Offsets (dy, dx) of the three-cell structuring element for `dir`: the
/// row or column of the 3×3 neighbourhood lying on that side.
std::array<std::array<int, 2>, 3> direction_element(Direction dir);

struct DirectionMap {
    std::size_t height = 0;
    std::size_t width = 0;
    /// Multi-hot codes, kDirections per pixel in (up, down, left, right) order.
    std::vector<std::uint8_t> values;
    /// Set when the mask had no known pixel, so nothing was ever covered.
    bool no_cover = false;

    bool at(std::size_t y, std::size_t x, Direction d) const {
        return values[(y * width + x) * kDirections + static_cast<std::size_t>(d)] != 0;
    }
};

/// For each hole pixel, the directions whose structuring element reaches a
/// known pixel in the fewest dilation steps (ties set several channels).
DirectionMap masking_direction(const MaskMap& mask);

/// (1, channels, H, W): channel 2i holds sin(clip(D)/10000^(i/channels)),
/// channel 2i+1 the matching cosine.
Tensor sinusoidal_encode(const DistanceMap& distance, std::size_t channels);

/// (1, channels, H, W) projection of the direction codes through a
/// (4, channels) embedding table.
Tensor direction_embedding(const DirectionMap& directions, const Tensor& table);

struct MpeOptions {
    int max_distance = kDefaultMaxDistance;
    /// Resolution at which the encoding is computed before resizing.
    std::size_t base_size = kMpeBaseSize;
};

/// Sum of distance and direction encodings computed at base_size (the mask
/// is nearest-resized there first when needed), then nearest-resized to
/// (target_h, target_w). Output is (1, channels, target_h, target_w).
Tensor mpe(const MaskMap& mask, const Tensor& direction_table, std::size_t channels, std::size_t target_h,
           std::size_t target_w, const MpeOptions& options = {});

/// Nearest-neighbour resize of a mask.
MaskMap resize_mask_nearest(const MaskMap& mask, std::size_t height, std::size_t width);

}  // namespace zits
