#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "zits/tensor.hpp"

// Structural priors: wireframe line rendering, Sobel gradients, and edge
// thinning by non-maximum suppression.

namespace zits {

/// Line segment between two sub-pixel endpoints in image coordinates.
/// Pixel (row y, column x) has its centre at (x, y) and covers
/// [x − ½, x + ½] × [y − ½, y + ½].
struct LineSegment {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    double length() const;
};

/// One segment per line as "x1 y1 x2 y2"; '#' starts a comment. Throws
/// IoError on malformed lines and zero-length segments, naming the line.
std::vector<LineSegment> read_segments(std::istream& is);
std::vector<LineSegment> load_segments(const std::filesystem::path& path);
void write_segments(std::ostream& os, const std::vector<LineSegment>& segments);

/// Maps segments onto an s-times finer pixel grid: x' = s·(x + ½) − ½, so
/// pixel c's area lands on the s×s block starting at s·c. Results are
/// clamped to [0, s·W] × [0, s·H] given the original extents.
std::vector<LineSegment> scale_segments(const std::vector<LineSegment>& segments, double s, std::size_t height,
                                        std::size_t width);

/// Anti-aliased rendering into a (1, 1, H, W) map. Each segment is a
/// one-pixel-wide band with square caps reaching half a pixel past each
/// endpoint; a pixel's value is the exact fraction of its area inside the
/// band, and overlapping segments combine by maximum. Endpoints must lie in
/// [0, W] × [0, H]; violations throw std::invalid_argument naming the
/// segment index.
Tensor rasterize_lines(const std::vector<LineSegment>& segments, std::size_t height, std::size_t width);

/// 3×3 Sobel responses with zero padding. For an (N, C, H, W) input the
/// result is (N, 2C, H, W): channel 2c is the horizontal derivative of input
/// channel c and 2c + 1 the vertical one.
Tensor sobel_gradients(const Tensor& img);

/// Thins an edge-probability map (any (…, H, W) with one plane per N·C).
/// Local orientation comes from the 3×3-summed structure tensor of the
/// map's own Sobel gradients; a pixel keeps its value only if it is at least
/// both bilinear samples one pixel away along the normal (samples outside
/// the image read as 0), otherwise it becomes 0.
Tensor edge_nms(const Tensor& edge);

inline constexpr double kDefaultFuseThreshold = 0.25;

/// raw where raw < threshold; elsewhere 1 if nms ≥ threshold, else 0.
Tensor enms_fuse(const Tensor& raw, const Tensor& nms, double threshold = kDefaultFuseThreshold);

/// F1 of two maps binarised at `threshold` (1 when both are empty).
double binary_f1(const Tensor& pred, const Tensor& target, double threshold = 0.5);

}  // namespace zits
