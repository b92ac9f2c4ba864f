#include "zits/priors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "zits/conv.hpp"
#include "zits/io.hpp"

namespace zits {

double LineSegment::length() const { return std::hypot(x2 - x1, y2 - y1); }

std::vector<LineSegment> read_segments(std::istream& is) {
    std::vector<LineSegment> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        LineSegment s;
        if (!(fields >> s.x1)) continue;  // blank or comment-only line
        std::string extra;
        if (!(fields >> s.y1 >> s.x2 >> s.y2) || (fields >> extra)) {
            throw IoError("segments line " + std::to_string(lineno) + ": expected four numbers \"x1 y1 x2 y2\"");
        }
        if (!std::isfinite(s.x1) || !std::isfinite(s.y1) || !std::isfinite(s.x2) || !std::isfinite(s.y2)) {
            throw IoError("segments line " + std::to_string(lineno) + ": non-finite coordinate");
        }
        if (s.length() == 0.0) throw IoError("segments line " + std::to_string(lineno) + ": zero-length segment");
        out.push_back(s);
    }
    return out;
}

std::vector<LineSegment> load_segments(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_segments(is);
}

void write_segments(std::ostream& os, const std::vector<LineSegment>& segments) {
    os << std::setprecision(17);
    for (const LineSegment& s : segments) os << s.x1 << ' ' << s.y1 << ' ' << s.x2 << ' ' << s.y2 << '\n';
}

std::vector<LineSegment> scale_segments(const std::vector<LineSegment>& segments, double s, std::size_t height,
                                        std::size_t width) {
    if (!(s > 0.0)) throw std::invalid_argument("scale_segments: scale must be positive");
    const double hi_x = s * static_cast<double>(width), hi_y = s * static_cast<double>(height);
    const auto map = [s](double v, double hi) { return std::clamp(s * (v + 0.5) - 0.5, 0.0, hi); };
    std::vector<LineSegment> out = segments;
    for (LineSegment& seg : out) {
        seg.x1 = map(seg.x1, hi_x);
        seg.y1 = map(seg.y1, hi_y);
        seg.x2 = map(seg.x2, hi_x);
        seg.y2 = map(seg.y2, hi_y);
    }
    return out;
}

namespace {

struct Pt {
    double x, y;
};

// Sutherland–Hodgman clip of a convex polygon against one axis-aligned
// half-plane: keep points with sign·(coord − bound) ≤ 0.
std::vector<Pt> clip(const std::vector<Pt>& poly, bool along_x, double bound, double sign) {
    std::vector<Pt> out;
    const auto inside = [&](const Pt& p) { return sign * ((along_x ? p.x : p.y) - bound) <= 0.0; };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Pt& a = poly[i];
        const Pt& b = poly[(i + 1) % poly.size()];
        const bool ia = inside(a), ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double ca = along_x ? a.x : a.y, cb = along_x ? b.x : b.y;
            const double t = (bound - ca) / (cb - ca);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

double polygon_area(const std::vector<Pt>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Pt& a = poly[i];
        const Pt& b = poly[(i + 1) % poly.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) * 0.5;
}

double pixel_coverage(const std::vector<Pt>& band, double cx, double cy) {
    std::vector<Pt> p = clip(band, true, cx + 0.5, 1.0);
    if (p.size() >= 3) p = clip(p, true, cx - 0.5, -1.0);
    if (p.size() >= 3) p = clip(p, false, cy + 0.5, 1.0);
    if (p.size() >= 3) p = clip(p, false, cy - 0.5, -1.0);
    return p.size() >= 3 ? polygon_area(p) : 0.0;
}

}  // namespace

Tensor rasterize_lines(const std::vector<LineSegment>& segments, std::size_t height, std::size_t width) {
    Tensor out = Tensor::nchw(1, 1, height, width);
    const double H = static_cast<double>(height), W = static_cast<double>(width);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const LineSegment& s = segments[i];
        const auto in_range = [&](double x, double y) { return x >= 0.0 && x <= W && y >= 0.0 && y <= H; };
        if (!in_range(s.x1, s.y1) || !in_range(s.x2, s.y2)) {
            throw std::invalid_argument("rasterize_lines: segment " + std::to_string(i) + " has an endpoint outside [0, " +
                                        std::to_string(width) + "] x [0, " + std::to_string(height) + "]");
        }
        const double len = s.length();
        if (len == 0.0) throw std::invalid_argument("rasterize_lines: segment " + std::to_string(i) + " has zero length");
        const double ux = (s.x2 - s.x1) / len * 0.5, uy = (s.y2 - s.y1) / len * 0.5;
        const double nx = -uy, ny = ux;
        const std::vector<Pt> band{{s.x1 - ux - nx, s.y1 - uy - ny},
                                   {s.x2 + ux - nx, s.y2 + uy - ny},
                                   {s.x2 + ux + nx, s.y2 + uy + ny},
                                   {s.x1 - ux + nx, s.y1 - uy + ny}};
        double lox = band[0].x, hix = band[0].x, loy = band[0].y, hiy = band[0].y;
        for (const Pt& p : band) {
            lox = std::min(lox, p.x), hix = std::max(hix, p.x);
            loy = std::min(loy, p.y), hiy = std::max(hiy, p.y);
        }
        const long x0 = std::max(0L, static_cast<long>(std::floor(lox + 0.5)));
        const long x1 = std::min(static_cast<long>(width) - 1, static_cast<long>(std::ceil(hix - 0.5)));
        const long y0 = std::max(0L, static_cast<long>(std::floor(loy + 0.5)));
        const long y1 = std::min(static_cast<long>(height) - 1, static_cast<long>(std::ceil(hiy - 0.5)));
        for (long y = y0; y <= y1; ++y)
            for (long x = x0; x <= x1; ++x) {
                const double c = std::min(1.0, pixel_coverage(band, static_cast<double>(x), static_cast<double>(y)));
                double& dst = out.at(0, 0, y, x);
                dst = std::max(dst, c);
            }
    }
    return out;
}

Tensor sobel_gradients(const Tensor& img) {
    const std::size_t C = img.shape().c();
    static constexpr std::array<double, 9> kx{-1, 0, 1, -2, 0, 2, -1, 0, 1};
    static constexpr std::array<double, 9> ky{-1, -2, -1, 0, 0, 0, 1, 2, 1};
    Tensor w = Tensor::nchw(2 * C, 1, 3, 3);
    for (std::size_t c = 0; c < C; ++c) {
        std::copy(kx.begin(), kx.end(), w.plane(2 * c, 0));
        std::copy(ky.begin(), ky.end(), w.plane(2 * c + 1, 0));
    }
    const Shape& s = img.shape();
    const Tensor x = img.reshaped(Shape{s.n(), C, s.h(), s.w()});
    return conv2d(x, w, ConvSpec{.pad = 1, .groups = static_cast<int>(C)});
}

namespace {

double sample_zero_outside(const double* plane, long h, long w, double fx, double fy) {
    const double x0 = std::floor(fx), y0 = std::floor(fy);
    const double ax = fx - x0, ay = fy - y0;
    const long ix = static_cast<long>(x0), iy = static_cast<long>(y0);
    const auto at = [&](long y, long x) { return y < 0 || y >= h || x < 0 || x >= w ? 0.0 : plane[y * w + x]; };
    return (1 - ay) * ((1 - ax) * at(iy, ix) + ax * at(iy, ix + 1)) + ay * ((1 - ax) * at(iy + 1, ix) + ax * at(iy + 1, ix + 1));
}

// 3×3 box sum with zero padding.
std::vector<double> box3(const std::vector<double>& v, long h, long w) {
    std::vector<double> out(v.size(), 0.0);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (long dy = -1; dy <= 1; ++dy)
                for (long dx = -1; dx <= 1; ++dx) {
                    const long yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < h && xx >= 0 && xx < w) acc += v[yy * w + xx];
                }
            out[y * w + x] = acc;
        }
    return out;
}

}  // namespace

Tensor edge_nms(const Tensor& edge) {
    const Shape& s = edge.shape();
    const long h = static_cast<long>(s.h()), w = static_cast<long>(s.w());
    const std::size_t planes = s.n() * s.c(), hw = s.h() * s.w();
    const Tensor flat = edge.reshaped(Shape{planes, 1, s.h(), s.w()});
    const Tensor grad = sobel_gradients(flat);
    Tensor out(s);
    std::vector<double> xx(hw), xy(hw), yy(hw);
    for (std::size_t p = 0; p < planes; ++p) {
        const double* v = flat.plane(p, 0);
        const double* gx = grad.plane(p, 0);
        const double* gy = grad.plane(p, 1);
        for (std::size_t i = 0; i < hw; ++i) {
            xx[i] = gx[i] * gx[i];
            xy[i] = gx[i] * gy[i];
            yy[i] = gy[i] * gy[i];
        }
        const std::vector<double> jxx = box3(xx, h, w), jxy = box3(xy, h, w), jyy = box3(yy, h, w);
        double* dst = out.data().data() + p * hw;
        for (long y = 0; y < h; ++y)
            for (long x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y * w + x);
                if (v[i] <= 0.0) continue;
                double nx = 1.0, ny = 0.0;
                if (jxx[i] + jyy[i] > 1e-24) {
                    const double theta = 0.5 * std::atan2(2.0 * jxy[i], jxx[i] - jyy[i]);
                    nx = std::cos(theta);
                    ny = std::sin(theta);
                }
                const double fx = static_cast<double>(x), fy = static_cast<double>(y);
                const double a = sample_zero_outside(v, h, w, fx + nx, fy + ny);
                const double b = sample_zero_outside(v, h, w, fx - nx, fy - ny);
                if (v[i] >= a && v[i] >= b) dst[i] = v[i];
            }
    }
    return out;
}

Tensor enms_fuse(const Tensor& raw, const Tensor& nms, double threshold) {
    require_same_shape(raw, nms, "enms_fuse");
    Tensor out(raw.shape());
    for (std::size_t i = 0; i < raw.numel(); ++i) {
        out[i] = raw[i] < threshold ? raw[i] : (nms[i] >= threshold ? 1.0 : 0.0);
    }
    return out;
}

double binary_f1(const Tensor& pred, const Tensor& target, double threshold) {
    require_same_shape(pred, target, "binary_f1");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const bool p = pred[i] >= threshold, t = target[i] >= threshold;
        tp += p && t;
        fp += p && !t;
        fn += !p && t;
    }
    if (tp + fp + fn == 0) return 1.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace zits
