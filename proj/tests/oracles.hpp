#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. Each one is written directly from the defining formula
// and shares no code with the library routine it checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <vector>

#include "zits/conv.hpp"
#include "zits/mask.hpp"
#include "zits/priors.hpp"
#include "zits/random.hpp"
#include "zits/tensor.hpp"

namespace zits::oracle {

inline Tensor conv2d_loops(const Tensor& x, const Tensor& w, const std::vector<double>& bias, const ConvSpec& s) {
    const long N = x.shape().n(), Cin = x.shape().c(), H = x.shape().h(), W = x.shape().w();
    const long Cout = w.shape().n(), cpg = w.shape().c(), kh = w.shape().h(), kw = w.shape().w();
    const long opg = Cout / s.groups;
    const long Ho = (H + 2 * s.pad - s.dilation * (kh - 1) - 1) / s.stride + 1;
    const long Wo = (W + 2 * s.pad - s.dilation * (kw - 1) - 1) / s.stride + 1;
    (void)Cin;
    Tensor out = Tensor::nchw(N, Cout, Ho, Wo);
    for (long n = 0; n < N; ++n)
        for (long co = 0; co < Cout; ++co)
            for (long oy = 0; oy < Ho; ++oy)
                for (long ox = 0; ox < Wo; ++ox) {
                    double acc = bias.empty() ? 0.0 : bias[co];
                    const long g = co / opg;
                    for (long ci = 0; ci < cpg; ++ci)
                        for (long ky = 0; ky < kh; ++ky)
                            for (long kx = 0; kx < kw; ++kx) {
                                const long iy = oy * s.stride - s.pad + ky * s.dilation;
                                const long ix = ox * s.stride - s.pad + kx * s.dilation;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                acc += x.at(n, g * cpg + ci, iy, ix) * w.at(co, ci, ky, kx);
                            }
                    out.at(n, co, oy, ox) = acc;
                }
    return out;
}

/// Full complex 2-D DFT of plane (n, c), returned row-major (H × W).
inline std::vector<std::complex<double>> dft2_naive(const Tensor& x, std::size_t n, std::size_t c) {
    const std::size_t H = x.shape().h(), W = x.shape().w();
    std::vector<std::complex<double>> out(H * W);
    for (std::size_t u = 0; u < H; ++u)
        for (std::size_t v = 0; v < W; ++v) {
            std::complex<double> acc = 0.0;
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx) {
                    const double ang = -2.0 * std::numbers::pi *
                                       (static_cast<double>(u * y) / static_cast<double>(H) +
                                        static_cast<double>(v * xx) / static_cast<double>(W));
                    acc += x.at(n, c, y, xx) * std::polar(1.0, ang);
                }
            out[u * W + v] = acc;
        }
    return out;
}

/// Chebyshev distance from each pixel to the nearest known pixel by
/// exhaustive search over all pairs, clipped at `clip`.
inline std::vector<int> chebyshev_distance(const MaskMap& m, int clip) {
    const long H = m.height(), W = m.width();
    std::vector<int> out(H * W, clip);
    for (long py = 0; py < H; ++py)
        for (long px = 0; px < W; ++px) {
            long best = std::numeric_limits<long>::max();
            for (long qy = 0; qy < H; ++qy)
                for (long qx = 0; qx < W; ++qx)
                    if (!m.masked(qy, qx)) best = std::min(best, std::max(std::labs(qy - py), std::labs(qx - px)));
            if (best != std::numeric_limits<long>::max()) out[py * W + px] = static_cast<int>(std::min<long>(best, clip));
        }
    return out;
}

/// First-cover step of direction `dir` (0 up, 1 down, 2 left, 3 right) at
/// every pixel: the distance along the direction's axis to the nearest known
/// pixel inside the 90° cone opening that way. -1 when the cone is empty.
inline std::vector<int> direction_cone_steps(const MaskMap& m, int dir) {
    const long H = m.height(), W = m.width();
    std::vector<int> out(H * W, -1);
    for (long py = 0; py < H; ++py)
        for (long px = 0; px < W; ++px) {
            long best = -1;
            for (long qy = 0; qy < H; ++qy)
                for (long qx = 0; qx < W; ++qx) {
                    if (m.masked(qy, qx)) continue;
                    const long dy = qy - py, dx = qx - px;
                    long along = 0, across = 0;
                    switch (dir) {
                        case 0: along = -dy, across = dx; break;
                        case 1: along = dy, across = dx; break;
                        case 2: along = -dx, across = dy; break;
                        default: along = dx, across = dy; break;
                    }
                    if (along < 0 || std::labs(across) > along) continue;
                    if (best < 0 || along < best) best = along;
                }
            out[py * W + px] = static_cast<int>(best);
        }
    return out;
}

inline MaskMap random_mask(std::size_t h, std::size_t w, double p_masked, Rng& rng) {
    MaskMap m(h, w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) m.set(y, x, rng.bernoulli(p_masked));
    return m;
}

/// Random mask made of a few filled rectangles, closer to real hole shapes
/// than independent noise and producing larger distances.
inline MaskMap random_box_mask(std::size_t h, std::size_t w, Rng& rng) {
    MaskMap m(h, w);
    const int boxes = rng.uniform_int(1, 4);
    for (int b = 0; b < boxes; ++b) {
        const int y0 = rng.uniform_int(0, static_cast<int>(h) - 1), x0 = rng.uniform_int(0, static_cast<int>(w) - 1);
        const int y1 = rng.uniform_int(y0, static_cast<int>(h) - 1), x1 = rng.uniform_int(x0, static_cast<int>(w) - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) m.set(y, x, true);
    }
    return m;
}

/// Line coverage by point sampling: `n`×`n` sample points per pixel, each
/// tested against the segment's capped unit-width band in its own frame.
inline Tensor rasterize_supersampled(const std::vector<LineSegment>& segs, std::size_t h, std::size_t w, int n = 16) {
    Tensor out = Tensor::nchw(1, 1, h, w);
    for (const LineSegment& s : segs) {
        const double dx = s.x2 - s.x1, dy = s.y2 - s.y1, len = std::hypot(dx, dy);
        const double mx = 0.5 * (s.x1 + s.x2), my = 0.5 * (s.y1 + s.y2);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                int hits = 0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double px = static_cast<double>(x) - 0.5 + (j + 0.5) / n - mx;
                        const double py = static_cast<double>(y) - 0.5 + (i + 0.5) / n - my;
                        const double along = (px * dx + py * dy) / len, across = (py * dx - px * dy) / len;
                        hits += std::abs(along) <= 0.5 * len + 0.5 && std::abs(across) <= 0.5;
                    }
                double& dst = out.at(0, 0, y, x);
                dst = std::max(dst, static_cast<double>(hits) / (n * n));
            }
    }
    return out;
}

/// Inverse of a full H×W complex spectrum by the direct sum; real part, 1/(HW).
inline std::vector<double> idft2_naive_real(const std::vector<std::complex<double>>& spec, std::size_t H, std::size_t W) {
    std::vector<double> out(H * W);
    for (std::size_t y = 0; y < H; ++y)
        for (std::size_t xx = 0; xx < W; ++xx) {
            std::complex<double> acc = 0.0;
            for (std::size_t u = 0; u < H; ++u)
                for (std::size_t v = 0; v < W; ++v) {
                    const double ang = 2.0 * std::numbers::pi *
                                       (static_cast<double>(u * y) / static_cast<double>(H) +
                                        static_cast<double>(v * xx) / static_cast<double>(W));
                    acc += spec[u * W + v] * std::polar(1.0, ang);
                }
            out[y * W + xx] = acc.real() / static_cast<double>(H * W);
        }
    return out;
}

/// Complex 1×1 weights applied to a real-input half spectrum: columns
/// v ≤ W/2 are multiplied by w, the remaining columns are the Hermitian
/// mirror of those products, and the output is the real part of the inverse.
/// wr, wi are (Cout, Cin).
inline Tensor fourier_unit_naive(const Tensor& x, const Tensor& wr, const Tensor& wi) {
    const std::size_t N = x.shape().n(), Cin = x.shape().c(), H = x.shape().h(), W = x.shape().w();
    const std::size_t Cout = wr.shape().h();
    Tensor out = Tensor::nchw(N, Cout, H, W);
    for (std::size_t n = 0; n < N; ++n) {
        std::vector<std::vector<std::complex<double>>> spectra;
        for (std::size_t c = 0; c < Cin; ++c) spectra.push_back(dft2_naive(x, n, c));
        for (std::size_t o = 0; o < Cout; ++o) {
            std::vector<std::complex<double>> z(H * W);
            const auto product = [&](std::size_t u, std::size_t v) {
                std::complex<double> acc = 0.0;
                for (std::size_t i = 0; i < Cin; ++i) acc += std::complex<double>(wr[o * Cin + i], wi[o * Cin + i]) * spectra[i][u * W + v];
                return acc;
            };
            for (std::size_t u = 0; u < H; ++u)
                for (std::size_t v = 0; v < W; ++v)
                    z[u * W + v] = v <= W / 2 ? product(u, v) : std::conj(product((H - u) % H, W - v));
            const std::vector<double> r = idft2_naive_real(z, H, W);
            for (std::size_t k = 0; k < H * W; ++k) out.plane(n, o)[k] = r[k];
        }
    }
    return out;
}

/// Circular convolution of every plane of x with the single H×W kernel h.
inline Tensor circular_conv(const Tensor& x, const Tensor& h) {
    const std::size_t H = x.shape().h(), W = x.shape().w();
    Tensor out(x.shape());
    for (std::size_t n = 0; n < x.shape().n(); ++n)
        for (std::size_t c = 0; c < x.shape().c(); ++c)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx) {
                    double acc = 0.0;
                    for (std::size_t a = 0; a < H; ++a)
                        for (std::size_t b = 0; b < W; ++b)
                            acc += h.at(0, 0, a, b) * x.at(n, c, (y + H - a) % H, (xx + W - b) % W);
                    out.at(n, c, y, xx) = acc;
                }
    return out;
}

/// Loop-level axial attention: for each line, logits x_i·Wq·Wkᵀ·x_jᵀ + rpe[j − i + L − 1]
/// by explicit sums, softmax over j, weighted sum of x_j·Wv. `row` attends along W.
inline Tensor axial_attention_loops(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv,
                                    const Tensor& rpe, bool row) {
    const long N = x.shape().n(), C = x.shape().c(), H = x.shape().h(), W = x.shape().w();
    const long L = (static_cast<long>(rpe.numel()) + 1) / 2;
    const long len = row ? W : H, lines = row ? H : W;
    const auto at = [&](long n, long c, long line, long pos) { return row ? x.at(n, c, line, pos) : x.at(n, c, pos, line); };
    const auto proj = [&](const Tensor& w, long n, long line, long pos, long k) {
        double acc = 0.0;
        for (long m = 0; m < C; ++m) acc += at(n, m, line, pos) * w[m * C + k];
        return acc;
    };
    Tensor out(x.shape());
    for (long n = 0; n < N; ++n)
        for (long line = 0; line < lines; ++line)
            for (long i = 0; i < len; ++i) {
                std::vector<double> logits(len);
                for (long j = 0; j < len; ++j) {
                    double a = 0.0;
                    for (long k = 0; k < C; ++k) a += proj(wq, n, line, i, k) * proj(wk, n, line, j, k);
                    logits[j] = a + rpe[j - i + L - 1];
                }
                const double mx = *std::max_element(logits.begin(), logits.end());
                double z = 0.0;
                for (double& l : logits) z += (l = std::exp(l - mx));
                for (long k = 0; k < C; ++k) {
                    double acc = 0.0;
                    for (long j = 0; j < len; ++j) acc += logits[j] / z * proj(wv, n, line, j, k);
                    if (row) out.at(n, k, line, i) = acc;
                    else out.at(n, k, i, line) = acc;
                }
            }
    return out;
}

/// Softmax(Q·Kᵀ/√C)·V over all positions of each sample, by explicit sums.
inline Tensor standard_attention_loops(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv) {
    const long N = x.shape().n(), C = x.shape().c(), H = x.shape().h(), W = x.shape().w(), P = H * W;
    const auto proj = [&](const Tensor& w, long n, long p, long k) {
        double acc = 0.0;
        for (long m = 0; m < C; ++m) acc += x.plane(n, m)[p] * w[m * C + k];
        return acc;
    };
    Tensor out(x.shape());
    for (long n = 0; n < N; ++n)
        for (long i = 0; i < P; ++i) {
            std::vector<double> logits(P);
            for (long j = 0; j < P; ++j) {
                double a = 0.0;
                for (long k = 0; k < C; ++k) a += proj(wq, n, i, k) * proj(wk, n, j, k);
                logits[j] = a / std::sqrt(static_cast<double>(C));
            }
            const double mx = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (double& l : logits) z += (l = std::exp(l - mx));
            for (long k = 0; k < C; ++k) {
                double acc = 0.0;
                for (long j = 0; j < P; ++j) acc += logits[j] / z * proj(wv, n, j, k);
                out.plane(n, k)[i] = acc;
            }
        }
    return out;
}

}  // namespace zits::oracle
