#include "zits/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace zits {
namespace {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// roots[k] = exp(sign·2πi·k/n)
std::vector<std::complex<double>> unit_roots(std::size_t n, double sign) {
    std::vector<std::complex<double>> roots(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        roots[k] = {std::cos(a), std::sin(a)};
    }
    return roots;
}

void radix2(std::span<std::complex<double>> a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto roots = unit_roots(n, inverse ? 1.0 : -1.0);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t step = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * roots[k * step];
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

void direct(std::span<std::complex<double>> a, bool inverse) {
    const std::size_t n = a.size();
    const auto roots = unit_roots(n, inverse ? 1.0 : -1.0);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += a[j] * roots[(j * k) % n];
        out[k] = acc;
    }
    std::copy(out.begin(), out.end(), a.begin());
}

}  // namespace

void dft_inplace(std::span<std::complex<double>> data, bool inverse) {
    if (data.size() <= 1) return;
    if (is_power_of_two(data.size())) {
        radix2(data, inverse);
    } else {
        direct(data, inverse);
    }
}

Spectrum rfft2(const Tensor& x) {
    const Shape& s = x.shape();
    const std::size_t h = s.h(), w = s.w(), wh = w / 2 + 1;
    Spectrum out{Shape{s.n(), s.c(), h, wh}, {}, {}};
    out.re.assign(out.shape.numel(), 0.0);
    out.im.assign(out.shape.numel(), 0.0);

    std::vector<std::complex<double>> row(w), col(h), half(h * wh);
    for (std::size_t n = 0; n < s.n(); ++n) {
        for (std::size_t c = 0; c < s.c(); ++c) {
            const double* p = x.plane(n, c);
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t xx = 0; xx < w; ++xx) row[xx] = p[y * w + xx];
                dft_inplace(row, false);
                for (std::size_t v = 0; v < wh; ++v) half[y * wh + v] = row[v];
            }
            for (std::size_t v = 0; v < wh; ++v) {
                for (std::size_t y = 0; y < h; ++y) col[y] = half[y * wh + v];
                dft_inplace(col, false);
                for (std::size_t u = 0; u < h; ++u) {
                    const std::size_t i = out.index(n, c, u, v);
                    out.re[i] = col[u].real();
                    out.im[i] = col[u].imag();
                }
            }
        }
    }
    return out;
}

Tensor irfft2(const Spectrum& s, std::size_t height, std::size_t width) {
    const std::size_t wh = width / 2 + 1;
    if (s.shape.h() != height || s.shape.w() != wh) {
        throw ShapeError("irfft2: spectrum " + s.shape.str() + " does not match output " + std::to_string(height) +
                         "x" + std::to_string(width));
    }
    if (s.re.size() != s.shape.numel() || s.im.size() != s.shape.numel()) {
        throw ShapeError("irfft2: spectrum storage does not match its shape");
    }
    Tensor out = Tensor::nchw(s.shape.n(), s.shape.c(), height, width);
    const double scale = 1.0 / static_cast<double>(height * width);
    std::vector<std::complex<double>> row(width), col(height), half(height * wh);
    for (std::size_t n = 0; n < s.shape.n(); ++n) {
        for (std::size_t c = 0; c < s.shape.c(); ++c) {
            for (std::size_t v = 0; v < wh; ++v) {
                for (std::size_t u = 0; u < height; ++u) {
                    const std::size_t i = s.index(n, c, u, v);
                    col[u] = {s.re[i], s.im[i]};
                }
                dft_inplace(col, true);
                for (std::size_t y = 0; y < height; ++y) half[y * wh + v] = col[y];
            }
            double* p = out.plane(n, c);
            for (std::size_t y = 0; y < height; ++y) {
                for (std::size_t v = 0; v < wh; ++v) row[v] = half[y * wh + v];
                for (std::size_t v = wh; v < width; ++v) row[v] = std::conj(half[y * wh + (width - v)]);
                dft_inplace(row, true);
                for (std::size_t xx = 0; xx < width; ++xx) p[y * width + xx] = row[xx].real() * scale;
            }
        }
    }
    return out;
}

}  // namespace zits
