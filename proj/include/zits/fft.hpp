#pragma once

#include <complex>
#include <span>
#include <vector>

#include "zits/tensor.hpp"

namespace zits {

/// Half-plane spectrum of a real (N, C, H, W) tensor: extents
/// (N, C, H, W/2 + 1), real and imaginary parts stored separately.
struct Spectrum {
    Shape shape;
    std::vector<double> re;
    std::vector<double> im;

    std::size_t index(std::size_t n, std::size_t c, std::size_t u, std::size_t v) const {
        return ((n * shape.c() + c) * shape.h() + u) * shape.w() + v;
    }
};

/// In-place 1-D DFT. Power-of-two lengths use an iterative radix-2 FFT; other
/// lengths fall back to a direct O(n²) sum. `inverse` flips the exponent sign
/// without scaling.
void dft_inplace(std::span<std::complex<double>> data, bool inverse);

/// Forward transform over (H, W), unnormalised.
Spectrum rfft2(const Tensor& x);
/// Inverse of rfft2, scaled by 1/(H·W). Bins that violate Hermitian
/// symmetry are projected onto it (the real part of the full inverse).
Tensor irfft2(const Spectrum& s, std::size_t height, std::size_t width);

}  // namespace zits
