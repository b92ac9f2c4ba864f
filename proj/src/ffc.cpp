#include "zits/ffc.hpp"

#include <cmath>
#include <string>

#include "zits/ops.hpp"

namespace zits {

Tensor FourierUnit::forward(const Tensor& x) const {
    const std::size_t cout = wr.shape().h(), cin = wr.shape().w();
    if (!(wi.shape() == wr.shape())) throw ShapeError("fourier_unit: real and imaginary weights differ in shape");
    if (x.shape().c() != cin) {
        throw ShapeError("fourier_unit: expected " + std::to_string(cin) + " channels, got " + x.shape().str());
    }
    const Spectrum in = rfft2(x);
    Spectrum out{Shape{in.shape.n(), cout, in.shape.h(), in.shape.w()}, {}, {}};
    const std::size_t bins = in.shape.h() * in.shape.w();
    out.re.assign(out.shape.numel(), 0.0);
    out.im.assign(out.shape.numel(), 0.0);
    for (std::size_t n = 0; n < in.shape.n(); ++n)
        for (std::size_t o = 0; o < cout; ++o) {
            double* ore = out.re.data() + out.index(n, o, 0, 0);
            double* oim = out.im.data() + out.index(n, o, 0, 0);
            for (std::size_t i = 0; i < cin; ++i) {
                const double a = wr[o * cin + i], b = wi[o * cin + i];
                const double* ire = in.re.data() + in.index(n, i, 0, 0);
                const double* iim = in.im.data() + in.index(n, i, 0, 0);
                for (std::size_t k = 0; k < bins; ++k) {
                    ore[k] += a * ire[k] - b * iim[k];
                    oim[k] += b * ire[k] + a * iim[k];
                }
            }
        }
    return irfft2(out, x.shape().h(), x.shape().w());
}

FourierUnit make_fourier_unit(Rng& rng, std::size_t cin, std::size_t cout) {
    const double sd = 1.0 / std::sqrt(2.0 * static_cast<double>(cin));
    return {random_normal(Shape{cout, cin}, rng, sd), random_normal(Shape{cout, cin}, rng, sd)};
}

FourierUnit identity_fourier_unit(std::size_t channels) {
    FourierUnit u{Tensor(Shape{channels, channels}), Tensor(Shape{channels, channels})};
    for (std::size_t c = 0; c < channels; ++c) u.wr[c * channels + c] = 1.0;
    return u;
}

Tensor spectral_multiply(const Tensor& x, const std::vector<double>& h_re, const std::vector<double>& h_im) {
    Spectrum s = rfft2(x);
    const std::size_t bins = s.shape.h() * s.shape.w();
    if (h_re.size() != bins || h_im.size() != bins) {
        throw ShapeError("spectral_multiply: multiplier has " + std::to_string(h_re.size()) + " bins, spectrum " +
                         std::to_string(bins));
    }
    for (std::size_t plane = 0; plane < s.shape.n() * s.shape.c(); ++plane)
        for (std::size_t k = 0; k < bins; ++k) {
            double& re = s.re[plane * bins + k];
            double& im = s.im[plane * bins + k];
            const double r = re * h_re[k] - im * h_im[k];
            im = re * h_im[k] + im * h_re[k];
            re = r;
        }
    return irfft2(s, x.shape().h(), x.shape().w());
}

FfcParams make_ffc(Rng& rng, std::size_t channels, double global_ratio) {
    const double g = static_cast<double>(channels) * global_ratio;
    if (g != std::floor(g) || g <= 0.0 || g >= static_cast<double>(channels)) {
        throw ShapeError("ffc: " + std::to_string(channels) + " channels cannot be split at ratio " +
                         std::to_string(global_ratio));
    }
    FfcParams p;
    p.global = static_cast<std::size_t>(g);
    p.local = channels - p.global;
    const ConvSpec same{.pad = 1};
    p.l2l = make_conv(rng, p.local, p.local, 3, same);
    p.l2g = make_conv(rng, p.local, p.global, 3, same);
    p.g2l = make_conv(rng, p.global, p.local, 3, same);
    p.g2g = make_fourier_unit(rng, p.global, p.global);
    return p;
}

Tensor ffc_layer(const Tensor& x, const FfcParams& p) {
    if (x.shape().c() != p.local + p.global) {
        throw ShapeError("ffc_layer: expected " + std::to_string(p.local + p.global) + " channels, got " + x.shape().str());
    }
    const Tensor xl = slice_channels(x, 0, p.local);
    const Tensor xg = slice_channels(x, p.local, p.local + p.global);
    const Tensor parts[] = {p.l2l.forward(xl) + p.g2l.forward(xg), p.l2g.forward(xl) + p.g2g.forward(xg)};
    return concat_channels(parts);
}

FfcBlock make_ffc_block(Rng& rng, std::size_t channels) {
    FfcBlock b;
    b.first = make_ffc(rng, channels);
    b.second = make_ffc(rng, channels);
    b.norm_first = make_batch_norm(channels);
    b.norm_second = make_batch_norm(channels);
    return b;
}

Tensor ffc_block(const Tensor& x, const FfcBlock& b) {
    const Tensor h = activate(b.norm_first.forward(ffc_layer(x, b.first)), Activation::Swish);
    return x + activate(b.norm_second.forward(ffc_layer(h, b.second)), Activation::Swish);
}

}  // namespace zits
