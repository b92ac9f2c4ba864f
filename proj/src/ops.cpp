#include "zits/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zits {

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    if (name == "swish") return Activation::Swish;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation kind) {
    switch (kind) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Swish: return "swish";
    }
    return "?";
}

namespace {

void check_window(const Shape& s, std::size_t window) {
    if (window == 0) throw ShapeError("pool2d: window must be positive");
    if (s.h() % window != 0) {
        throw ShapeError("pool2d: height " + std::to_string(s.h()) + " not divisible by window " +
                         std::to_string(window));
    }
    if (s.w() % window != 0) {
        throw ShapeError("pool2d: width " + std::to_string(s.w()) + " not divisible by window " +
                         std::to_string(window));
    }
}

}  // namespace

Tensor pool2d(const Tensor& x, std::size_t window, PoolMode mode) {
    const Shape& s = x.shape();
    check_window(s, window);
    const std::size_t oh = s.h() / window, ow = s.w() / window;
    Tensor out = Tensor::nchw(s.n(), s.c(), oh, ow);
    const double inv = 1.0 / static_cast<double>(window * window);
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c)
            for (std::size_t oy = 0; oy < oh; ++oy)
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    double acc = mode == PoolMode::Max ? x.at(n, c, oy * window, ox * window) : 0.0;
                    for (std::size_t dy = 0; dy < window; ++dy)
                        for (std::size_t dx = 0; dx < window; ++dx) {
                            const double v = x.at(n, c, oy * window + dy, ox * window + dx);
                            acc = mode == PoolMode::Max ? std::max(acc, v) : acc + v;
                        }
                    out.at(n, c, oy, ox) = mode == PoolMode::Max ? acc : acc * inv;
                }
    return out;
}

Tensor pool2d_backward(const Tensor& x, const Tensor& grad_out, std::size_t window, PoolMode mode) {
    const Shape& s = x.shape();
    check_window(s, window);
    const std::size_t oh = s.h() / window, ow = s.w() / window;
    if (!(grad_out.shape() == Shape{s.n(), s.c(), oh, ow})) {
        throw ShapeError("pool2d backward: gradient shape " + grad_out.shape().str());
    }
    Tensor dx(s);
    const double inv = 1.0 / static_cast<double>(window * window);
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c)
            for (std::size_t oy = 0; oy < oh; ++oy)
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const double g = grad_out.at(n, c, oy, ox);
                    if (mode == PoolMode::Avg) {
                        for (std::size_t dy = 0; dy < window; ++dy)
                            for (std::size_t dx2 = 0; dx2 < window; ++dx2)
                                dx.at(n, c, oy * window + dy, ox * window + dx2) += g * inv;
                        continue;
                    }
                    std::size_t by = oy * window, bx = ox * window;
                    double best = x.at(n, c, by, bx);
                    for (std::size_t dy = 0; dy < window; ++dy)
                        for (std::size_t dx2 = 0; dx2 < window; ++dx2) {
                            const double v = x.at(n, c, oy * window + dy, ox * window + dx2);
                            if (v > best) {
                                best = v;
                                by = oy * window + dy;
                                bx = ox * window + dx2;
                            }
                        }
                    dx.at(n, c, by, bx) += g;
                }
    return dx;
}

std::size_t nearest_source(std::size_t i, std::size_t in, std::size_t out) {
    const auto src = static_cast<std::size_t>(std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(in) /
                                                         static_cast<double>(out)));
    return std::min(src, in - 1);
}

Tensor resize(const Tensor& x, std::size_t new_h, std::size_t new_w, ResizeMode mode) {
    if (new_h == 0 || new_w == 0) throw ShapeError("resize: target extents must be positive");
    const Shape& s = x.shape();
    Tensor out = Tensor::nchw(s.n(), s.c(), new_h, new_w);
    if (mode == ResizeMode::Nearest) {
        std::vector<std::size_t> sy(new_h), sx(new_w);
        for (std::size_t i = 0; i < new_h; ++i) sy[i] = nearest_source(i, s.h(), new_h);
        for (std::size_t j = 0; j < new_w; ++j) sx[j] = nearest_source(j, s.w(), new_w);
        for (std::size_t n = 0; n < s.n(); ++n)
            for (std::size_t c = 0; c < s.c(); ++c)
                for (std::size_t i = 0; i < new_h; ++i)
                    for (std::size_t j = 0; j < new_w; ++j) out.at(n, c, i, j) = x.at(n, c, sy[i], sx[j]);
        return out;
    }

    struct Tap {
        std::size_t i0, i1;
        double frac;
    };
    auto taps = [](std::size_t in, std::size_t outn) {
        std::vector<Tap> t(outn);
        const double scale = static_cast<double>(in) / static_cast<double>(outn);
        for (std::size_t i = 0; i < outn; ++i) {
            const double src = std::max((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0);
            const auto i0 = std::min(static_cast<std::size_t>(std::floor(src)), in - 1);
            const std::size_t i1 = std::min(i0 + 1, in - 1);
            t[i] = {i0, i1, src - static_cast<double>(i0)};
        }
        return t;
    };
    const auto ty = taps(s.h(), new_h);
    const auto tx = taps(s.w(), new_w);
    for (std::size_t n = 0; n < s.n(); ++n)
        for (std::size_t c = 0; c < s.c(); ++c)
            for (std::size_t i = 0; i < new_h; ++i) {
                const Tap& a = ty[i];
                for (std::size_t j = 0; j < new_w; ++j) {
                    const Tap& b = tx[j];
                    const double top = x.at(n, c, a.i0, b.i0) * (1.0 - b.frac) + x.at(n, c, a.i0, b.i1) * b.frac;
                    const double bot = x.at(n, c, a.i1, b.i0) * (1.0 - b.frac) + x.at(n, c, a.i1, b.i1) * b.frac;
                    out.at(n, c, i, j) = top * (1.0 - a.frac) + bot * a.frac;
                }
            }
    return out;
}

Tensor resize_nearest_backward(const Tensor& grad_out, const Shape& input_shape) {
    const Shape& g = grad_out.shape();
    Tensor dx(input_shape);
    const Shape& s = dx.shape();
    if (g.n() != s.n() || g.c() != s.c()) throw ShapeError("resize backward: batch/channel extent mismatch");
    for (std::size_t n = 0; n < g.n(); ++n)
        for (std::size_t c = 0; c < g.c(); ++c)
            for (std::size_t i = 0; i < g.h(); ++i) {
                const std::size_t si = nearest_source(i, s.h(), g.h());
                for (std::size_t j = 0; j < g.w(); ++j)
                    dx.at(n, c, si, nearest_source(j, s.w(), g.w())) += grad_out.at(n, c, i, j);
            }
    return dx;
}

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

double activate(double v, Activation kind) {
    switch (kind) {
        case Activation::Identity: return v;
        case Activation::Relu: return v > 0.0 ? v : 0.0;
        case Activation::Sigmoid: return sigmoid(v);
        case Activation::Tanh: return std::tanh(v);
        case Activation::Swish: return v * sigmoid(v);
    }
    return v;
}

double activate_derivative(double v, Activation kind) {
    switch (kind) {
        case Activation::Identity: return 1.0;
        case Activation::Relu: return v > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: {
            const double s = sigmoid(v);
            return s * (1.0 - s);
        }
        case Activation::Tanh: {
            const double t = std::tanh(v);
            return 1.0 - t * t;
        }
        case Activation::Swish: {
            const double s = sigmoid(v);
            return s + v * s * (1.0 - s);
        }
    }
    return 1.0;
}

Tensor activate(const Tensor& x, Activation kind) {
    Tensor out = x;
    for (double& v : out.data()) v = activate(v, kind);
    return out;
}

}  // namespace zits
