#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "zits/conv.hpp"
#include "zits/fft.hpp"
#include "zits/io.hpp"
#include "zits/ops.hpp"
#include "zits/random.hpp"

using namespace zits;

namespace {

struct ConvCase {
    Tensor x, w;
    std::vector<double> bias;
    ConvSpec spec;
};

ConvCase random_conv_case(Rng& rng) {
    for (;;) {
        ConvCase c;
        c.spec.groups = rng.uniform_int(1, 3);
        const int cin = c.spec.groups * rng.uniform_int(1, 2);
        const int cout = c.spec.groups * rng.uniform_int(1, 2);
        const int kh = rng.uniform_int(1, 4), kw = rng.uniform_int(1, 4);
        c.spec.stride = rng.uniform_int(1, 3);
        c.spec.dilation = rng.uniform_int(1, 2);
        c.spec.pad = rng.uniform_int(0, 2);
        const int h = rng.uniform_int(1, 12), w = rng.uniform_int(1, 12);
        if (h + 2 * c.spec.pad < c.spec.dilation * (kh - 1) + 1) continue;
        if (w + 2 * c.spec.pad < c.spec.dilation * (kw - 1) + 1) continue;
        c.x = random_uniform(Shape{static_cast<std::size_t>(rng.uniform_int(1, 2)), static_cast<std::size_t>(cin),
                                   static_cast<std::size_t>(h), static_cast<std::size_t>(w)},
                             rng);
        c.w = random_uniform(Shape{static_cast<std::size_t>(cout), static_cast<std::size_t>(cin / c.spec.groups),
                                   static_cast<std::size_t>(kh), static_cast<std::size_t>(kw)},
                             rng);
        if (rng.bernoulli(0.5)) c.bias = random_uniform(Shape{static_cast<std::size_t>(cout)}, rng).vec();
        return c;
    }
}

}  // namespace

TEST(Tensor, ShapeRightAlignsOntoNchw) {
    const Shape s{3, 5};
    EXPECT_EQ(s.n(), 1u);
    EXPECT_EQ(s.c(), 1u);
    EXPECT_EQ(s.h(), 3u);
    EXPECT_EQ(s.w(), 5u);
    EXPECT_EQ(s.numel(), 15u);
}

TEST(Tensor, RejectsZeroExtentAndWrongDataLength) {
    EXPECT_THROW(Tensor(Shape{2, 0}), ShapeError);
    EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>(3)), ShapeError);
}

TEST(Conv2d, UnitOneByOneKernelIsIdentity) {
    Rng rng(1);
    const Tensor x = random_uniform(Shape{2, 3, 5, 4}, rng);
    Tensor w = Tensor::nchw(3, 3, 1, 1);
    for (std::size_t c = 0; c < 3; ++c) w.at(c, c, 0, 0) = 1.0;
    EXPECT_EQ(conv2d(x, w).vec(), x.vec());
}

TEST(Conv2d, ImpulseResponseIsFlippedKernel) {
    Rng rng(2);
    Tensor x = Tensor::nchw(1, 1, 7, 7);
    x.at(0, 0, 3, 3) = 1.0;
    const Tensor w = random_uniform(Shape{1, 1, 3, 3}, rng);
    const Tensor y = conv2d(x, w, ConvSpec{.pad = 1});
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) EXPECT_EQ(y.at(0, 0, 3 + dy, 3 + dx), w.at(0, 0, 1 - dy, 1 - dx));
    EXPECT_DOUBLE_EQ(sum(y), sum(w));
}

TEST(Conv2d, MatchesLoopOracleOnRandomCases) {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const ConvCase c = random_conv_case(rng);
        const Tensor got = conv2d(c.x, c.w, c.bias, c.spec);
        const Tensor want = oracle::conv2d_loops(c.x, c.w, c.bias, c.spec);
        ASSERT_EQ(got.shape(), want.shape()) << "case " << i;
        EXPECT_LE(max_abs_diff(got, want), 1e-12) << "case " << i;
    }
}

TEST(Conv2d, DepthwiseFastPathMatchesOracle) {
    Rng rng(4);
    const Tensor x = random_uniform(Shape{1, 4, 11, 9}, rng);
    const Tensor w = random_uniform(Shape{4, 1, 5, 5}, rng);
    const ConvSpec spec{.dilation = 2, .pad = 4, .groups = 4};
    EXPECT_LE(max_abs_diff(conv2d(x, w, spec), oracle::conv2d_loops(x, w, {}, spec)), 1e-12);
}

TEST(Conv2d, ShapeErrorNamesDimension) {
    const Tensor x = Tensor::nchw(1, 3, 5, 5);
    const Tensor w = Tensor::nchw(2, 2, 3, 3);
    try {
        conv2d(x, w);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
    }
    EXPECT_THROW(conv2d(Tensor::nchw(1, 1, 2, 2), Tensor::nchw(1, 1, 3, 3)), ShapeError);
}

TEST(Conv2d, DeterministicAcrossCalls) {
    Rng rng(5);
    const ConvCase c = random_conv_case(rng);
    EXPECT_EQ(conv2d(c.x, c.w, c.bias, c.spec).vec(), conv2d(c.x, c.w, c.bias, c.spec).vec());
}

TEST(TransposedConv2d, UnitKernelStrideOneIsIdentity) {
    Rng rng(6);
    const Tensor x = random_uniform(Shape{1, 1, 4, 4}, rng);
    EXPECT_EQ(transposed_conv2d(x, Tensor::nchw(1, 1, 1, 1, 1.0)).vec(), x.vec());
}

TEST(TransposedConv2d, StrideTwoUnitKernelReplicatesBlocks) {
    Tensor x = Tensor::nchw(1, 1, 4, 4);
    for (std::size_t i = 0; i < 16; ++i) x[i] = static_cast<double>(i + 1);
    const Tensor y = transposed_conv2d(x, Tensor::nchw(1, 1, 2, 2, 1.0), ConvSpec{.stride = 2});
    ASSERT_EQ(y.shape(), (Shape{1, 1, 8, 8}));
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(y.at(0, 0, r, c), x.at(0, 0, r / 2, c / 2));
}

TEST(TransposedConv2d, IsAdjointOfConv2d) {
    Rng rng(7);
    int checked = 0;
    while (checked < 50) {
        ConvCase c = random_conv_case(rng);
        const auto remainder = [&](std::size_t in, std::size_t k) {
            return (static_cast<int>(in) + 2 * c.spec.pad - c.spec.dilation * (static_cast<int>(k) - 1) - 1) %
                   c.spec.stride;
        };
        // One output_padding serves both axes, so both must leave the same remainder.
        const int rh = remainder(c.x.shape().h(), c.w.shape().h());
        if (rh != remainder(c.x.shape().w(), c.w.shape().w())) continue;
        const Tensor y = conv2d(c.x, c.w, c.spec);
        const Tensor g = random_uniform(y.shape(), rng);
        ConvSpec ts = c.spec;
        ts.output_padding = rh;
        const Tensor gx = transposed_conv2d(g, c.w, ts);
        ASSERT_EQ(gx.shape(), c.x.shape()) << "case " << checked;
        EXPECT_NEAR(dot(y, g), dot(c.x, gx), 1e-10 * (1.0 + std::abs(dot(y, g)))) << "case " << checked;
        ++checked;
    }
}

TEST(TransposedConv2d, RejectsOutputPaddingNotBelowStride) {
    EXPECT_THROW(transposed_conv2d(Tensor::nchw(1, 1, 2, 2), Tensor::nchw(1, 1, 2, 2), ConvSpec{.stride = 2, .output_padding = 2}),
                 ShapeError);
}

TEST(Pool2d, ConstantStaysConstant) {
    const Tensor x = Tensor::nchw(1, 2, 4, 6, 0.75);
    for (PoolMode mode : {PoolMode::Max, PoolMode::Avg}) {
        const Tensor y = pool2d(x, 2, mode);
        ASSERT_EQ(y.shape(), (Shape{1, 2, 2, 3}));
        for (double v : y.data()) EXPECT_EQ(v, 0.75);
    }
}

TEST(Pool2d, TwoByTwoExample) {
    const Tensor x(Shape{1, 1, 2, 2}, {0, 1, 0, 0});
    EXPECT_EQ(pool2d(x, 2, PoolMode::Max)[0], 1.0);
    EXPECT_EQ(pool2d(x, 2, PoolMode::Avg)[0], 0.25);
}

TEST(Pool2d, MatchesLoopOracle) {
    Rng rng(8);
    const Tensor x = random_uniform(Shape{2, 3, 8, 8}, rng);
    const Tensor mx = pool2d(x, 2, PoolMode::Max), av = pool2d(x, 2, PoolMode::Avg);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t y = 0; y < 4; ++y)
                for (std::size_t xx = 0; xx < 4; ++xx) {
                    double m = -1e300, s = 0.0;
                    for (std::size_t dy = 0; dy < 2; ++dy)
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            const double v = x.at(n, c, 2 * y + dy, 2 * xx + dx);
                            m = std::max(m, v);
                            s += v;
                        }
                    EXPECT_EQ(mx.at(n, c, y, xx), m);
                    EXPECT_EQ(av.at(n, c, y, xx), s / 4.0);
                }
}

TEST(Pool2d, NonDivisibleExtentThrows) {
    EXPECT_THROW(pool2d(Tensor::nchw(1, 1, 5, 4), 2, PoolMode::Max), ShapeError);
}

TEST(Resize, SameSizeIsIdentity) {
    Rng rng(9);
    const Tensor x = random_uniform(Shape{1, 2, 5, 7}, rng);
    EXPECT_EQ(resize(x, 5, 7, ResizeMode::Nearest).vec(), x.vec());
    EXPECT_EQ(resize(x, 5, 7, ResizeMode::Bilinear).vec(), x.vec());
}

TEST(Resize, NearestUpscaleReplicatesBlocks) {
    const Tensor x(Shape{1, 1, 2, 2}, {0, 1, 2, 3});
    const Tensor y = resize(x, 4, 4, ResizeMode::Nearest);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(y.at(0, 0, r, c), x.at(0, 0, r / 2, c / 2));
}

TEST(Resize, BilinearDownscaleOfRampIsRamp) {
    // f(x) = 3 + 0.5·x sampled at pixel centres; half-pixel-centre mapping
    // sends output pixel j to source coordinate (j + 0.5)·in/out − 0.5.
    const std::size_t in = 16, out = 8;
    Tensor x = Tensor::nchw(1, 1, 1, in);
    for (std::size_t i = 0; i < in; ++i) x[i] = 3.0 + 0.5 * static_cast<double>(i);
    const Tensor y = resize(x, 1, out, ResizeMode::Bilinear);
    for (std::size_t j = 0; j < out; ++j) {
        const double src = (static_cast<double>(j) + 0.5) * in / out - 0.5;
        EXPECT_NEAR(y[j], 3.0 + 0.5 * src, 1e-12);
    }
}

TEST(Resize, ZeroExtentThrows) {
    EXPECT_THROW(resize(Tensor::nchw(1, 1, 2, 2), 0, 2, ResizeMode::Nearest), ShapeError);
}

TEST(Fft, ConstantImageHasOnlyDcBin) {
    const Tensor x = Tensor::nchw(1, 1, 4, 6, 2.5);
    const Spectrum s = rfft2(x);
    ASSERT_EQ(s.shape, (Shape{1, 1, 4, 4}));
    EXPECT_NEAR(s.re[0], 2.5 * 24, 1e-12);
    for (std::size_t i = 1; i < s.re.size(); ++i) {
        EXPECT_NEAR(s.re[i], 0.0, 1e-12);
        EXPECT_NEAR(s.im[i], 0.0, 1e-12);
    }
}

TEST(Fft, RoundTripOnRandomTensors) {
    Rng rng(10);
    for (int i = 0; i < 50; ++i) {
        const std::size_t h = rng.uniform_int(1, 20), w = rng.uniform_int(1, 20);
        const Tensor x = random_uniform(Shape{2, 2, h, w}, rng);
        const Tensor back = irfft2(rfft2(x), h, w);
        EXPECT_LE(max_abs_diff(back, x) / max_abs(x), 1e-9) << h << "x" << w;
    }
}

TEST(Fft, MatchesNaiveDft) {
    Rng rng(11);
    for (std::size_t h : {1u, 3u, 8u, 16u})
        for (std::size_t w : {1u, 5u, 8u, 16u}) {
            const Tensor x = random_uniform(Shape{1, 1, h, w}, rng);
            const Spectrum s = rfft2(x);
            const auto ref = oracle::dft2_naive(x, 0, 0);
            for (std::size_t u = 0; u < h; ++u)
                for (std::size_t v = 0; v <= w / 2; ++v) {
                    EXPECT_NEAR(s.re[s.index(0, 0, u, v)], ref[u * w + v].real(), 1e-8);
                    EXPECT_NEAR(s.im[s.index(0, 0, u, v)], ref[u * w + v].imag(), 1e-8);
                }
        }
}

TEST(Fft, IsLinear) {
    Rng rng(12);
    const Tensor a = random_uniform(Shape{1, 1, 8, 8}, rng), b = random_uniform(Shape{1, 1, 8, 8}, rng);
    const Spectrum sa = rfft2(a), sb = rfft2(b), sc = rfft2(2.0 * a + (-3.0) * b);
    for (std::size_t i = 0; i < sc.re.size(); ++i) {
        EXPECT_NEAR(sc.re[i], 2.0 * sa.re[i] - 3.0 * sb.re[i], 1e-12);
        EXPECT_NEAR(sc.im[i], 2.0 * sa.im[i] - 3.0 * sb.im[i], 1e-12);
    }
}

TEST(Activations, ClosedForms) {
    EXPECT_EQ(activate(0.0, Activation::Swish), 0.0);
    EXPECT_EQ(activate(0.0, Activation::Sigmoid), 0.5);
    EXPECT_EQ(activate(-1.0, Activation::Relu), 0.0);
    EXPECT_NEAR(activate(20.0, Activation::Swish), 20.0, 1e-6);
    EXPECT_THROW(parse_activation("gelu"), std::invalid_argument);
}

TEST(Activations, ElementwiseMatchesScalarReference) {
    Rng rng(13);
    const Tensor x = random_uniform(Shape{1000}, rng, -30.0, 30.0);
    for (Activation kind : {Activation::Relu, Activation::Sigmoid, Activation::Tanh, Activation::Swish}) {
        const Tensor y = activate(x, kind);
        for (std::size_t i = 0; i < x.numel(); ++i) {
            const double v = x[i];
            double ref = 0.0;
            switch (kind) {
                case Activation::Relu: ref = v > 0 ? v : 0.0; break;
                case Activation::Sigmoid: ref = 1.0 / (1.0 + std::exp(-v)); break;
                case Activation::Tanh: ref = std::tanh(v); break;
                default: ref = v / (1.0 + std::exp(-v)); break;
            }
            EXPECT_NEAR(y[i], ref, 1e-15 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST(Io, ZtenRoundTripIsBitExact) {
    Rng rng(14);
    const Tensor x = random_normal(Shape{2, 3, 4}, rng);
    std::stringstream ss;
    write_zten(ss, x);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "ZTEN");
    EXPECT_EQ(bytes[4], 3);
    EXPECT_EQ(bytes.size(), 4u + 1u + 3u * 4u + 24u * 8u);
    const Tensor y = read_zten(ss);
    EXPECT_EQ(y.shape(), x.shape());
    EXPECT_EQ(y.vec(), x.vec());
}

TEST(Io, ZtenRejectsBadMagicAndTruncation) {
    std::stringstream bad("ZTEX\x01\x01\x00\x00\x00");
    EXPECT_THROW(read_zten(bad), IoError);
    std::stringstream ss;
    write_zten(ss, Tensor(Shape{4}, 1.0));
    std::stringstream cut(ss.str().substr(0, ss.str().size() - 3));
    EXPECT_THROW(read_zten(cut), IoError);
}

TEST(Io, NetpbmRoundTrip8And16Bit) {
    for (std::uint32_t maxval : {255u, 65535u}) {
        Netpbm img{3, 2, 1, maxval, {0, 1, 2, 100, 200, static_cast<std::uint16_t>(maxval)}};
        std::stringstream ss;
        write_netpbm(ss, img);
        const Netpbm back = read_netpbm(ss);
        EXPECT_EQ(back.width, 3u);
        EXPECT_EQ(back.height, 2u);
        EXPECT_EQ(back.maxval, maxval);
        EXPECT_EQ(back.samples, img.samples);
    }
}

TEST(Io, NetpbmHeaderCommentsAreSkipped) {
    std::stringstream ss;
    ss << "P5\n# made by hand\n2 1\n255\n" << static_cast<char>(7) << static_cast<char>(9);
    const Netpbm img = read_netpbm(ss);
    EXPECT_EQ(img.samples, (std::vector<std::uint16_t>{7, 9}));
}
