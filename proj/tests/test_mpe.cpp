#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "zits/mpe.hpp"
#include "zits/ops.hpp"

using namespace zits;

namespace {

void expect_direction_matches_oracle(const MaskMap& m) {
    const DirectionMap dirs = masking_direction(m);
    std::array<std::vector<int>, 4> steps;
    for (int d = 0; d < 4; ++d) steps[d] = oracle::direction_cone_steps(m, d);
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x) {
            const std::size_t i = y * m.width() + x;
            int best = -1;
            for (int d = 0; d < 4; ++d)
                if (steps[d][i] >= 0 && (best < 0 || steps[d][i] < best)) best = steps[d][i];
            for (int d = 0; d < 4; ++d) {
                const bool want = m.masked(y, x) && steps[d][i] == best;
                ASSERT_EQ(dirs.at(y, x, static_cast<Direction>(d)), want) << "pixel (" << y << ", " << x << ") dir " << d;
            }
        }
}

}  // namespace

TEST(MaskingDistance, AllKnownIsZero) {
    const DistanceMap d = masking_distance(MaskMap(6, 7));
    for (int v : d.values) EXPECT_EQ(v, 0);
}

TEST(MaskingDistance, CentralHoleRingAndCentre) {
    MaskMap m(5, 5);
    for (std::size_t y = 1; y <= 3; ++y)
        for (std::size_t x = 1; x <= 3; ++x) m.set(y, x, true);
    const DistanceMap d = masking_distance(m);
    EXPECT_EQ(d.at(2, 2), 2);
    for (std::size_t y = 1; y <= 3; ++y)
        for (std::size_t x = 1; x <= 3; ++x)
            if (y != 2 || x != 2) {
                EXPECT_EQ(d.at(y, x), 1);
            }
    EXPECT_EQ(d.values, oracle::chebyshev_distance(m, kDefaultMaxDistance));
}

TEST(MaskingDistance, MatchesChebyshevOracleOnRandomMasks) {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const std::size_t h = rng.uniform_int(1, 40), w = rng.uniform_int(1, 40);
        const MaskMap m = i % 2 ? oracle::random_mask(h, w, rng.uniform(0.3, 0.95), rng) : oracle::random_box_mask(h, w, rng);
        EXPECT_EQ(masking_distance(m).values, oracle::chebyshev_distance(m, kDefaultMaxDistance)) << "mask " << i;
    }
}

TEST(MaskingDistance, ClipsAtMaximum) {
    MaskMap m(1, 20, true);
    m.set(0, 0, false);
    const DistanceMap d = masking_distance(m, 5);
    for (std::size_t x = 0; x < 20; ++x) EXPECT_EQ(d.at(0, x), std::min<int>(x, 5));
}

TEST(MaskingDistance, AllMaskedSaturates) {
    const DistanceMap d = masking_distance(MaskMap(4, 4, true), 9);
    for (int v : d.values) EXPECT_EQ(v, 9);
}

TEST(MaskingDistance, TransposeCommutes) {
    Rng rng(2);
    const MaskMap m = oracle::random_box_mask(13, 21, rng);
    const DistanceMap a = masking_distance(m), b = masking_distance(m.transposed());
    for (std::size_t y = 0; y < 13; ++y)
        for (std::size_t x = 0; x < 21; ++x) EXPECT_EQ(a.at(y, x), b.at(x, y));
}

TEST(MaskingDirection, IsolatedHoleSetsAllFour) {
    MaskMap m(3, 3);
    m.set(1, 1, true);
    const DirectionMap d = masking_direction(m);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_TRUE(d.at(1, 1, static_cast<Direction>(k)));
    EXPECT_FALSE(d.at(0, 0, Direction::Up));
}

TEST(MaskingDirection, RightHalfHoleInSingleRowPointsLeft) {
    MaskMap m(1, 10);
    for (std::size_t x = 5; x < 10; ++x) m.set(0, x, true);
    const DirectionMap d = masking_direction(m);
    for (std::size_t x = 5; x < 10; ++x) {
        EXPECT_TRUE(d.at(0, x, Direction::Left));
        EXPECT_FALSE(d.at(0, x, Direction::Right));
        EXPECT_FALSE(d.at(0, x, Direction::Up));
        EXPECT_FALSE(d.at(0, x, Direction::Down));
    }
}

TEST(MaskingDirection, RightHalfHoleMatchesConeOracle) {
    // Left is always a nearest direction; up and down tie with it on rows far
    // enough from the top and bottom edges.
    MaskMap m(8, 8);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 4; x < 8; ++x) m.set(y, x, true);
    const DirectionMap d = masking_direction(m);
    for (std::size_t y = 0; y < 8; ++y)
        for (std::size_t x = 4; x < 8; ++x) {
            EXPECT_TRUE(d.at(y, x, Direction::Left));
            EXPECT_FALSE(d.at(y, x, Direction::Right));
        }
    EXPECT_FALSE(d.at(0, 7, Direction::Up));
    EXPECT_TRUE(d.at(7, 7, Direction::Up));
    expect_direction_matches_oracle(m);
}

TEST(MaskingDirection, MatchesConeOracleOnRandomMasks) {
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const std::size_t h = rng.uniform_int(1, 24), w = rng.uniform_int(1, 24);
        const MaskMap m = i % 2 ? oracle::random_mask(h, w, rng.uniform(0.3, 0.95), rng) : oracle::random_box_mask(h, w, rng);
        if (m.masked_count() == m.values().size()) continue;
        SCOPED_TRACE("mask " + std::to_string(i));
        expect_direction_matches_oracle(m);
    }
}

TEST(MaskingDirection, KnownPixelsAreZeroAndHolesNonEmpty) {
    Rng rng(4);
    const MaskMap m = oracle::random_box_mask(20, 20, rng);
    const DirectionMap d = masking_direction(m);
    for (std::size_t y = 0; y < 20; ++y)
        for (std::size_t x = 0; x < 20; ++x) {
            int count = 0;
            for (std::size_t k = 0; k < 4; ++k) count += d.at(y, x, static_cast<Direction>(k));
            if (m.masked(y, x))
                EXPECT_GE(count, 1);
            else
                EXPECT_EQ(count, 0);
        }
}

TEST(MaskingDirection, MirrorSwapsLeftAndRight) {
    Rng rng(5);
    const MaskMap m = oracle::random_box_mask(15, 17, rng);
    const DirectionMap a = masking_direction(m), b = masking_direction(m.mirrored());
    for (std::size_t y = 0; y < 15; ++y)
        for (std::size_t x = 0; x < 17; ++x) {
            const std::size_t mx = 16 - x;
            EXPECT_EQ(a.at(y, x, Direction::Left), b.at(y, mx, Direction::Right));
            EXPECT_EQ(a.at(y, x, Direction::Right), b.at(y, mx, Direction::Left));
            EXPECT_EQ(a.at(y, x, Direction::Up), b.at(y, mx, Direction::Up));
            EXPECT_EQ(a.at(y, x, Direction::Down), b.at(y, mx, Direction::Down));
        }
}

TEST(MaskingDirection, AllMaskedFlagsNoCover) {
    const DirectionMap d = masking_direction(MaskMap(5, 5, true));
    EXPECT_TRUE(d.no_cover);
    for (auto v : d.values) EXPECT_EQ(v, 0);
}

TEST(SinusoidalEncode, ZeroDistance) {
    const Tensor e = sinusoidal_encode(masking_distance(MaskMap(3, 4)), 8);
    ASSERT_EQ(e.shape(), (Shape{1, 8, 3, 4}));
    for (std::size_t c = 0; c < 8; ++c)
        for (std::size_t p = 0; p < 12; ++p) EXPECT_EQ(e.plane(0, c)[p], c % 2 ? 1.0 : 0.0);
}

TEST(SinusoidalEncode, FirstPairUsesUnitDivisor) {
    DistanceMap d{1, 1, 128, {128}};
    const Tensor e = sinusoidal_encode(d, 64);
    EXPECT_EQ(e[0], std::sin(128.0));
    EXPECT_EQ(e[1], std::cos(128.0));
}

TEST(SinusoidalEncode, MatchesScalarFormulaAndUnitNorm) {
    Rng rng(6);
    DistanceMap d{5, 6, 40, {}};
    for (int i = 0; i < 30; ++i) d.values.push_back(rng.uniform_int(0, 60));
    const std::size_t ch = 16;
    const Tensor e = sinusoidal_encode(d, ch);
    for (std::size_t i = 0; i < ch / 2; ++i)
        for (std::size_t p = 0; p < 30; ++p) {
            const double clipped = std::min(d.values[p], 40);
            const double arg = clipped / std::pow(10000.0, static_cast<double>(i) / ch);
            const double s = e.plane(0, 2 * i)[p], c = e.plane(0, 2 * i + 1)[p];
            EXPECT_NEAR(s, std::sin(arg), 1e-15);
            EXPECT_NEAR(c, std::cos(arg), 1e-15);
            EXPECT_NEAR(s * s + c * c, 1.0, 1e-12);
        }
}

TEST(SinusoidalEncode, OddChannelsThrow) {
    EXPECT_THROW(sinusoidal_encode(masking_distance(MaskMap(2, 2)), 7), std::invalid_argument);
}

TEST(Mpe, ZeroTableGivesDistanceEncodingOnly) {
    Rng rng(7);
    const MaskMap m = oracle::random_box_mask(256, 256, rng);
    const Tensor out = mpe(m, Tensor(Shape{4, 8}), 8, 256, 256);
    EXPECT_EQ(out.vec(), sinusoidal_encode(masking_distance(m), 8).vec());
}

TEST(Mpe, AllKnownMaskEncodesZeroDistance) {
    const Tensor out = mpe(MaskMap(64, 64), Tensor(Shape{4, 4}), 4, 64, 64);
    ASSERT_EQ(out.shape(), (Shape{1, 4, 64, 64}));
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t p = 0; p < 64 * 64; ++p) EXPECT_EQ(out.plane(0, c)[p], c % 2 ? 1.0 : 0.0);
}

TEST(Mpe, DirectionTableAddsPerActiveChannel) {
    MaskMap m(256, 256);
    m.set(100, 100, true);
    Tensor table(Shape{4, 2});
    for (std::size_t i = 0; i < 8; ++i) table[i] = static_cast<double>(i + 1);
    const Tensor out = mpe(m, table, 2, 256, 256);
    // Isolated hole: distance 1 and all four directions active.
    EXPECT_DOUBLE_EQ(out.at(0, 0, 100, 100), std::sin(1.0) + 1 + 3 + 5 + 7);
    EXPECT_DOUBLE_EQ(out.at(0, 1, 100, 100), std::cos(1.0) + 2 + 4 + 6 + 8);
    EXPECT_EQ(out.at(0, 1, 0, 0), 1.0);
}

TEST(Mpe, TargetDoubleIsNearestReplication) {
    MaskMap m(256, 256);
    for (std::size_t y = 64; y < 192; ++y)
        for (std::size_t x = 64; x < 192; ++x) m.set(y, x, true);
    Rng rng(8);
    const Tensor table = random_uniform(Shape{4, 6}, rng);
    const Tensor base = mpe(m, table, 6, 256, 256);
    const Tensor big = mpe(m, table, 6, 512, 512);
    ASSERT_EQ(big.shape(), (Shape{1, 6, 512, 512}));
    for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t y = 0; y < 512; y += 7)
            for (std::size_t x = 0; x < 512; x += 5) EXPECT_EQ(big.at(0, c, y, x), base.at(0, c, y / 2, x / 2));
}

TEST(Mpe, NonBaseMaskIsResizedToBaseFirst) {
    MaskMap small(128, 128);
    for (std::size_t y = 32; y < 96; ++y)
        for (std::size_t x = 32; x < 96; ++x) small.set(y, x, true);
    const Tensor table(Shape{4, 4});
    EXPECT_EQ(mpe(small, table, 4, 256, 256).vec(), mpe(resize_mask_nearest(small, 256, 256), table, 4, 256, 256).vec());
}

TEST(Mpe, TableShapeMismatchThrows) {
    EXPECT_THROW(mpe(MaskMap(8, 8), Tensor(Shape{3, 4}), 4, 8, 8), ShapeError);
    EXPECT_THROW(mpe(MaskMap(8, 8), Tensor(Shape{4, 6}), 4, 8, 8), ShapeError);
}
