#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "vwm/wavelet.hpp"

using namespace vwm;
using namespace vwm::wavelet;

namespace {

double max_abs_diff(const RealPlane& a, const RealPlane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.samples()[i] - b.samples()[i]));
    return m;
}

RealPlane block_from(std::mt19937_64& rng, int m = 8) { return oracle::random_plane(rng, m, m); }

}  // namespace

TEST(Fwt97Test, ConstantSignalHasNoDetail) {
    const std::vector<double> x(8, 5.0);
    const auto d = fwt97_1d(x);
    for (double v : d.detail) EXPECT_NEAR(v, 0.0, 1e-9);
    // DC gain sqrt(2).
    for (double v : d.approx) EXPECT_NEAR(v, 5.0 * std::sqrt(2.0), 1e-9);
}

TEST(Fwt97Test, RampHasNoDetailInInterior) {
    std::vector<double> x(8);
    for (int i = 0; i < 8; ++i) x[i] = i;
    const auto d = fwt97_1d(x);
    // Mirrored extension folds the ramp at both ends; only detail[1], whose
    // support (samples 0..6) stays inside, sees a pure line.
    EXPECT_NEAR(d.detail[1], 0.0, 1e-9);
    EXPECT_GT(std::fabs(d.detail[3]), 1e-3);
    const auto back = iwt97_1d(d.approx, d.detail);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(back[i], i, 1e-9);
}

TEST(Fwt97Test, MatchesFilterBankConvolution) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    for (int n : {2, 4, 8, 16, 32}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(n);
            for (auto& v : x) v = u(rng);
            const auto lifted = fwt97_1d(x);
            const auto [a, d] = oracle::convolve_97(x);
            for (int i = 0; i < n / 2; ++i) {
                EXPECT_NEAR(lifted.approx[i], a[i], 1e-8) << "n=" << n;
                EXPECT_NEAR(lifted.detail[i], d[i], 1e-8) << "n=" << n;
            }
        }
    }
}

TEST(Fwt97Test, OddOrShortLengthIsShapeError) {
    EXPECT_THROW(fwt97_1d(std::vector<double>(7, 1.0)), ShapeError);
    EXPECT_THROW(fwt97_1d(std::vector<double>(1, 1.0)), ShapeError);
    EXPECT_THROW(fwt97_1d(std::vector<double>{}), ShapeError);
}

TEST(Iwt97Test, InvertsForward) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int n : {2, 4, 8, 64}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        const auto d = fwt97_1d(x);
        const auto back = iwt97_1d(d.approx, d.detail);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(back[i], x[i], 1e-9);
    }
}

TEST(Iwt97Test, ConstantApproxZeroDetailGivesConstant) {
    // Forward of constant c has approx c*sqrt(2) and zero detail.
    const std::vector<double> a(4, 3.0 * std::sqrt(2.0)), d(4, 0.0);
    for (double v : iwt97_1d(a, d)) EXPECT_NEAR(v, 3.0, 1e-12);
}

TEST(Iwt97Test, LengthMismatchIsShapeError) {
    EXPECT_THROW(iwt97_1d(std::vector<double>(4), std::vector<double>(3)), ShapeError);
}

TEST(Fwt2dTest, ConstantBlockHasOnlyLowpass) {
    RealPlane b(8, 8, 42.0);
    auto pyr = fwt2d_block(b, 2);
    for (const Band band : kAllBands) {
        if (band == Band::LL2) continue;
        auto v = pyr.view(band);
        for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], 0.0, 1e-9) << to_string(band);
    }
    // Gain 2 per 2D level.
    auto ll = pyr.view(Band::LL2);
    for (std::size_t k = 0; k < ll.size(); ++k) EXPECT_NEAR(ll[k], 4.0 * 42.0, 1e-9);
}

TEST(Fwt2dTest, FirstLevelMatchesSeparableFilterBank) {
    std::mt19937_64 rng(5);
    const RealPlane b = block_from(rng);
    std::vector<std::vector<double>> rows(8, std::vector<double>(8));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) rows[y][x] = b.at(x, y);
    const auto level1 = oracle::convolve_97_2d(rows, 8);
    auto expected = oracle::convolve_97_2d(level1, 4);  // acts on the top-left 4x4 only
    const auto pyr = fwt2d_block(b, 2);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double want = (x < 4 && y < 4) ? expected[y][x] : level1[y][x];
            EXPECT_NEAR(pyr.coefficients().at(x, y), want, 1e-8) << x << "," << y;
        }
}

TEST(Fwt2dTest, RoundTripAndLinearity) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const RealPlane x = block_from(rng);
        const RealPlane y = block_from(rng);
        EXPECT_LE(max_abs_diff(iwt2d_block(fwt2d_block(x, 2)), x), 1e-9);
        RealPlane mix(8, 8);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.samples()[i] = 0.7 * x.samples()[i] - 2.5 * y.samples()[i];
        const auto fx = fwt2d_block(x, 2);
        const auto fy = fwt2d_block(y, 2);
        const auto fm = fwt2d_block(mix, 2);
        for (std::size_t i = 0; i < mix.size(); ++i)
            EXPECT_NEAR(fm.coefficients().samples()[i],
                        0.7 * fx.coefficients().samples()[i] - 2.5 * fy.coefficients().samples()[i], 1e-9);
    }
}

TEST(Fwt2dTest, OtherSizesAndLevels) {
    std::mt19937_64 rng(13);
    for (auto [m, levels] : {std::pair{4, 1}, {4, 2}, {16, 2}, {16, 3}, {32, 4}}) {
        const RealPlane b = block_from(rng, m);
        EXPECT_LE(max_abs_diff(iwt2d_block(fwt2d_block(b, levels)), b), 1e-9) << m << "/" << levels;
    }
}

TEST(Fwt2dTest, IndivisibleSizeIsShapeError) {
    EXPECT_THROW(fwt2d_block(RealPlane(6, 6), 2), ShapeError);
    EXPECT_THROW(fwt2d_block(RealPlane(8, 4), 1), ShapeError);
    EXPECT_THROW(fwt2d_block(RealPlane(8, 8), 0), ShapeError);
}

TEST(Iwt2dTest, LowpassOnlyPyramidGivesSmoothBlock) {
    SubbandPyramid pyr(8, 2);
    auto ll = pyr.view(Band::LL2);
    for (std::size_t k = 0; k < ll.size(); ++k) ll[k] = 4.0 * 17.0;
    const RealPlane b = iwt2d_block(pyr);
    for (double v : b.samples()) EXPECT_NEAR(v, 17.0, 1e-9);
}

TEST(Iwt2dTest, ZeroPyramidGivesZeroBlock) {
    const RealPlane b = iwt2d_block(SubbandPyramid(8, 2));
    for (double v : b.samples()) EXPECT_EQ(v, 0.0);
}

TEST(SubbandTest, RegionSizes) {
    SubbandPyramid pyr(8, 2);
    EXPECT_EQ(pyr.region(Band::HL2), (BandRegion{0, 2, 2, 2}));
    EXPECT_EQ(pyr.region(Band::LH2), (BandRegion{2, 0, 2, 2}));
    EXPECT_EQ(pyr.region(Band::HL1), (BandRegion{0, 4, 4, 4}));
    EXPECT_EQ(pyr.view(Band::HL2).size(), 4u);
    EXPECT_EQ(pyr.view(Band::HL1).size(), 16u);
}

TEST(SubbandTest, BandsPartitionTheBlock) {
    SubbandPyramid pyr(8, 2);
    std::set<std::pair<int, int>> seen;
    for (const Band band : kAllBands) {
        const BandRegion r = pyr.region(band);
        for (int y = r.row0; y < r.row0 + r.rows; ++y)
            for (int x = r.col0; x < r.col0 + r.cols; ++x) EXPECT_TRUE(seen.insert({x, y}).second) << to_string(band);
    }
    EXPECT_EQ(seen.size(), 64u);
}

TEST(SubbandTest, WritesThroughViewTouchExactlyTheBand) {
    SubbandPyramid pyr(8, 2);
    auto hl2 = subband_view(pyr, Band::HL2);
    for (std::size_t k = 0; k < hl2.size(); ++k) hl2[k] = 1.0;
    int changed = 0;
    for (double v : pyr.coefficients().samples()) changed += v != 0.0;
    EXPECT_EQ(changed, 4);
    EXPECT_EQ(pyr.coefficients().at(2, 0), 1.0);
    EXPECT_EQ(pyr.coefficients().at(3, 1), 1.0);
}

TEST(SubbandTest, InvalidBandIsDomainError) {
    SubbandPyramid one(8, 1);
    EXPECT_THROW(one.region(Band::HL2), DomainError);
    EXPECT_THROW(one.region(Band::LL2), DomainError);
    SubbandPyramid two(8, 2);
    EXPECT_THROW(two.region(static_cast<Band>(42)), DomainError);
}

// 1,000 random blocks, max-abs error and a loose timing bound.
TEST(WaveletPropertyTest, PerfectReconstructionOnRandomBlocks) {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
        const RealPlane b = block_from(rng);
        worst = std::max(worst, max_abs_diff(iwt2d_block(fwt2d_block(b, 2)), b));
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LE(worst, 1e-9);
    EXPECT_LT(elapsed, 1.0);
}

TEST(WaveletPropertyTest, LinearBlocksHaveNoInteriorDetail) {
    // Mirrored borders fold a ramp into a tent, so only detail samples whose
    // 7-tap support stays inside the block are annihilated: position 1 of 4
    // in an 8-sample row, i.e. column 5 / row 5 of the first level.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = u(rng) * 10, b = u(rng), c = u(rng);
        RealPlane blk(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) blk.at(x, y) = a + b * x + c * y;
        const auto pyr = fwt2d_block(blk, 2);
        for (int k = 0; k < 8; ++k) {
            EXPECT_LE(std::fabs(pyr.coefficients().at(5, k)), 1e-9);
            EXPECT_LE(std::fabs(pyr.coefficients().at(k, 5)), 1e-9);
        }
    }
}
