#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "vwm/attacks.hpp"
#include "vwm/watermark.hpp"

using namespace vwm;
using motion::BlockCoord;

namespace {

// Frozen output of the quantization round trip below.
constexpr double kQuantRegression = 0.906719247022329;

Frame textured(int w = 64, int h = 64, std::uint64_t seed = 1) {
    Frame f = Frame::blank(w, h, ChromaLayout::k420, 0.0, 5);
    std::mt19937_64 rng(seed);
    f.luma = oracle::random_plane(rng, w, h, 16.0, 235.0);
    for (auto& s : f.chroma_b.samples()) s = 7.0;
    for (auto& s : f.chroma_r.samples()) s = -3.0;
    return f;
}

std::vector<BlockCoord> first_blocks(std::size_t n, int cols) {
    std::vector<BlockCoord> b;
    for (std::size_t k = 0; k < n; ++k) b.push_back({static_cast<int>(k) / cols, static_cast<int>(k) % cols});
    return b;
}

double max_abs_diff(const RealPlane& a, const RealPlane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a.samples()[i] - b.samples()[i]));
    return m;
}

}  // namespace

TEST(GeneratorTest, ShapeAndDeterminism) {
    const auto a = generate_watermark(7, 32);
    const auto b = generate_watermark(7, 32);
    EXPECT_EQ(a.size(), 1024u);
    EXPECT_EQ(a.rows(), 32);
    EXPECT_EQ(a.cols(), 32);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_NE(a.samples, generate_watermark(8, 32).samples);
    EXPECT_NE(a.samples, generate_watermark(7, 32, rng::kMt19937_64).samples);
}

TEST(GeneratorTest, StandardNormalMoments) {
    for (const auto id : {rng::kXorshift64Star, rng::kMt19937_64}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto w = generate_watermark(seed, 32, 32, id);
            const auto m = oracle::moments({w.samples.samples().begin(), w.samples.samples().end()});
            // 1024 samples: sd of the mean ~0.031, of the variance ~0.044.
            EXPECT_LT(std::fabs(m.mean), 0.15) << id << " seed " << seed;
            EXPECT_GT(m.variance, 0.8) << id << " seed " << seed;
            EXPECT_LT(m.variance, 1.2) << id << " seed " << seed;
            EXPECT_NEAR(m.positives, 512, 64) << id << " seed " << seed;
        }
    }
}

TEST(GeneratorTest, OpenIntervalMapping) {
    EXPECT_GT(rng::to_open_symmetric(0), -1.0);
    EXPECT_LT(rng::to_open_symmetric(~std::uint64_t{0}), 1.0);
    EXPECT_DOUBLE_EQ(rng::to_open_symmetric(0), -1.0 + 0x1.0p-53);
    EXPECT_DOUBLE_EQ(rng::to_open_symmetric(~std::uint64_t{0}), 1.0 - 0x1.0p-53);
    EXPECT_DOUBLE_EQ(rng::to_open_symmetric(std::uint64_t{1} << 63), 0x1.0p-53);
}

TEST(GeneratorTest, UnknownGeneratorIsConfigError) {
    EXPECT_THROW(generate_watermark(1, 32, 32, "lcg"), ConfigError);
    EXPECT_THROW(generate_watermark(1, 0, 32), ConfigError);
}

TEST(GeneratorTest, RectangularMode) {
    const auto w = generate_watermark(3, 16, 32);
    EXPECT_EQ(w.size(), 512u);
    EXPECT_EQ(blocks_required(Domain::spatial, w.size(), 8), 8u);
    EXPECT_EQ(blocks_required(Domain::frequency, w.size(), 8), 64u);
    EXPECT_EQ(blocks_required(Domain::spatial, 1024, 8), 16u);
    EXPECT_EQ(blocks_required(Domain::frequency, 1024, 8), 128u);
}

TEST(SpatialTest, AddsScaledPatternSample) {
    Frame f = Frame::blank(32, 32, ChromaLayout::k420, 100.0);
    WatermarkPattern wm{0, std::string(rng::kDefaultGenerator), RealPlane(32, 32, 2.0)};
    const auto blocks = first_blocks(16, 4);
    const Frame out = embed_spatial(f, wm, blocks, 8, 0.1);
    for (double v : out.luma.samples()) EXPECT_DOUBLE_EQ(v, 100.2);
}

TEST(SpatialTest, TileOrderFollowsBlockOrder) {
    const Frame f = Frame::blank(64, 64, ChromaLayout::k420, 0.0);
    const auto wm = generate_watermark(11, 16, 16);
    const std::vector<BlockCoord> blocks{{7, 7}, {0, 3}, {5, 1}, {2, 6}};
    const Frame out = embed_spatial(f, wm, blocks, 8, 1.0);
    // Tile k = (k / 2, k % 2) in tile units of W lands on blocks[k].
    for (std::size_t k = 0; k < blocks.size(); ++k)
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                EXPECT_EQ(out.luma.at(blocks[k].grid_j * 8 + x, blocks[k].grid_i * 8 + y),
                          wm.samples.at(static_cast<int>(k % 2) * 8 + x, static_cast<int>(k / 2) * 8 + y));
}

TEST(SpatialTest, ZeroPatternLeavesFrameUnchanged) {
    const Frame f = textured();
    WatermarkPattern wm{0, std::string(rng::kDefaultGenerator), RealPlane(32, 32, 0.0)};
    const Frame out = embed_spatial(f, wm, first_blocks(16, 8), 8, 0.1);
    EXPECT_EQ(out.luma, f.luma);
}

TEST(FrequencyTest, ZeroPatternLeavesFrameNumericallyUnchanged) {
    const Frame f = textured();
    WatermarkPattern wm{0, std::string(rng::kDefaultGenerator), RealPlane(32, 16, 0.0)};
    const Frame out = embed_frequency(f, wm, first_blocks(64, 8), 8, 0.1);
    EXPECT_LE(max_abs_diff(out.luma, f.luma), 1e-9);
}

TEST(RoundTripTest, BothDomainsRecoverPattern) {
    const Frame f = textured(128, 128);
    const auto wm = generate_watermark(21, 32);
    for (const Domain d : {Domain::spatial, Domain::frequency}) {
        const auto blocks = first_blocks(blocks_required(d, wm.size(), 8), 16);
        const Frame w = embed(d, f, wm, blocks, 8, 0.1);
        const RealPlane x = d == Domain::spatial ? extract_spatial(f, w, blocks, 8, 0.1, 32, 32)
                                                 : extract_frequency(f, w, blocks, 8, 0.1, 32, 32);
        EXPECT_LE(max_abs_diff(x, wm.samples), 1e-6) << to_string(d);
        EXPECT_GE(similarity(x, wm), 0.999999) << to_string(d);
    }
}

TEST(RoundTripTest, FrequencyEmbeddingTouchesOnlyMidBands) {
    const Frame f = textured();
    const auto blocks = first_blocks(64, 8);
    const auto wm512 = generate_watermark(4, 16, 32);
    const Frame w = embed_frequency(f, wm512, blocks, 8, 0.5);
    for (const auto& b : blocks) {
        RealPlane ob(8, 8), wb(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                ob.at(x, y) = f.luma.at(b.grid_j * 8 + x, b.grid_i * 8 + y);
                wb.at(x, y) = w.luma.at(b.grid_j * 8 + x, b.grid_i * 8 + y);
            }
        auto po = wavelet::fwt2d_block(ob, 2);
        auto pw = wavelet::fwt2d_block(wb, 2);
        for (const auto band : wavelet::kAllBands) {
            const auto vo = po.view(band);
            const auto vw = pw.view(band);
            double diff = 0.0;
            for (std::size_t k = 0; k < vo.size(); ++k) diff = std::max(diff, std::fabs(vo[k] - vw[k]));
            if (band == wavelet::Band::HL2 || band == wavelet::Band::LH2)
                EXPECT_GT(diff, 1e-3);
            else
                EXPECT_LE(diff, 1e-9) << to_string(band);
        }
    }
}

TEST(RoundTripTest, QuantizationDegradesButKeepsCorrelation) {
    const Frame f = textured(128, 128, 9);
    const auto wm = generate_watermark(5, 32);
    const auto blocks = first_blocks(16, 16);
    const Frame w = embed_spatial(f, wm, blocks, 8, 10.0);
    const Frame q = attacks::adaptive_quantize(w, 16.0, false);
    const double d = similarity(extract_spatial(f, q, blocks, 8, 10.0, 32, 32), wm);
    EXPECT_GT(d, 0.0);
    EXPECT_LT(d, 1.0);
    EXPECT_NEAR(d, kQuantRegression, 1e-9);
}

TEST(RoundTripTest, LocalityOutsideSelectedBlocks) {
    const Frame f = textured(128, 128);
    const auto wm = generate_watermark(2, 32);
    const std::vector<BlockCoord> blocks = first_blocks(128, 16);
    for (const Domain d : {Domain::spatial, Domain::frequency}) {
        const auto used = std::vector<BlockCoord>(blocks.begin(), blocks.begin() + blocks_required(d, 1024, 8));
        const std::set<BlockCoord> chosen(used.begin(), used.end());
        const Frame w = embed(d, f, wm, used, 8, 1.0);
        for (int y = 0; y < 128; ++y)
            for (int x = 0; x < 128; ++x) {
                if (!chosen.count({y / 8, x / 8})) {
                    EXPECT_EQ(w.luma.at(x, y), f.luma.at(x, y));
                }
            }
        EXPECT_EQ(w.chroma_b, f.chroma_b);
        EXPECT_EQ(w.chroma_r, f.chroma_r);
        EXPECT_EQ(w.index, f.index);
    }
}

TEST(CapacityTest, WrongBlockCountIsCapacityError) {
    const Frame f = textured();
    const auto wm = generate_watermark(1, 32);
    EXPECT_THROW(embed_spatial(f, wm, first_blocks(15, 8), 8, 0.1), CapacityError);
    EXPECT_THROW(embed_frequency(f, wm, first_blocks(64, 8), 8, 0.1), CapacityError);
}

TEST(CapacityTest, InvalidBlocksAndParameters) {
    const Frame f = textured();
    const auto wm = generate_watermark(1, 32);
    auto dup = first_blocks(16, 8);
    dup[3] = dup[2];
    EXPECT_THROW(embed_spatial(f, wm, dup, 8, 0.1), ConfigError);
    auto outside = first_blocks(16, 8);
    outside[0] = {8, 0};
    EXPECT_THROW(embed_spatial(f, wm, outside, 8, 0.1), ShapeError);
    EXPECT_THROW(embed_spatial(f, wm, first_blocks(16, 8), 8, 0.0), ConfigError);
    EXPECT_THROW(embed_spatial(f, wm, first_blocks(16, 8), 8, -1.0), ConfigError);
    EXPECT_THROW(embed_frequency(f, wm, first_blocks(64, 4), 16, 0.1), ConfigError);
}

TEST(ManifestExtractTest, MissingEntryAndWrongDomain) {
    const Frame f = textured();
    EmbedManifest m;
    m.domain = Domain::spatial;
    EXPECT_THROW(extract(f, f, m), IntegrityError);
    m.frames.push_back({f.index, first_blocks(16, 8)});
    EXPECT_THROW(extract_frequency(f, f, m), ConfigError);
    const RealPlane z = extract_spatial(f, f, m);
    for (double v : z.samples()) EXPECT_EQ(v, 0.0);
}

TEST(PsnrTest, KnownValue) {
    // Constant-255 8x8 region with one sample off by 16: 10 log10(64 * 255^2 / 256).
    const RealPlane a(8, 8, 255.0);
    RealPlane b = a;
    b.at(3, 5) = 239.0;
    EXPECT_NEAR(psnr(a, b), 42.11, 0.01);
    EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(64.0 * 255.0 * 255.0 / 256.0), 1e-12);
}

TEST(PsnrTest, IdenticalIsInfinite) {
    const Frame f = textured();
    EXPECT_EQ(psnr(f, f), kInfinitePsnr);
    EXPECT_TRUE(std::isinf(psnr(f.luma, f.luma)));
}

TEST(PsnrTest, Errors) {
    EXPECT_THROW(psnr(std::vector<double>(4, 0.0), std::vector<double>(4, 1.0)), DomainError);
    EXPECT_THROW(psnr(std::vector<double>(4, 1.0), std::vector<double>(5, 1.0)), ShapeError);
    EXPECT_THROW(psnr(std::vector<double>{}, std::vector<double>{}), ShapeError);
    EXPECT_THROW(psnr(RealPlane(4, 4, 1.0), RealPlane(2, 8, 1.0)), ShapeError);
}

TEST(PsnrTest, DecreasesWithAlpha) {
    const Frame f = textured(128, 128);
    const auto wm = generate_watermark(6, 32);
    for (const Domain d : {Domain::spatial, Domain::frequency}) {
        const auto blocks = first_blocks(blocks_required(d, 1024, 8), 16);
        double prev = kInfinitePsnr;
        for (double alpha : {0.05, 0.1, 0.5, 1.0, 5.0}) {
            const double p = psnr(f, embed(d, f, wm, blocks, 8, alpha));
            EXPECT_LT(p, prev) << to_string(d) << " alpha " << alpha;
            prev = p;
        }
    }
}

TEST(SimilarityTest, IdentityOppositeAndScale) {
    const auto wm = generate_watermark(12, 32);
    EXPECT_NEAR(similarity(wm.samples, wm), 1.0, 1e-12);
    RealPlane neg = wm.samples;
    for (auto& s : neg.samples()) s = -s;
    EXPECT_NEAR(similarity(neg, wm), -1.0, 1e-12);
    RealPlane scaled = wm.samples;
    for (auto& s : scaled.samples()) s *= 37.5;
    EXPECT_NEAR(similarity(scaled, wm), 1.0, 1e-12);
}

TEST(SimilarityTest, MatchesDirectCosine) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<double> a(100), b(100);
    double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 100; ++i) {
        a[i] = n(rng);
        b[i] = n(rng) + 0.5 * a[i];
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    EXPECT_NEAR(similarity(a, b), dot / std::sqrt(na * nb), 1e-12);
}

TEST(SimilarityTest, ZeroNormAndShapeErrors) {
    const auto wm = generate_watermark(1, 32);
    EXPECT_THROW(similarity(RealPlane(32, 32, 0.0), wm), DomainError);
    EXPECT_THROW(similarity(RealPlane(16, 16, 1.0), wm), ShapeError);
}
