#pragma once

// Seeded Gaussian watermark generation, non-blind additive embedding and
// extraction in the spatial domain and in the HL2/LH2 wavelet subbands, and
// the PSNR / similarity quality measures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vwm/error.hpp"
#include "vwm/motion.hpp"
#include "vwm/plane.hpp"
#include "vwm/video_io.hpp"
#include "vwm/wavelet.hpp"

namespace vwm {

enum class Domain { spatial, frequency };

inline std::string_view to_string(Domain d) noexcept { return d == Domain::spatial ? "spatial" : "frequency"; }

inline Domain parse_domain(std::string_view text) {
    if (text == "spatial") return Domain::spatial;
    if (text == "frequency") return Domain::frequency;
    throw ConfigError("unknown domain '" + std::string(text) + "' (expected spatial or frequency)");
}

namespace rng {

inline constexpr std::string_view kXorshift64Star = "xorshift64star";
inline constexpr std::string_view kMt19937_64 = "mt19937_64";
inline constexpr std::string_view kDefaultGenerator = kXorshift64Star;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Marsaglia xorshift (shifts 12, 25, 27) with Vigna's multiplicative
/// output scrambler. The state is seeded through one splitmix64 step.
class Xorshift64Star {
public:
    using result_type = std::uint64_t;
    explicit Xorshift64Star(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
    }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1DULL;
    }

private:
    std::uint64_t state_;
};

/// Uniform on the open interval (-1, 1) from the top 53 bits: the odd
/// integers in (-2^53, 2^53) scaled by 2^-53, every step exact.
inline double to_open_symmetric(std::uint64_t bits) noexcept {
    const auto k = static_cast<std::int64_t>(bits >> 11);
    return static_cast<double>(2 * k + 1 - (std::int64_t{1} << 53)) * 0x1.0p-53;
}

/// Polar Box-Muller over any 64-bit engine.
template <typename Engine>
void fill_gaussian(Engine& engine, std::span<double> out) {
    std::size_t k = 0;
    while (k < out.size()) {
        const double u = to_open_symmetric(engine());
        const double v = to_open_symmetric(engine());
        const double s = u * u + v * v;
        if (s >= 1.0 || s == 0.0) continue;
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        out[k++] = u * f;
        if (k < out.size()) out[k++] = v * f;
    }
}

}  // namespace rng

/// n x n (or rows x cols) standard-normal samples determined by
/// (generator_id, seed, shape).
struct WatermarkPattern {
    std::uint64_t seed = 0;
    std::string generator_id{rng::kDefaultGenerator};
    RealPlane samples;

    int rows() const noexcept { return samples.height(); }
    int cols() const noexcept { return samples.width(); }
    std::size_t size() const noexcept { return samples.size(); }
};

inline WatermarkPattern generate_watermark(std::uint64_t seed, int rows, int cols,
                                           std::string_view generator_id = rng::kDefaultGenerator) {
    if (rows < 1 || cols < 1)
        throw ConfigError("watermark shape must be positive, got " + std::to_string(rows) + "x" + std::to_string(cols));
    WatermarkPattern wm{seed, std::string(generator_id), RealPlane(cols, rows)};
    if (generator_id == rng::kXorshift64Star) {
        rng::Xorshift64Star engine(seed);
        rng::fill_gaussian(engine, wm.samples.samples());
    } else if (generator_id == rng::kMt19937_64) {
        std::mt19937_64 engine(seed);
        rng::fill_gaussian(engine, wm.samples.samples());
    } else {
        throw ConfigError("unknown generator_id '" + std::string(generator_id) + "'");
    }
    return wm;
}

inline WatermarkPattern generate_watermark(std::uint64_t seed, int n,
                                           std::string_view generator_id = rng::kDefaultGenerator) {
    return generate_watermark(seed, n, n, generator_id);
}

/// Blocks needed per frame: one m x m tile per block in the spatial domain,
/// eight HL2/LH2 coefficients per 8 x 8 block in the frequency domain.
inline std::size_t blocks_required(Domain domain, std::size_t samples, int block_size) {
    if (domain == Domain::spatial) return samples / (static_cast<std::size_t>(block_size) * block_size);
    return samples / 8;
}

namespace detail {

inline constexpr int kFrequencyBlockSize = 8;
inline constexpr int kFrequencyLevels = 2;
inline constexpr std::size_t kCoefficientsPerBlock = 8;

inline void check_blocks(const RealPlane& luma, std::span<const motion::BlockCoord> blocks, int m) {
    std::set<motion::BlockCoord> seen;
    for (const auto& b : blocks) {
        if (b.grid_i < 0 || b.grid_j < 0 || (b.grid_i + 1) * m > luma.height() || (b.grid_j + 1) * m > luma.width())
            throw ShapeError("block (" + std::to_string(b.grid_i) + "," + std::to_string(b.grid_j) +
                             ") lies outside the " + std::to_string(luma.width()) + "x" +
                             std::to_string(luma.height()) + " frame");
        if (!seen.insert(b).second)
            throw ConfigError("block (" + std::to_string(b.grid_i) + "," + std::to_string(b.grid_j) +
                              ") is listed twice");
    }
}

inline void check_spatial_capacity(int rows, int cols, std::size_t block_count, int m) {
    if (m < 1) throw ConfigError("block size must be >= 1");
    if (rows % m != 0 || cols % m != 0)
        throw CapacityError("watermark " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " does not tile into " + std::to_string(m) + "x" + std::to_string(m) + " blocks");
    const std::size_t need = blocks_required(Domain::spatial, static_cast<std::size_t>(rows) * cols, m);
    if (block_count != need)
        throw CapacityError("spatial embedding needs " + std::to_string(need) + " blocks, got " +
                            std::to_string(block_count));
}

inline void check_frequency_capacity(std::size_t samples, std::size_t block_count, int m) {
    if (m != kFrequencyBlockSize)
        throw ConfigError("frequency embedding requires block size 8, got " + std::to_string(m));
    if (samples % kCoefficientsPerBlock != 0)
        throw CapacityError("watermark size " + std::to_string(samples) + " is not a multiple of 8");
    if (block_count != samples / kCoefficientsPerBlock)
        throw CapacityError("frequency embedding needs " + std::to_string(samples / kCoefficientsPerBlock) +
                            " blocks, got " + std::to_string(block_count));
}

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0, got " + std::to_string(alpha));
}

inline RealPlane copy_block(const RealPlane& luma, int x0, int y0, int m) {
    RealPlane b(m, m);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) b.at(x, y) = luma.at(x0 + x, y0 + y);
    return b;
}

inline void paste_block(RealPlane& luma, const RealPlane& b, int x0, int y0) {
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x) luma.at(x0 + x, y0 + y) = b.at(x, y);
}

// Tile k of a rows x cols pattern cut into m x m tiles, raster order.
inline std::pair<int, int> tile_origin(std::size_t k, int cols, int m) {
    const int per_row = cols / m;
    return {static_cast<int>(k % per_row) * m, static_cast<int>(k / per_row) * m};
}

template <typename Visit>
void for_each_embedding_coefficient(wavelet::SubbandPyramid& pyr, Visit visit) {
    for (const auto band : {wavelet::Band::HL2, wavelet::Band::LH2}) {
        auto view = pyr.view(band);
        for (std::size_t k = 0; k < view.size(); ++k) visit(view[k]);
    }
}

}  // namespace detail

/// Frame-space description of one embedded frame.
struct EmbeddedFrame {
    std::size_t index = 0;
    std::vector<motion::BlockCoord> blocks;  // selection order
    friend bool operator==(const EmbeddedFrame&, const EmbeddedFrame&) = default;
};

/// Everything extraction needs besides the original and suspect videos.
struct EmbedManifest {
    static constexpr int kVersion = 1;

    int version = kVersion;
    std::string generator_id{rng::kDefaultGenerator};
    std::uint64_t seed = 0;
    Domain domain = Domain::frequency;
    double alpha = 0.1;
    int block_size = 8;
    int wm_rows = 32;
    int wm_side = 32;  // columns
    double threshold = 4.0;
    int range = 7;
    int width = 0;
    int height = 0;
    std::vector<EmbeddedFrame> frames;
    std::vector<std::size_t> skipped;

    const EmbeddedFrame* entry(std::size_t frame_index) const noexcept {
        const auto it = std::find_if(frames.begin(), frames.end(),
                                     [&](const EmbeddedFrame& e) { return e.index == frame_index; });
        return it == frames.end() ? nullptr : &*it;
    }

    WatermarkPattern regenerate_watermark() const { return generate_watermark(seed, wm_rows, wm_side, generator_id); }

    friend bool operator==(const EmbedManifest&, const EmbedManifest&) = default;
};

/// I_w = I + alpha * W on the luma of each selected block; tile k of W goes
/// to block k.
inline Frame embed_spatial(Frame frame, const WatermarkPattern& wm, std::span<const motion::BlockCoord> blocks,
                           int block_size, double alpha) {
    detail::check_alpha(alpha);
    detail::check_spatial_capacity(wm.rows(), wm.cols(), blocks.size(), block_size);
    detail::check_blocks(frame.luma, blocks, block_size);
    const int m = block_size;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto [tx, ty] = detail::tile_origin(k, wm.cols(), m);
        const int fx = blocks[k].grid_j * m;
        const int fy = blocks[k].grid_i * m;
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x) frame.luma.at(fx + x, fy + y) += alpha * wm.samples.at(tx + x, ty + y);
    }
    return frame;
}

/// W* = (suspect - original) / alpha per block, reassembled tile by tile.
inline RealPlane extract_spatial(const Frame& original, const Frame& suspect, std::span<const motion::BlockCoord> blocks,
                                 int block_size, double alpha, int rows, int cols) {
    detail::check_alpha(alpha);
    if (!original.luma.same_shape(suspect.luma)) throw ShapeError("original and suspect frames differ in size");
    detail::check_spatial_capacity(rows, cols, blocks.size(), block_size);
    detail::check_blocks(original.luma, blocks, block_size);
    const int m = block_size;
    RealPlane out(cols, rows);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto [tx, ty] = detail::tile_origin(k, cols, m);
        const int fx = blocks[k].grid_j * m;
        const int fy = blocks[k].grid_i * m;
        for (int y = 0; y < m; ++y)
            for (int x = 0; x < m; ++x)
                out.at(tx + x, ty + y) = (suspect.luma.at(fx + x, fy + y) - original.luma.at(fx + x, fy + y)) / alpha;
    }
    return out;
}

/// Adds alpha * (next 8 watermark samples) to HL2 then LH2 of each selected
/// block's 2-level decomposition and writes the reconstruction back.
inline Frame embed_frequency(Frame frame, const WatermarkPattern& wm, std::span<const motion::BlockCoord> blocks,
                             int block_size, double alpha) {
    detail::check_alpha(alpha);
    detail::check_frequency_capacity(wm.size(), blocks.size(), block_size);
    detail::check_blocks(frame.luma, blocks, block_size);
    const int m = block_size;
    const auto w = wm.samples.samples();
    std::size_t next = 0;
    for (const auto& b : blocks) {
        auto pyr = wavelet::fwt2d_block(detail::copy_block(frame.luma, b.grid_j * m, b.grid_i * m, m),
                                        detail::kFrequencyLevels);
        detail::for_each_embedding_coefficient(pyr, [&](double& c) { c += alpha * w[next++]; });
        detail::paste_block(frame.luma, wavelet::iwt2d_block(pyr), b.grid_j * m, b.grid_i * m);
    }
    return frame;
}

inline RealPlane extract_frequency(const Frame& original, const Frame& suspect,
                                   std::span<const motion::BlockCoord> blocks, int block_size, double alpha, int rows,
                                   int cols) {
    detail::check_alpha(alpha);
    if (!original.luma.same_shape(suspect.luma)) throw ShapeError("original and suspect frames differ in size");
    if (rows < 1 || cols < 1) throw ShapeError("watermark shape must be positive");
    detail::check_frequency_capacity(static_cast<std::size_t>(rows) * cols, blocks.size(), block_size);
    detail::check_blocks(original.luma, blocks, block_size);
    const int m = block_size;
    RealPlane out(cols, rows);
    auto w = out.samples();
    std::size_t next = 0;
    for (const auto& b : blocks) {
        auto po = wavelet::fwt2d_block(detail::copy_block(original.luma, b.grid_j * m, b.grid_i * m, m),
                                       detail::kFrequencyLevels);
        auto ps = wavelet::fwt2d_block(detail::copy_block(suspect.luma, b.grid_j * m, b.grid_i * m, m),
                                       detail::kFrequencyLevels);
        std::vector<double> orig_coeffs;
        detail::for_each_embedding_coefficient(po, [&](double& c) { orig_coeffs.push_back(c); });
        std::size_t k = 0;
        detail::for_each_embedding_coefficient(ps, [&](double& c) { w[next++] = (c - orig_coeffs[k++]) / alpha; });
    }
    return out;
}

inline Frame embed(Domain domain, Frame frame, const WatermarkPattern& wm, std::span<const motion::BlockCoord> blocks,
                   int block_size, double alpha) {
    return domain == Domain::spatial ? embed_spatial(std::move(frame), wm, blocks, block_size, alpha)
                                     : embed_frequency(std::move(frame), wm, blocks, block_size, alpha);
}

/// Extracts from one frame using the manifest entry for `original.index`.
inline RealPlane extract(const Frame& original, const Frame& suspect, const EmbedManifest& manifest) {
    const EmbeddedFrame* e = manifest.entry(original.index);
    if (!e) throw IntegrityError("manifest has no entry for frame " + std::to_string(original.index));
    return manifest.domain == Domain::spatial
               ? extract_spatial(original, suspect, e->blocks, manifest.block_size, manifest.alpha, manifest.wm_rows,
                                 manifest.wm_side)
               : extract_frequency(original, suspect, e->blocks, manifest.block_size, manifest.alpha,
                                   manifest.wm_rows, manifest.wm_side);
}

inline RealPlane extract_spatial(const Frame& original, const Frame& suspect, const EmbedManifest& manifest) {
    if (manifest.domain != Domain::spatial) throw ConfigError("manifest describes a frequency-domain embedding");
    return extract(original, suspect, manifest);
}

inline RealPlane extract_frequency(const Frame& original, const Frame& suspect, const EmbedManifest& manifest) {
    if (manifest.domain != Domain::frequency) throw ConfigError("manifest describes a spatial-domain embedding");
    return extract(original, suspect, manifest);
}

/// Returned by `psnr` when the inputs are identical.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// 10 log10(N max(I)^2 / sum (I - I_w)^2) with max(I) taken over the
/// original region and N its sample count.
inline double psnr(std::span<const double> original, std::span<const double> modified) {
    if (original.size() != modified.size())
        throw ShapeError("psnr: " + std::to_string(original.size()) + " vs " + std::to_string(modified.size()) +
                         " samples");
    if (original.empty()) throw ShapeError("psnr: empty region");
    const double peak = *std::max_element(original.begin(), original.end());
    if (!(peak > 0.0)) throw DomainError("psnr: original region has no positive peak");
    double sse = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double d = original[i] - modified[i];
        sse += d * d;
    }
    if (sse == 0.0) return kInfinitePsnr;
    return 10.0 * std::log10(static_cast<double>(original.size()) * peak * peak / sse);
}

inline double psnr(const RealPlane& original, const RealPlane& modified) {
    if (!original.same_shape(modified)) throw ShapeError("psnr: plane shapes differ");
    return psnr(original.samples(), modified.samples());
}

inline double psnr(const Frame& original, const Frame& modified) { return psnr(original.luma, modified.luma); }

/// Cosine of the angle between the flattened matrices.
inline double similarity(std::span<const double> w_star, std::span<const double> w) {
    if (w_star.size() != w.size())
        throw ShapeError("similarity: " + std::to_string(w_star.size()) + " vs " + std::to_string(w.size()) +
                         " samples");
    const double dot = std::inner_product(w_star.begin(), w_star.end(), w.begin(), 0.0);
    const double n1 = std::sqrt(std::inner_product(w_star.begin(), w_star.end(), w_star.begin(), 0.0));
    const double n2 = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (n1 == 0.0 || n2 == 0.0) throw DomainError("similarity: zero-norm input");
    return std::clamp(dot / (n1 * n2), -1.0, 1.0);
}

inline double similarity(const RealPlane& w_star, const WatermarkPattern& w) {
    if (!w_star.same_shape(w.samples)) throw ShapeError("similarity: matrix shapes differ");
    return similarity(w_star.samples(), w.samples.samples());
}

}  // namespace vwm
