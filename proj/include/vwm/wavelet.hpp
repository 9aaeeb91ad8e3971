#pragma once

// CDF 9/7 biorthogonal wavelet via lifting, with whole-sample symmetric
// boundary extension, and a multi-level 2D decomposition of square blocks
// stored in Mallat layout.
//
// Normalization: approximation samples are scaled by K and detail samples by
// 1/K after the lifting ladder, which makes the lowpass DC gain sqrt(2).

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vwm/error.hpp"
#include "vwm/plane.hpp"

namespace vwm::wavelet {

namespace lifting {
inline constexpr double kPredict1 = -1.586134342059924;
inline constexpr double kUpdate1 = -0.052980118572961;
inline constexpr double kPredict2 = 0.882911075530934;
inline constexpr double kUpdate2 = 0.443506852043971;
inline constexpr double kScale = 1.149604398860241;
}  // namespace lifting

namespace detail {

// In-place lifting on an interleaved signal of even length n, accessed with
// stride. Even positions end as approximation, odd as detail.
template <typename Access>
void lift_forward(Access x, int n) {
    const auto step = [&](double coeff, int parity) {
        for (int i = parity; i < n; i += 2) x(i) += coeff * (x(mirror_index(i - 1, n)) + x(mirror_index(i + 1, n)));
    };
    step(lifting::kPredict1, 1);
    step(lifting::kUpdate1, 0);
    step(lifting::kPredict2, 1);
    step(lifting::kUpdate2, 0);
    for (int i = 0; i < n; ++i) x(i) = (i % 2 == 0) ? x(i) * lifting::kScale : x(i) / lifting::kScale;
}

template <typename Access>
void lift_inverse(Access x, int n) {
    for (int i = 0; i < n; ++i) x(i) = (i % 2 == 0) ? x(i) / lifting::kScale : x(i) * lifting::kScale;
    const auto step = [&](double coeff, int parity) {
        for (int i = parity; i < n; i += 2) x(i) -= coeff * (x(mirror_index(i - 1, n)) + x(mirror_index(i + 1, n)));
    };
    step(lifting::kUpdate2, 0);
    step(lifting::kPredict2, 1);
    step(lifting::kUpdate1, 0);
    step(lifting::kPredict1, 1);
}

// Forward 1D transform of `n` samples reached through `at(i)`; result is
// written back packed as [approx | detail].
template <typename Access>
void analyze(Access at, int n, std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) scratch[i] = at(i);
    lift_forward([&](int i) -> double& { return scratch[i]; }, n);
    for (int i = 0; i < n / 2; ++i) {
        at(i) = scratch[2 * i];
        at(n / 2 + i) = scratch[2 * i + 1];
    }
}

template <typename Access>
void synthesize(Access at, int n, std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n / 2; ++i) {
        scratch[2 * i] = at(i);
        scratch[2 * i + 1] = at(n / 2 + i);
    }
    lift_inverse([&](int i) -> double& { return scratch[i]; }, n);
    for (int i = 0; i < n; ++i) at(i) = scratch[i];
}

}  // namespace detail

struct Decomposition1D {
    std::vector<double> approx;
    std::vector<double> detail;
};

inline Decomposition1D fwt97_1d(std::span<const double> signal) {
    const auto n = signal.size();
    if (n < 2 || n % 2 != 0)
        throw ShapeError("fwt97_1d needs an even length >= 2, got " + std::to_string(n));
    std::vector<double> x(signal.begin(), signal.end());
    detail::lift_forward([&](int i) -> double& { return x[i]; }, static_cast<int>(n));
    Decomposition1D out;
    out.approx.reserve(n / 2);
    out.detail.reserve(n / 2);
    for (std::size_t i = 0; i < n; i += 2) {
        out.approx.push_back(x[i]);
        out.detail.push_back(x[i + 1]);
    }
    return out;
}

inline std::vector<double> iwt97_1d(std::span<const double> approx, std::span<const double> detail) {
    if (approx.size() != detail.size())
        throw ShapeError("iwt97_1d: approx has " + std::to_string(approx.size()) + " samples, detail has " +
                         std::to_string(detail.size()));
    if (approx.empty()) throw ShapeError("iwt97_1d: empty input");
    const auto n = 2 * approx.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < approx.size(); ++i) {
        x[2 * i] = approx[i];
        x[2 * i + 1] = detail[i];
    }
    detail::lift_inverse([&](int i) -> double& { return x[i]; }, static_cast<int>(n));
    return x;
}

enum class Band { LL2, HL2, LH2, HH2, HL1, LH1, HH1 };

inline constexpr std::array kAllBands{Band::LL2, Band::HL2, Band::LH2, Band::HH2,
                                      Band::HL1, Band::LH1, Band::HH1};

inline std::string_view to_string(Band b) noexcept {
    switch (b) {
        case Band::LL2: return "LL2";
        case Band::HL2: return "HL2";
        case Band::LH2: return "LH2";
        case Band::HH2: return "HH2";
        case Band::HL1: return "HL1";
        case Band::LH1: return "LH1";
        case Band::HH1: return "HH1";
    }
    return "?";
}

/// Rectangle of a subband inside the coefficient array.
struct BandRegion {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;
    friend bool operator==(const BandRegion&, const BandRegion&) = default;
};

/// Mutable window onto one subband of a pyramid. Indices are band-local.
class SubbandView {
public:
    SubbandView(RealPlane& coefficients, BandRegion region) : coeffs_(&coefficients), region_(region) {}

    int rows() const noexcept { return region_.rows; }
    int cols() const noexcept { return region_.cols; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(region_.rows) * region_.cols; }
    const BandRegion& region() const noexcept { return region_; }

    double& operator()(int r, int c) noexcept { return coeffs_->at(region_.col0 + c, region_.row0 + r); }
    double operator()(int r, int c) const noexcept { return coeffs_->at(region_.col0 + c, region_.row0 + r); }

    /// k-th coefficient in raster order.
    double& operator[](std::size_t k) noexcept {
        return (*this)(static_cast<int>(k) / region_.cols, static_cast<int>(k) % region_.cols);
    }
    double operator[](std::size_t k) const noexcept {
        return (*this)(static_cast<int>(k) / region_.cols, static_cast<int>(k) % region_.cols);
    }

private:
    RealPlane* coeffs_;
    BandRegion region_;
};

/// Multi-level 2D decomposition of an m x m block in Mallat layout: the
/// coarsest LL at the top-left, and at each level k (half-size s = m / 2^k)
/// HL_k at (0, s), LH_k at (s, 0), HH_k at (s, s), each s x s.
class SubbandPyramid {
public:
    SubbandPyramid(int block_size, int levels) : block_size_(block_size), levels_(levels), coeffs_(block_size, block_size) {}

    int block_size() const noexcept { return block_size_; }
    int levels() const noexcept { return levels_; }
    RealPlane& coefficients() noexcept { return coeffs_; }
    const RealPlane& coefficients() const noexcept { return coeffs_; }

    BandRegion region(Band band) const {
        const auto [kind, level] = decode(band);
        if (level > levels_ || (kind == 'L' && level != levels_))
            throw DomainError("band " + std::string(to_string(band)) + " does not exist in a " +
                              std::to_string(levels_) + "-level pyramid");
        const int s = block_size_ >> level;
        switch (kind) {
            case 'L': return {0, 0, s, s};
            case 'h': return {0, s, s, s};  // HL
            case 'v': return {s, 0, s, s};  // LH
            default: return {s, s, s, s};   // HH
        }
    }

    SubbandView view(Band band) { return {coeffs_, region(band)}; }

private:
    static std::pair<char, int> decode(Band band) {
        switch (band) {
            case Band::LL2: return {'L', 2};
            case Band::HL2: return {'h', 2};
            case Band::LH2: return {'v', 2};
            case Band::HH2: return {'d', 2};
            case Band::HL1: return {'h', 1};
            case Band::LH1: return {'v', 1};
            case Band::HH1: return {'d', 1};
        }
        throw DomainError("invalid band tag " + std::to_string(static_cast<int>(band)));
    }

    int block_size_;
    int levels_;
    RealPlane coeffs_;
};

/// Rows then columns at each level, recursing on the LL quadrant.
inline SubbandPyramid fwt2d_block(const RealPlane& block, int levels) {
    const int m = block.width();
    if (block.height() != m) throw ShapeError("fwt2d_block needs a square block");
    if (levels < 1) throw ShapeError("fwt2d_block needs levels >= 1");
    if (m <= 0 || m % (1 << levels) != 0)
        throw ShapeError("block size " + std::to_string(m) + " is not divisible by 2^" + std::to_string(levels));
    SubbandPyramid pyr(m, levels);
    RealPlane& c = pyr.coefficients();
    c = block;
    std::vector<double> scratch;
    for (int level = 0, n = m; level < levels; ++level, n /= 2) {
        for (int y = 0; y < n; ++y) detail::analyze([&](int i) -> double& { return c.at(i, y); }, n, scratch);
        for (int x = 0; x < n; ++x) detail::analyze([&](int i) -> double& { return c.at(x, i); }, n, scratch);
    }
    return pyr;
}

inline RealPlane iwt2d_block(const SubbandPyramid& pyramid) {
    RealPlane c = pyramid.coefficients();
    std::vector<double> scratch;
    for (int level = pyramid.levels() - 1; level >= 0; --level) {
        const int n = pyramid.block_size() >> level;
        for (int x = 0; x < n; ++x) detail::synthesize([&](int i) -> double& { return c.at(x, i); }, n, scratch);
        for (int y = 0; y < n; ++y) detail::synthesize([&](int i) -> double& { return c.at(i, y); }, n, scratch);
    }
    return c;
}

inline SubbandView subband_view(SubbandPyramid& pyramid, Band band) { return pyramid.view(band); }

}  // namespace vwm::wavelet
