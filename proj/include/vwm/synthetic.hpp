#pragma once

// Deterministic synthetic clips used by the tests, the acceptance suite and
// `vwm synth`. Every clip has integral 8-bit samples, so it survives a Y4M
// write/read unchanged, and enough non-translational change between frames
// to yield motion blocks at the default threshold.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "vwm/error.hpp"
#include "vwm/video_io.hpp"

namespace vwm::synthetic {

struct ClipSize {
    int width = 128;
    int height = 128;
    int frames = 30;
    /// Round luma to integers (as an 8-bit file would); off keeps the exact
    /// real-valued rendering.
    bool quantize = true;
};

namespace detail {

template <typename LumaFn>
FrameSequence render(std::string name, const ClipSize& size, LumaFn luma) {
    if (size.width <= 0 || size.height <= 0 || size.frames <= 0) throw ConfigError("clip size must be positive");
    FrameSequence seq;
    seq.source_id = std::move(name);
    seq.frame_rate = {30, 1};
    for (int t = 0; t < size.frames; ++t) {
        Frame f = Frame::blank(size.width, size.height, ChromaLayout::k420, 0.0, static_cast<std::size_t>(t));
        for (int y = 0; y < size.height; ++y)
            for (int x = 0; x < size.width; ++x)
                f.luma.at(x, y) = std::clamp(size.quantize ? std::round(luma(x, y, t)) : luma(x, y, t), 0.0, 255.0);
        for (int y = 0; y < f.chroma_b.height(); ++y)
            for (int x = 0; x < f.chroma_b.width(); ++x) {
                f.chroma_b.at(x, y) = std::round(20.0 * std::sin(0.05 * x + 0.1 * t));
                f.chroma_r.at(x, y) = std::round(-15.0 * std::cos(0.04 * y - 0.07 * t));
            }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

inline constexpr double kTau = 2.0 * std::numbers::pi;

}  // namespace detail

/// Three smooth sinusoidal layers drifting in different directions; no
/// single translation explains a block, so MC residuals stay large.
inline FrameSequence plasma(const ClipSize& size = {}) {
    using detail::kTau;
    return detail::render("plasma", size, [](int x, int y, int t) {
        return 128.0 + 35.0 * std::sin(kTau * (x - 6.0 * t) / 48.0) + 30.0 * std::sin(kTau * (y + 5.0 * t) / 40.0) +
               25.0 * std::sin(kTau * (x - y + 7.0 * t) / 56.0);
    });
}

/// Low-contrast texture panning right by 1 px/frame under a triangle-wave
/// global brightness change of 16 levels per frame, too large for any
/// in-range shift along the texture to absorb.
inline FrameSequence flicker_pan(const ClipSize& size = {}) {
    using detail::kTau;
    return detail::render("flicker_pan", size, [](int x, int y, int t) {
        const int phase = t % 20;
        const double light = 16.0 * (phase < 10 ? phase : 20 - phase);
        const double u = x - 1.0 * t;
        return 35.0 + light + 15.0 * std::sin(kTau * u / 96.0) * std::cos(kTau * y / 112.0) + 0.05 * y;
    });
}

/// Soft Gaussian blobs whose amplitudes pulse out of phase while drifting
/// slowly; amplitude change is not a translation.
inline FrameSequence pulse(const ClipSize& size = {}) {
    using detail::kTau;
    const double w = size.width;
    const double h = size.height;
    return detail::render("pulse", size, [w, h](int x, int y, int t) {
        double v = 128.0 + 10.0 * std::sin(kTau * (x + 2.0 * y) / (w + h));
        for (int k = 0; k < 6; ++k) {
            const double cx = w * (0.2 + 0.3 * (k % 3)) + 0.5 * t;
            const double cy = h * (0.28 + 0.44 * (k / 3)) - 0.3 * t;
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const double amp = 55.0 * std::sin(0.6 * t + 1.1 * k);
            v += amp * std::exp(-r2 / (2.0 * 22.0 * 22.0));
        }
        return v;
    });
}

/// Identical frames; produces no motion blocks.
inline FrameSequence static_scene(const ClipSize& size = {}) {
    using detail::kTau;
    return detail::render("static", size, [](int x, int y, int) {
        return 128.0 + 50.0 * std::sin(kTau * x / 40.0) * std::cos(kTau * y / 40.0);
    });
}

inline std::vector<std::string_view> clip_names() { return {"plasma", "flicker_pan", "pulse", "static"}; }

inline FrameSequence by_name(std::string_view name, const ClipSize& size = {}) {
    if (name == "plasma") return plasma(size);
    if (name == "flicker_pan") return flicker_pan(size);
    if (name == "pulse") return pulse(size);
    if (name == "static") return static_scene(size);
    throw ConfigError("unknown synthetic clip '" + std::string(name) + "'");
}

}  // namespace vwm::synthetic
