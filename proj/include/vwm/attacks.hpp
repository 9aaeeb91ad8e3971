#pragma once

// Deterministic degradations used to probe watermark robustness. All of them
// act on luma only.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vwm/error.hpp"
#include "vwm/plane.hpp"
#include "vwm/video_io.hpp"

namespace vwm::attacks {

enum class Kind { adaptive_quantization, lowpass, highpass, frame_drop };

inline std::string_view to_string(Kind k) noexcept {
    switch (k) {
        case Kind::adaptive_quantization: return "quant";
        case Kind::lowpass: return "lowpass";
        case Kind::highpass: return "highpass";
        case Kind::frame_drop: return "drop";
    }
    return "?";
}

inline Kind parse_kind(std::string_view text) {
    if (text == "quant" || text == "adaptive_quantization") return Kind::adaptive_quantization;
    if (text == "lowpass") return Kind::lowpass;
    if (text == "highpass") return Kind::highpass;
    if (text == "drop" || text == "frame_drop") return Kind::frame_drop;
    throw ConfigError("unknown attack kind '" + std::string(text) + "'");
}

inline constexpr int kQuantBlock = 8;

struct AttackSpec {
    Kind kind = Kind::lowpass;
    double q = 16.0;
    bool adaptive = true;  // false: plain uniform quantizer with step q
    int radius = 1;
    double boost = 1.0;
    double drop_ratio = 0.0;
    std::vector<std::size_t> drop_indices;

    void validate() const {
        if (!(q >= 1.0)) throw ConfigError("quantization step must be >= 1");
        if (radius < 1) throw ConfigError("filter radius must be >= 1");
        if (!(boost > 0.0)) throw ConfigError("highpass boost must be > 0");
        if (!(drop_ratio >= 0.0 && drop_ratio < 1.0)) throw ConfigError("drop ratio must lie in [0, 1)");
    }

    std::string label() const {
        switch (kind) {
            case Kind::adaptive_quantization: return std::string(adaptive ? "quant" : "uquant") + "(q=" + fmt(q) + ")";
            case Kind::lowpass: return "lowpass(r=" + std::to_string(radius) + ")";
            case Kind::highpass: return "highpass(r=" + std::to_string(radius) + ",boost=" + fmt(boost) + ")";
            case Kind::frame_drop: return "drop(ratio=" + fmt(drop_ratio) + ")";
        }
        return "?";
    }

private:
    static std::string fmt(double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (s.back() == '.') s.pop_back();
        return s;
    }
};

/// Quantizer step of one block: max(1, q_base * MAD / 8), MAD being the
/// mean absolute deviation from the block mean.
inline double adaptive_step(const RealPlane& luma, int x0, int y0, int w, int h, double q_base) {
    double sum = 0.0;
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) sum += luma.at(x, y);
    const double n = static_cast<double>(w) * h;
    const double mean = sum / n;
    double dev = 0.0;
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) dev += std::abs(luma.at(x, y) - mean);
    return std::max(1.0, q_base * (dev / n) / 8.0);
}

/// Per 8x8 luma block, sample -> round(sample / q) * q. With `adaptive` off
/// the step is q_base everywhere. Edge blocks may be partial.
inline Frame adaptive_quantize(Frame frame, double q_base, bool adaptive = true) {
    if (!(q_base >= 1.0)) throw ConfigError("q_base must be >= 1");
    RealPlane& y = frame.luma;
    for (int by = 0; by < y.height(); by += kQuantBlock) {
        for (int bx = 0; bx < y.width(); bx += kQuantBlock) {
            const int w = std::min(kQuantBlock, y.width() - bx);
            const int h = std::min(kQuantBlock, y.height() - by);
            const double q = adaptive ? adaptive_step(y, bx, by, w, h, q_base) : q_base;
            for (int v = by; v < by + h; ++v)
                for (int u = bx; u < bx + w; ++u) y.at(u, v) = std::round(y.at(u, v) / q) * q;
        }
    }
    return frame;
}

/// Separable box filter of side 2 * radius + 1, whole-sample mirrored borders.
inline RealPlane box_filter(const RealPlane& in, int radius) {
    if (radius < 1) throw ConfigError("filter radius must be >= 1");
    const int w = in.width();
    const int h = in.height();
    const double norm = 1.0 / (2 * radius + 1);
    RealPlane tmp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += in.at(mirror_index(x + k, w), y);
            tmp.at(x, y) = s * norm;
        }
    RealPlane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += tmp.at(x, mirror_index(y + k, h));
            out.at(x, y) = s * norm;
        }
    return out;
}

inline Frame lowpass(Frame frame, int radius) {
    frame.luma = box_filter(frame.luma, radius);
    return frame;
}

/// High-boost sharpening: Y + boost * (Y - lowpass(Y)).
inline Frame highpass(Frame frame, int radius, double boost) {
    if (!(boost > 0.0)) throw ConfigError("highpass boost must be > 0");
    const RealPlane smooth = box_filter(frame.luma, radius);
    auto y = frame.luma.samples();
    const auto s = smooth.samples();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += boost * (y[i] - s[i]);
    return frame;
}

/// Removes the frames whose `index` is listed. Survivors keep their indices.
inline FrameSequence drop_frames(FrameSequence seq, const std::vector<std::size_t>& indices) {
    std::set<std::size_t> doomed;
    for (const auto idx : indices) {
        if (seq.find(idx) == seq.size())
            throw DomainError("cannot drop frame " + std::to_string(idx) + ": not in sequence");
        doomed.insert(idx);
    }
    std::erase_if(seq.frames, [&](const Frame& f) { return doomed.count(f.index) != 0; });
    return seq;
}

/// Drops every ceil(1 / ratio)-th frame by position (the 1-based positions
/// that are multiples of the period).
inline FrameSequence drop_frames(FrameSequence seq, double ratio) {
    if (!(ratio >= 0.0 && ratio < 1.0)) throw DomainError("drop ratio must lie in [0, 1)");
    if (ratio == 0.0) return seq;
    const auto period = static_cast<std::size_t>(std::ceil(1.0 / ratio));
    std::vector<Frame> kept;
    for (std::size_t pos = 0; pos < seq.frames.size(); ++pos)
        if ((pos + 1) % period != 0) kept.push_back(std::move(seq.frames[pos]));
    seq.frames = std::move(kept);
    return seq;
}

/// Applies a per-frame attack to one frame.
inline Frame apply(const AttackSpec& spec, Frame frame) {
    spec.validate();
    switch (spec.kind) {
        case Kind::adaptive_quantization: return adaptive_quantize(std::move(frame), spec.q, spec.adaptive);
        case Kind::lowpass: return lowpass(std::move(frame), spec.radius);
        case Kind::highpass: return highpass(std::move(frame), spec.radius, spec.boost);
        case Kind::frame_drop: return frame;
    }
    return frame;
}

inline FrameSequence apply(const AttackSpec& spec, FrameSequence seq) {
    spec.validate();
    if (spec.kind == Kind::frame_drop)
        return spec.drop_indices.empty() ? drop_frames(std::move(seq), spec.drop_ratio)
                                         : drop_frames(std::move(seq), spec.drop_indices);
    for (Frame& f : seq.frames) f = apply(spec, std::move(f));
    return seq;
}

}  // namespace vwm::attacks
