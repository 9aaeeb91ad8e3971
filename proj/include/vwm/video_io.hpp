#pragma once

// Uncompressed video I/O (YUV4MPEG2 and headerless planar YUV) plus the
// RGB <-> YCbCr conversion used by the watermarking pipeline.
//
// Samples are held as doubles. Luma keeps the 8-bit nominal range [0, 255];
// chroma is stored signed (byte value minus 128) so the conversion formulas
// apply verbatim. Quantization back to bytes happens only when writing.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vwm/error.hpp"
#include "vwm/plane.hpp"

namespace vwm {

enum class ChromaLayout { k420, k422, k444 };

inline std::string_view to_string(ChromaLayout layout) noexcept {
    switch (layout) {
        case ChromaLayout::k420: return "420";
        case ChromaLayout::k422: return "422";
        case ChromaLayout::k444: return "444";
    }
    return "?";
}

inline ChromaLayout parse_chroma_layout(std::string_view text) {
    if (text == "420") return ChromaLayout::k420;
    if (text == "422") return ChromaLayout::k422;
    if (text == "444") return ChromaLayout::k444;
    throw ConfigError("unsupported chroma layout '" + std::string(text) + "' (expected 420, 422 or 444)");
}

struct PlaneSize {
    int width = 0;
    int height = 0;
    friend bool operator==(const PlaneSize&, const PlaneSize&) = default;
};

inline PlaneSize chroma_size(ChromaLayout layout, int width, int height) noexcept {
    switch (layout) {
        case ChromaLayout::k420: return {(width + 1) / 2, (height + 1) / 2};
        case ChromaLayout::k422: return {(width + 1) / 2, height};
        case ChromaLayout::k444: return {width, height};
    }
    return {width, height};
}

/// One picture. Only `luma` is ever modified by watermarking or attacks.
struct Frame {
    std::size_t index = 0;
    ChromaLayout layout = ChromaLayout::k420;
    RealPlane luma;
    RealPlane chroma_b;
    RealPlane chroma_r;

    int width() const noexcept { return luma.width(); }
    int height() const noexcept { return luma.height(); }

    static Frame blank(int width, int height, ChromaLayout layout, double luma_fill = 0.0,
                       std::size_t index = 0) {
        const PlaneSize c = chroma_size(layout, width, height);
        Frame f;
        f.index = index;
        f.layout = layout;
        f.luma = RealPlane(width, height, luma_fill);
        f.chroma_b = RealPlane(c.width, c.height, 0.0);
        f.chroma_r = RealPlane(c.width, c.height, 0.0);
        return f;
    }

    void validate() const {
        const PlaneSize c = chroma_size(layout, width(), height());
        if (chroma_b.width() != c.width || chroma_b.height() != c.height ||
            chroma_r.width() != c.width || chroma_r.height() != c.height)
            throw ShapeError("frame " + std::to_string(index) + ": chroma planes do not match layout " +
                             std::string(to_string(layout)));
    }

    friend bool operator==(const Frame&, const Frame&) = default;
};

struct Rational {
    std::int64_t num = 30;
    std::int64_t den = 1;
    friend bool operator==(const Rational&, const Rational&) = default;
};

inline Rational parse_rational(std::string_view text) {
    const auto colon = text.find_first_of(":/");
    if (colon == std::string_view::npos) throw ConfigError("expected N:D or N/D, got '" + std::string(text) + "'");
    try {
        std::size_t used = 0;
        const std::string n(text.substr(0, colon));
        const std::string d(text.substr(colon + 1));
        Rational r{std::stoll(n, &used), 0};
        if (used != n.size()) throw std::invalid_argument(n);
        r.den = std::stoll(d, &used);
        if (used != d.size()) throw std::invalid_argument(d);
        return r;
    } catch (const std::logic_error&) {
        throw ConfigError("malformed rational '" + std::string(text) + "'");
    }
}

struct FrameSequence {
    std::vector<Frame> frames;
    Rational frame_rate;
    std::string source_id;
    /// Y4M colorspace tag as read (e.g. "420jpeg"); empty when absent.
    std::string colorspace_tag;
    /// Remaining Y4M header tokens (I, A, X) in their original order.
    std::vector<std::string> header_extras;

    std::size_t size() const noexcept { return frames.size(); }
    bool empty() const noexcept { return frames.empty(); }

    /// Position of the frame whose `index` equals `frame_index`, or size() if absent.
    std::size_t find(std::size_t frame_index) const noexcept {
        const auto it = std::find_if(frames.begin(), frames.end(),
                                     [&](const Frame& f) { return f.index == frame_index; });
        return static_cast<std::size_t>(it - frames.begin());
    }

    void validate() const {
        for (std::size_t k = 0; k < frames.size(); ++k) {
            const Frame& f = frames[k];
            f.validate();
            if (f.width() != frames[0].width() || f.height() != frames[0].height() ||
                f.layout != frames[0].layout)
                throw ShapeError("frame " + std::to_string(f.index) + " differs in geometry from frame " +
                                 std::to_string(frames[0].index));
        }
    }
};

namespace detail {

inline std::uint8_t to_byte(double v) noexcept {
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

inline void read_plane(std::istream& in, RealPlane& plane, double offset, std::size_t frame_index) {
    std::vector<unsigned char> buf(plane.size());
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw TruncationError(frame_index, "truncated payload in frame " + std::to_string(frame_index) +
                                               ": expected " + std::to_string(buf.size()) +
                                               " bytes, got " + std::to_string(in.gcount()));
    auto out = plane.samples();
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = static_cast<double>(buf[i]) - offset;
}

inline void write_plane(std::ostream& out, const RealPlane& plane, double offset) {
    std::vector<unsigned char> buf(plane.size());
    auto in = plane.samples();
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(in[i] + offset);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline Frame read_frame_payload(std::istream& in, int width, int height, ChromaLayout layout,
                                std::size_t index) {
    Frame f = Frame::blank(width, height, layout, 0.0, index);
    read_plane(in, f.luma, 0.0, index);
    read_plane(in, f.chroma_b, 128.0, index);
    read_plane(in, f.chroma_r, 128.0, index);
    return f;
}

inline void write_frame_payload(std::ostream& out, const Frame& f) {
    write_plane(out, f.luma, 0.0);
    write_plane(out, f.chroma_b, 128.0);
    write_plane(out, f.chroma_r, 128.0);
}

inline int parse_dimension(const std::string& token) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(token.substr(1), &used);
        if (used + 1 != token.size() || v <= 0) throw std::invalid_argument(token);
        return v;
    } catch (const std::logic_error&) {
        throw FormatError("malformed Y4M header token '" + token + "'");
    }
}

inline ChromaLayout layout_from_tag(const std::string& tag) {
    if (tag == "420" || tag == "420jpeg" || tag == "420paldv" || tag == "420mpeg2") return ChromaLayout::k420;
    if (tag == "422") return ChromaLayout::k422;
    if (tag == "444") return ChromaLayout::k444;
    throw FormatError("unsupported Y4M colorspace token 'C" + tag + "'");
}

/// FRAME parameter that keeps a frame's index when it differs from its
/// position, e.g. after frames were dropped.
inline constexpr std::string_view kFrameIndexParam = "Xindex=";

inline std::size_t parse_frame_index(const std::string& token) {
    const std::string digits = token.substr(kFrameIndexParam.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        throw FormatError("malformed FRAME parameter '" + token + "'");
    try {
        return static_cast<std::size_t>(std::stoull(digits));
    } catch (const std::out_of_range&) {
        throw FormatError("malformed FRAME parameter '" + token + "'");
    }
}

}  // namespace detail

/// Reads a YUV4MPEG2 stream. One Frame per FRAME record; the index is the
/// record position unless the record carries an Xindex= parameter.
inline FrameSequence read_y4m(std::istream& in, std::string source_id = {}) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError("empty stream: missing YUV4MPEG2 header");
    std::istringstream tokens(header);
    std::string magic;
    tokens >> magic;
    if (magic != "YUV4MPEG2") throw FormatError("bad Y4M signature '" + magic + "'");

    FrameSequence seq;
    seq.source_id = std::move(source_id);
    int width = 0;
    int height = 0;
    bool have_rate = false;
    ChromaLayout layout = ChromaLayout::k420;
    for (std::string tok; tokens >> tok;) {
        switch (tok[0]) {
            case 'W': width = detail::parse_dimension(tok); break;
            case 'H': height = detail::parse_dimension(tok); break;
            case 'F':
                try {
                    seq.frame_rate = parse_rational(std::string_view(tok).substr(1));
                } catch (const ConfigError&) {
                    throw FormatError("malformed Y4M header token '" + tok + "'");
                }
                if (seq.frame_rate.num <= 0 || seq.frame_rate.den <= 0)
                    throw FormatError("malformed Y4M header token '" + tok + "'");
                have_rate = true;
                break;
            case 'C':
                seq.colorspace_tag = tok.substr(1);
                layout = detail::layout_from_tag(seq.colorspace_tag);
                break;
            case 'I':
                if (tok != "Ip" && tok != "I?")
                    throw FormatError("unsupported Y4M interlace token '" + tok + "'");
                seq.header_extras.push_back(tok);
                break;
            case 'A':
            case 'X': seq.header_extras.push_back(tok); break;
            default: throw FormatError("unknown Y4M header token '" + tok + "'");
        }
    }
    if (width == 0) throw FormatError("Y4M header lacks W token");
    if (height == 0) throw FormatError("Y4M header lacks H token");
    if (!have_rate) throw FormatError("Y4M header lacks F token");

    for (std::string line; std::getline(in, line);) {
        const std::size_t position = seq.frames.size();
        if (line.rfind("FRAME", 0) != 0)
            throw FormatError("expected FRAME marker before frame " + std::to_string(position) + ", got '" +
                              line.substr(0, 16) + "'");
        std::size_t index = position;
        std::istringstream params(line.substr(5));
        for (std::string tok; params >> tok;)
            if (tok.rfind(detail::kFrameIndexParam, 0) == 0) index = detail::parse_frame_index(tok);
        seq.frames.push_back(detail::read_frame_payload(in, width, height, layout, index));
    }
    return seq;
}

inline FrameSequence read_y4m(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return read_y4m(in, path.filename().string());
}

inline void write_y4m(const FrameSequence& seq, std::ostream& out) {
    if (seq.empty()) throw ConfigError("cannot write an empty sequence");
    seq.validate();
    const Frame& first = seq.frames.front();
    out << "YUV4MPEG2 W" << first.width() << " H" << first.height() << " F" << seq.frame_rate.num << ':'
        << seq.frame_rate.den;
    for (const auto& tok : seq.header_extras)
        if (tok[0] == 'I' || tok[0] == 'A') out << ' ' << tok;
    if (!seq.colorspace_tag.empty() && detail::layout_from_tag(seq.colorspace_tag) == first.layout)
        out << " C" << seq.colorspace_tag;
    else
        out << " C" << to_string(first.layout);
    for (const auto& tok : seq.header_extras)
        if (tok[0] == 'X') out << ' ' << tok;
    out << '\n';
    for (std::size_t pos = 0; pos < seq.frames.size(); ++pos) {
        const Frame& f = seq.frames[pos];
        out << "FRAME";
        if (f.index != pos) out << ' ' << detail::kFrameIndexParam << f.index;
        out << '\n';
        detail::write_frame_payload(out, f);
    }
}

inline void write_y4m(const FrameSequence& seq, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_y4m(seq, out);
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// Geometry of a headerless planar YUV file.
struct RawGeometry {
    int width = 0;
    int height = 0;
    ChromaLayout layout = ChromaLayout::k420;
    Rational frame_rate;
};

inline RawGeometry parse_raw_size(std::string_view size, std::string_view format, std::string_view fps) {
    RawGeometry g;
    const auto x = size.find('x');
    if (x == std::string_view::npos) throw ConfigError("--raw-size must be WxH, got '" + std::string(size) + "'");
    try {
        g.width = std::stoi(std::string(size.substr(0, x)));
        g.height = std::stoi(std::string(size.substr(x + 1)));
    } catch (const std::logic_error&) {
        throw ConfigError("--raw-size must be WxH, got '" + std::string(size) + "'");
    }
    if (g.width <= 0 || g.height <= 0) throw ConfigError("--raw-size dimensions must be positive");
    g.layout = parse_chroma_layout(format);
    g.frame_rate = parse_rational(fps);
    if (g.frame_rate.num <= 0 || g.frame_rate.den <= 0) throw ConfigError("--fps must be positive");
    return g;
}

inline FrameSequence read_raw_yuv(const std::filesystem::path& path, const RawGeometry& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    FrameSequence seq;
    seq.source_id = path.filename().string();
    seq.frame_rate = g.frame_rate;
    while (in.peek() != std::char_traits<char>::eof())
        seq.frames.push_back(detail::read_frame_payload(in, g.width, g.height, g.layout, seq.frames.size()));
    if (seq.empty()) throw FormatError("raw YUV file '" + path.string() + "' holds no frames");
    return seq;
}

inline void write_raw_yuv(const FrameSequence& seq, const std::filesystem::path& path) {
    if (seq.empty()) throw ConfigError("cannot write an empty sequence");
    seq.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const Frame& f : seq.frames) detail::write_frame_payload(out, f);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

struct Triple {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

namespace detail {

using Matrix3 = std::array<std::array<double, 3>, 3>;

inline constexpr Matrix3 kRgbToYcbcr{{
    {0.2989, 0.5866, 0.1145},
    {-0.1687, -0.3312, 0.5},
    {0.5, -0.4183, -0.0816},
}};

constexpr Matrix3 inverse(const Matrix3& m) {
    const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    return {{
        {c00 / det, (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det, (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det},
        {c01 / det, (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det, (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det},
        {c02 / det, (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det, (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det},
    }};
}

inline constexpr Matrix3 kYcbcrToRgb = inverse(kRgbToYcbcr);

constexpr Triple apply(const Matrix3& m, double x, double y, double z) {
    return {m[0][0] * x + m[0][1] * y + m[0][2] * z, m[1][0] * x + m[1][1] * y + m[1][2] * z,
            m[2][0] * x + m[2][1] * y + m[2][2] * z};
}

}  // namespace detail

/// Returns (Y, Cb, Cr). Cb and Cr are signed; no +128 offset is applied.
constexpr Triple rgb_to_ycbcr(double r, double g, double b) {
    return detail::apply(detail::kRgbToYcbcr, r, g, b);
}

/// Exact matrix inverse of `rgb_to_ycbcr`. Returns (R, G, B).
constexpr Triple ycbcr_to_rgb(double y, double cb, double cr) {
    return detail::apply(detail::kYcbcrToRgb, y, cb, cr);
}

}  // namespace vwm
