#pragma once

// End-to-end flow: motion analysis on consecutive original frames, frame and
// block selection, embedding, attack, extraction and evaluation reports.
// The manifest is the only state shared between embedding and extraction.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vwm/attacks.hpp"
#include "vwm/error.hpp"
#include "vwm/motion.hpp"
#include "vwm/video_io.hpp"
#include "vwm/watermark.hpp"

namespace vwm {

struct RunConfig {
    Domain domain = Domain::frequency;
    double alpha = 0.1;
    int block_size = 8;
    int wm_side = 32;
    /// Watermark rows; 0 means square (wm_side x wm_side).
    int wm_rows = 0;
    double threshold = 4.0;
    int range = 7;
    int levels = 2;
    std::uint64_t seed = 0;
    std::string generator_id{rng::kDefaultGenerator};

    int rows() const noexcept { return wm_rows > 0 ? wm_rows : wm_side; }
    std::size_t samples() const noexcept { return static_cast<std::size_t>(rows()) * wm_side; }
    std::size_t blocks_per_frame() const { return blocks_required(domain, samples(), block_size); }

    /// 512-sample mode: a 16 x 32 pattern (8 spatial / 64 frequency blocks).
    void set_sample_count(std::size_t samples) {
        if (wm_side < 1 || samples % static_cast<std::size_t>(wm_side) != 0)
            throw ConfigError("watermark sample count " + std::to_string(samples) + " is not a multiple of side " +
                              std::to_string(wm_side));
        wm_rows = static_cast<int>(samples / static_cast<std::size_t>(wm_side));
    }

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
        if (block_size < 1) throw ConfigError("block size must be >= 1");
        if (wm_side < 1 || rows() < 1) throw ConfigError("watermark size must be >= 1");
        if (range < 1) throw ConfigError("search range must be >= 1");
        if (!(threshold >= 0.0)) throw ConfigError("motion threshold must be >= 0");
        if (levels != 2) throw ConfigError("wavelet levels are fixed at 2");
        if (domain == Domain::frequency) {
            if (block_size != 8) throw ConfigError("frequency domain requires block size 8");
            if (samples() % 8 != 0) throw ConfigError("frequency domain needs a watermark size divisible by 8");
        } else if (rows() % block_size != 0 || wm_side % block_size != 0) {
            throw ConfigError("watermark " + std::to_string(rows()) + "x" + std::to_string(wm_side) +
                              " does not tile into blocks of " + std::to_string(block_size));
        }
        if (generator_id != rng::kXorshift64Star && generator_id != rng::kMt19937_64)
            throw ConfigError("unknown generator_id '" + generator_id + "'");
    }

    motion::SearchParams search() const { return {block_size, threshold, range}; }
};

// ---------------------------------------------------------------- manifest

inline nlohmann::ordered_json manifest_to_json(const EmbedManifest& m) {
    nlohmann::ordered_json j;
    j["version"] = m.version;
    j["generator_id"] = m.generator_id;
    j["seed"] = m.seed;
    j["domain"] = std::string(to_string(m.domain));
    j["alpha"] = m.alpha;
    j["block_size"] = m.block_size;
    j["wm_side"] = m.wm_side;
    j["wm_rows"] = m.wm_rows;
    j["threshold"] = m.threshold;
    j["range"] = m.range;
    j["width"] = m.width;
    j["height"] = m.height;
    auto frames = nlohmann::ordered_json::array();
    for (const auto& f : m.frames) {
        auto blocks = nlohmann::ordered_json::array();
        for (const auto& b : f.blocks) blocks.push_back({b.grid_i, b.grid_j});
        frames.push_back({{"index", f.index}, {"blocks", std::move(blocks)}});
    }
    j["frames"] = std::move(frames);
    j["skipped"] = m.skipped;
    return j;
}

inline EmbedManifest manifest_from_json(const nlohmann::json& j) {
    try {
        EmbedManifest m;
        m.version = j.at("version").get<int>();
        if (m.version != EmbedManifest::kVersion)
            throw FormatError("unsupported manifest version " + std::to_string(m.version));
        m.generator_id = j.at("generator_id").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.domain = parse_domain(j.at("domain").get<std::string>());
        m.alpha = j.at("alpha").get<double>();
        m.block_size = j.at("block_size").get<int>();
        m.wm_side = j.at("wm_side").get<int>();
        m.wm_rows = j.value("wm_rows", m.wm_side);
        m.threshold = j.at("threshold").get<double>();
        m.range = j.at("range").get<int>();
        m.width = j.value("width", 0);
        m.height = j.value("height", 0);
        for (const auto& f : j.at("frames")) {
            EmbeddedFrame e;
            e.index = f.at("index").get<std::size_t>();
            for (const auto& b : f.at("blocks")) e.blocks.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
            m.frames.push_back(std::move(e));
        }
        if (j.contains("skipped")) m.skipped = j.at("skipped").get<std::vector<std::size_t>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
}

inline std::string manifest_dump(const EmbedManifest& m) { return manifest_to_json(m).dump(2) + "\n"; }

inline void write_manifest(const EmbedManifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << manifest_dump(m);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline EmbedManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return manifest_from_json(j);
}

// ---------------------------------------------------------------- embedding

struct EmbedResult {
    FrameSequence watermarked;
    EmbedManifest manifest;
    /// Motion-block count per frame pair, keyed by position of the current frame.
    std::vector<std::size_t> motion_blocks;
};

/// Frame t (t >= 1) is compared with original frame t-1; frames with too few
/// motion blocks are recorded as skipped. Frame 0 is never watermarked.
inline EmbedResult embed_video(const FrameSequence& seq, const RunConfig& cfg) {
    cfg.validate();
    if (seq.size() < 2) throw ConfigError("embedding needs at least 2 frames, got " + std::to_string(seq.size()));
    seq.validate();
    const int w = seq.frames[0].width();
    const int h = seq.frames[0].height();
    if (w % cfg.block_size != 0 || h % cfg.block_size != 0)
        throw ConfigError("frame size " + std::to_string(w) + "x" + std::to_string(h) +
                          " is not a multiple of block size " + std::to_string(cfg.block_size));

    const WatermarkPattern wm = generate_watermark(cfg.seed, cfg.rows(), cfg.wm_side, cfg.generator_id);
    const std::size_t need = cfg.blocks_per_frame();

    EmbedResult out;
    out.watermarked = seq;
    EmbedManifest& man = out.manifest;
    man.generator_id = cfg.generator_id;
    man.seed = cfg.seed;
    man.domain = cfg.domain;
    man.alpha = cfg.alpha;
    man.block_size = cfg.block_size;
    man.wm_rows = cfg.rows();
    man.wm_side = cfg.wm_side;
    man.threshold = cfg.threshold;
    man.range = cfg.range;
    man.width = w;
    man.height = h;
    out.motion_blocks.assign(seq.size(), 0);

    for (std::size_t t = 1; t < seq.size(); ++t) {
        const auto field = motion::compute_motion_field(seq.frames[t - 1], seq.frames[t], cfg.search());
        out.motion_blocks[t] = field.motion_block_count();
        std::vector<motion::BlockRecord> chosen;
        try {
            chosen = motion::select_blocks(field, need);
        } catch (const InsufficientMotion&) {
            man.skipped.push_back(seq.frames[t].index);
            continue;
        }
        EmbeddedFrame entry{seq.frames[t].index, {}};
        for (const auto& r : chosen) entry.blocks.push_back(r.coord());
        out.watermarked.frames[t] =
            embed(cfg.domain, std::move(out.watermarked.frames[t]), wm, entry.blocks, cfg.block_size, cfg.alpha);
        man.frames.push_back(std::move(entry));
    }
    if (man.frames.empty())
        throw NoCapacity("no frame has " + std::to_string(need) + " motion blocks at threshold " +
                         std::to_string(cfg.threshold));
    return out;
}

// ---------------------------------------------------------------- extraction

struct FrameSimilarity {
    std::size_t index = 0;
    bool dropped = false;
    double delta = 0.0;
};

struct ExtractionResult {
    std::vector<FrameSimilarity> frames;
    double mean_delta = std::numeric_limits<double>::quiet_NaN();
    std::size_t surviving = 0;

    std::vector<double> deltas() const {
        std::vector<double> d;
        for (const auto& f : frames)
            if (!f.dropped) d.push_back(f.delta);
        return d;
    }
};

/// Similarity of an extracted matrix against W; zero-norm extractions (the
/// attack erased every trace) score 0.
inline double similarity_or_zero(const RealPlane& w_star, const WatermarkPattern& w) {
    try {
        return similarity(w_star, w);
    } catch (const DomainError&) {
        return 0.0;
    }
}

inline ExtractionResult extract_video(const FrameSequence& original, const FrameSequence& suspect,
                                      const EmbedManifest& manifest) {
    WatermarkPattern wm;
    try {
        wm = manifest.regenerate_watermark();
    } catch (const ConfigError& e) {
        throw IntegrityError(std::string("cannot regenerate watermark: ") + e.what());
    }
    if (original.empty()) throw IntegrityError("original sequence is empty");
    if (manifest.width != 0 &&
        (original.frames[0].width() != manifest.width || original.frames[0].height() != manifest.height))
        throw IntegrityError("manifest geometry " + std::to_string(manifest.width) + "x" +
                             std::to_string(manifest.height) + " does not match original " +
                             std::to_string(original.frames[0].width()) + "x" +
                             std::to_string(original.frames[0].height()));

    ExtractionResult out;
    double sum = 0.0;
    for (const auto& entry : manifest.frames) {
        const std::size_t po = original.find(entry.index);
        if (po == original.size())
            throw IntegrityError("manifest frame " + std::to_string(entry.index) + " is missing from the original");
        const std::size_t ps = suspect.find(entry.index);
        if (ps == suspect.size()) {
            out.frames.push_back({entry.index, true, 0.0});
            continue;
        }
        const Frame& o = original.frames[po];
        const Frame& s = suspect.frames[ps];
        if (!o.luma.same_shape(s.luma))
            throw IntegrityError("suspect frame " + std::to_string(entry.index) + " differs in size from the original");
        RealPlane w_star;
        try {
            w_star = extract(o, s, manifest);
        } catch (const ShapeError& e) {
            throw IntegrityError(std::string("manifest does not fit the video: ") + e.what());
        } catch (const CapacityError& e) {
            throw IntegrityError(std::string("manifest does not fit the video: ") + e.what());
        }
        const double d = similarity_or_zero(w_star, wm);
        out.frames.push_back({entry.index, false, d});
        sum += d;
        ++out.surviving;
    }
    if (out.surviving > 0) out.mean_delta = sum / static_cast<double>(out.surviving);
    return out;
}

/// Mean luma PSNR of suspect against original over the manifest's
/// surviving watermarked frames.
inline double mean_psnr(const FrameSequence& original, const FrameSequence& suspect, const EmbedManifest& manifest) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& entry : manifest.frames) {
        const std::size_t po = original.find(entry.index);
        const std::size_t ps = suspect.find(entry.index);
        if (po == original.size() || ps == suspect.size()) continue;
        sum += psnr(original.frames[po], suspect.frames[ps]);
        ++n;
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- evaluation

struct ReportRow {
    std::string clip;
    Domain domain = Domain::frequency;
    std::string attack;  // "none" for the before-attack row
    double psnr = 0.0;
    double mean_delta = 0.0;
    bool detected = false;
    std::vector<FrameSimilarity> per_frame;
    std::size_t frames_total = 0;
    std::size_t frames_watermarked = 0;
    std::size_t frames_skipped = 0;
    std::size_t frames_dropped = 0;
};

struct EvaluationReport {
    double detection_threshold = 0.5;
    std::vector<ReportRow> rows;

    const ReportRow* find(std::string_view clip, Domain domain, std::string_view attack) const {
        for (const auto& r : rows)
            if (r.clip == clip && r.domain == domain && r.attack == attack) return &r;
        return nullptr;
    }
};

struct NamedClip {
    std::string name;
    FrameSequence sequence;
};

/// Embeds each clip in each domain, then measures PSNR and similarity before
/// any attack and after each attack. Stage failures are rethrown with the
/// clip, domain and stage in the message.
inline EvaluationReport run_experiment(const std::vector<NamedClip>& clips, const RunConfig& base,
                                       const std::vector<Domain>& domains,
                                       const std::vector<attacks::AttackSpec>& attack_specs,
                                       double detection_threshold = 0.5,
                                       std::vector<std::pair<std::string, EmbedManifest>>* manifests = nullptr) {
    if (attack_specs.empty()) throw ConfigError("run_experiment needs at least one attack");
    for (const auto& a : attack_specs) a.validate();
    EvaluationReport report;
    report.detection_threshold = detection_threshold;

    const auto annotate = [](const std::string& where, auto&& fn) {
        try {
            return fn();
        } catch (const NoCapacity& e) {
            throw NoCapacity(where + ": " + e.what());
        } catch (const CapacityError& e) {
            throw CapacityError(where + ": " + e.what());
        } catch (const IoError& e) {
            throw IoError(where + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(where + ": " + e.what());
        } catch (const IntegrityError& e) {
            throw IntegrityError(where + ": " + e.what());
        } catch (const Error& e) {
            throw ConfigError(where + ": " + e.what());
        }
    };

    for (const auto& clip : clips) {
        for (const Domain domain : domains) {
            RunConfig cfg = base;
            cfg.domain = domain;
            const std::string where = clip.name + "/" + std::string(to_string(domain));
            const EmbedResult emb = annotate(where + "/embed", [&] { return embed_video(clip.sequence, cfg); });
            if (manifests) manifests->emplace_back(clip.name + "_" + std::string(to_string(domain)), emb.manifest);

            const auto measure = [&](const std::string& label, const FrameSequence& suspect) {
                const ExtractionResult ex =
                    annotate(where + "/extract", [&] { return extract_video(clip.sequence, suspect, emb.manifest); });
                ReportRow row;
                row.clip = clip.name;
                row.domain = domain;
                row.attack = label;
                row.psnr = annotate(where + "/psnr", [&] { return mean_psnr(clip.sequence, suspect, emb.manifest); });
                row.mean_delta = ex.mean_delta;
                row.detected = ex.surviving > 0 && ex.mean_delta >= detection_threshold;
                row.per_frame = ex.frames;
                row.frames_total = clip.sequence.size();
                row.frames_watermarked = emb.manifest.frames.size();
                row.frames_skipped = emb.manifest.skipped.size();
                row.frames_dropped = ex.frames.size() - ex.surviving;
                report.rows.push_back(std::move(row));
            };
            measure("none", emb.watermarked);
            for (const auto& spec : attack_specs) {
                const FrameSequence attacked =
                    annotate(where + "/attack", [&] { return attacks::apply(spec, emb.watermarked); });
                measure(spec.label(), attacked);
            }
        }
    }
    return report;
}

namespace detail {

inline std::string fixed(double v, int precision = 6) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

inline nlohmann::ordered_json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    return fixed(v);
}

}  // namespace detail

inline std::string report_csv(const EvaluationReport& r) {
    std::ostringstream os;
    os << "clip,domain,attack,psnr_db,mean_delta,detected,frames_total,frames_watermarked,frames_skipped,"
          "frames_dropped,per_frame_delta\n";
    for (const auto& row : r.rows) {
        os << row.clip << ',' << to_string(row.domain) << ',' << row.attack << ',' << detail::fixed(row.psnr, 4) << ','
           << detail::fixed(row.mean_delta) << ',' << (row.detected ? 1 : 0) << ',' << row.frames_total << ','
           << row.frames_watermarked << ',' << row.frames_skipped << ',' << row.frames_dropped << ',';
        bool first = true;
        for (const auto& f : row.per_frame) {
            if (f.dropped) continue;
            os << (first ? "" : ";") << f.index << ':' << detail::fixed(f.delta);
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

inline std::string report_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["detection_threshold"] = r.detection_threshold;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json o;
        o["clip"] = row.clip;
        o["domain"] = std::string(to_string(row.domain));
        o["attack"] = row.attack;
        o["psnr_db"] = detail::number_or_string(row.psnr);
        o["mean_delta"] = detail::number_or_string(row.mean_delta);
        o["detected"] = row.detected;
        o["frames_total"] = row.frames_total;
        o["frames_watermarked"] = row.frames_watermarked;
        o["frames_skipped"] = row.frames_skipped;
        o["frames_dropped"] = row.frames_dropped;
        auto frames = nlohmann::ordered_json::array();
        for (const auto& f : row.per_frame) {
            nlohmann::ordered_json e;
            e["index"] = f.index;
            if (f.dropped)
                e["dropped"] = true;
            else
                e["delta"] = f.delta;
            frames.push_back(std::move(e));
        }
        o["per_frame"] = std::move(frames);
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

/// Two tables shaped like the classic similarity / PSNR comparison: one line
/// per clip, columns grouped by domain, before-attack first.
inline std::string report_table(const EvaluationReport& r) {
    std::vector<std::string> clips;
    std::vector<std::string> attacks_seen;
    for (const auto& row : r.rows) {
        if (std::find(clips.begin(), clips.end(), row.clip) == clips.end()) clips.push_back(row.clip);
        if (row.attack != "none" && std::find(attacks_seen.begin(), attacks_seen.end(), row.attack) == attacks_seen.end())
            attacks_seen.push_back(row.attack);
    }
    std::ostringstream os;
    const auto table = [&](const char* title, auto value) {
        os << title << '\n';
        for (const Domain d : {Domain::spatial, Domain::frequency}) {
            os << "  [" << to_string(d) << "]\n";
            os << "    " << std::left << std::setw(14) << "clip" << std::setw(12) << "before";
            for (const auto& a : attacks_seen) os << std::setw(std::max<int>(12, static_cast<int>(a.size()) + 2)) << a;
            os << '\n';
            for (const auto& c : clips) {
                const ReportRow* base = r.find(c, d, "none");
                if (!base) continue;
                os << "    " << std::setw(14) << c << std::setw(12) << value(*base);
                for (const auto& a : attacks_seen) {
                    const ReportRow* row = r.find(c, d, a);
                    os << std::setw(std::max<int>(12, static_cast<int>(a.size()) + 2)) << (row ? value(*row) : "-");
                }
                os << '\n';
            }
        }
    };
    table("Similarity (mean delta)", [](const ReportRow& row) { return detail::fixed(row.mean_delta, 4); });
    table("PSNR (dB) vs original", [](const ReportRow& row) { return detail::fixed(row.psnr, 2); });
    return os.str();
}

}  // namespace vwm
