// vwm: embed, attack, extract and evaluate motion-block video watermarks.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vwm/vwm.hpp"

namespace fs = std::filesystem;

namespace {

struct RawFlags {
    std::string size;
    std::string format = "420";
    std::string fps = "30/1";

    bool active() const { return !size.empty(); }

    void add_to(CLI::App& cmd) {
        cmd.add_option("--raw-size", size, "Treat video files as headerless planar YUV of WxH");
        cmd.add_option("--raw-format", format, "Raw chroma layout")->check(CLI::IsMember({"420", "422", "444"}));
        cmd.add_option("--fps", fps, "Raw frame rate N/D");
    }

    vwm::FrameSequence load(const fs::path& path) const {
        if (active()) return vwm::read_raw_yuv(path, vwm::parse_raw_size(size, format, fps));
        return vwm::read_y4m(path);
    }

    void store(const vwm::FrameSequence& seq, const fs::path& path) const {
        if (active())
            vwm::write_raw_yuv(seq, path);
        else
            vwm::write_y4m(seq, path);
    }
};

struct EmbedFlags {
    std::string domain = "frequency";
    double alpha = 0.1;
    int block_size = 8;
    int wm_size = 32;
    std::size_t wm_samples = 0;
    double threshold = 4.0;
    int range = 7;
    std::uint64_t seed = 0;
    std::string generator{vwm::rng::kDefaultGenerator};

    void add_to(CLI::App& cmd, bool with_domain) {
        if (with_domain)
            cmd.add_option("--domain", domain, "Embedding domain")->check(CLI::IsMember({"spatial", "frequency"}));
        cmd.add_option("--alpha", alpha, "Embedding strength");
        cmd.add_option("--block-size", block_size, "Motion block size");
        cmd.add_option("--wm-size", wm_size, "Watermark side (columns)");
        cmd.add_option("--wm-samples", wm_samples, "Watermark sample count, e.g. 512 for a 16x32 pattern");
        cmd.add_option("--threshold", threshold, "Motion threshold on block MAD");
        cmd.add_option("--range", range, "Motion search range");
        cmd.add_option("--seed", seed, "Watermark seed");
        cmd.add_option("--generator", generator, "Watermark generator id")
            ->check(CLI::IsMember({std::string(vwm::rng::kXorshift64Star), std::string(vwm::rng::kMt19937_64)}));
    }

    vwm::RunConfig config() const {
        vwm::RunConfig c;
        c.domain = vwm::parse_domain(domain);
        c.alpha = alpha;
        c.block_size = block_size;
        c.wm_side = wm_size;
        if (wm_samples) c.set_sample_count(wm_samples);
        c.threshold = threshold;
        c.range = range;
        c.seed = seed;
        c.generator_id = generator;
        c.validate();
        return c;
    }
};

struct AttackFlags {
    std::string kind;
    double q = 16.0;
    bool uniform = false;
    int radius = 1;
    double boost = 1.0;
    double drop_ratio = 0.0;
    std::vector<std::size_t> drop_frames;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--kind", kind, "Attack kind")
            ->required()
            ->check(CLI::IsMember({"quant", "lowpass", "highpass", "drop"}));
        add_params(cmd);
        auto* ratio = cmd.add_option("--drop-ratio", drop_ratio, "Fraction of frames to drop");
        auto* frames = cmd.add_option("--drop-frames", drop_frames, "Frame indices to drop")->delimiter(',');
        ratio->excludes(frames);
    }

    void add_params(CLI::App& cmd) {
        cmd.add_option("--q", q, "Quantizer base step");
        cmd.add_flag("--uniform", uniform, "Use a fixed quantizer step instead of the adaptive one");
        cmd.add_option("--radius", radius, "Filter radius");
        cmd.add_option("--boost", boost, "Highpass boost");
    }

    vwm::attacks::AttackSpec spec(vwm::attacks::Kind k) const {
        vwm::attacks::AttackSpec s;
        s.kind = k;
        s.q = q;
        s.adaptive = !uniform;
        s.radius = radius;
        s.boost = boost;
        s.drop_ratio = drop_ratio;
        s.drop_indices = drop_frames;
        s.validate();
        return s;
    }
};

std::string format_delta(double v) { return vwm::detail::fixed(v, 6); }

int run_embed(const fs::path& input, const fs::path& output, const fs::path& manifest, const RawFlags& raw,
              const EmbedFlags& flags) {
    const vwm::RunConfig cfg = flags.config();
    const auto seq = raw.load(input);
    const auto res = vwm::embed_video(seq, cfg);
    raw.store(res.watermarked, output);
    vwm::write_manifest(res.manifest, manifest);
    std::cout << "watermarked " << res.manifest.frames.size() << " of " << seq.size() << " frames, skipped "
              << res.manifest.skipped.size() << "\n";
    std::cout << "psnr " << vwm::detail::fixed(vwm::mean_psnr(seq, res.watermarked, res.manifest), 4) << "\n";
    return vwm::exit_code::ok;
}

int run_attack(const fs::path& input, const fs::path& output, const RawFlags& raw, const AttackFlags& flags) {
    const auto spec = flags.spec(vwm::attacks::parse_kind(flags.kind));
    const auto out = vwm::attacks::apply(spec, raw.load(input));
    raw.store(out, output);
    std::cout << spec.label() << ": " << out.size() << " frames\n";
    return vwm::exit_code::ok;
}

int run_extract(const fs::path& original, const fs::path& suspect, const fs::path& manifest, const RawFlags& raw,
                double detect) {
    const auto man = vwm::read_manifest(manifest);
    const auto res = vwm::extract_video(raw.load(original), raw.load(suspect), man);
    for (const auto& f : res.frames) {
        if (f.dropped)
            std::cout << "frame " << f.index << " dropped\n";
        else
            std::cout << "frame " << f.index << " delta " << format_delta(f.delta) << "\n";
    }
    std::cout << "mean_delta " << format_delta(res.mean_delta) << "\n";
    std::cout << "detected " << (res.surviving > 0 && res.mean_delta >= detect ? "yes" : "no") << "\n";
    return vwm::exit_code::ok;
}

void ensure_directory(const fs::path& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw vwm::IoError("cannot create '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_directory(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw vwm::IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw vwm::IoError("write to '" + path.string() + "' failed");
}

struct EvaluateArgs {
    std::vector<std::string> clips;
    std::vector<std::string> synthetic;
    bool real_valued = false;
    int frames = 30;
    std::vector<std::string> outs;
    std::string manifest_dir;
    std::vector<std::string> domains{"spatial", "frequency"};
    std::vector<std::string> attacks{"quant", "lowpass", "highpass"};
    double detect = 0.5;
};

int run_evaluate(const EvaluateArgs& args, const RawFlags& raw, const EmbedFlags& embed, const AttackFlags& attack) {
    const vwm::RunConfig base = embed.config();
    std::vector<vwm::NamedClip> clips;
    for (const auto& p : args.clips) clips.push_back({fs::path(p).stem().string(), raw.load(p)});
    for (const auto& name : args.synthetic) {
        const vwm::synthetic::ClipSize size{128, 128, args.frames, !args.real_valued};
        clips.push_back({name + (args.real_valued ? "_real" : ""), vwm::synthetic::by_name(name, size)});
    }
    if (clips.empty()) throw vwm::ConfigError("evaluate needs at least one --clip or --synthetic");

    std::vector<vwm::Domain> domains;
    for (const auto& d : args.domains) domains.push_back(vwm::parse_domain(d));
    std::vector<vwm::attacks::AttackSpec> specs;
    for (const auto& a : args.attacks) specs.push_back(attack.spec(vwm::attacks::parse_kind(a)));

    std::vector<std::pair<std::string, vwm::EmbedManifest>> manifests;
    const auto report = vwm::run_experiment(clips, base, domains, specs, args.detect, &manifests);

    for (const auto& out : args.outs) {
        const fs::path p(out);
        write_text(p, p.extension() == ".json" ? vwm::report_json(report) : vwm::report_csv(report));
    }
    if (!args.manifest_dir.empty()) {
        const fs::path dir(args.manifest_dir);
        ensure_directory(dir);
        for (const auto& [name, m] : manifests) vwm::write_manifest(m, dir / (name + ".json"));
    }
    std::cout << vwm::report_table(report);
    return vwm::exit_code::ok;
}

int run_synth(const std::string& name, const fs::path& output, int width, int height, int frames) {
    const auto seq = vwm::synthetic::by_name(name, {width, height, frames, true});
    vwm::write_y4m(seq, output);
    std::cout << name << ": " << width << "x" << height << ", " << frames << " frames\n";
    return vwm::exit_code::ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motion-block video watermarking in the spatial or wavelet domain"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "vwm 0.1.0");

    RawFlags raw;
    EmbedFlags embed_flags;
    AttackFlags attack_flags;
    std::string input, output, manifest, original, suspect;
    double detect = 0.5;

    auto* embed = app.add_subcommand("embed", "Watermark the motion blocks of a video");
    embed->add_option("--input", input, "Source video")->required();
    embed->add_option("--output", output, "Watermarked video")->required();
    embed->add_option("--manifest", manifest, "Manifest JSON to write")->required();
    embed_flags.add_to(*embed, true);
    raw.add_to(*embed);

    auto* attack = app.add_subcommand("attack", "Apply one attack to a video");
    attack->add_option("--input", input, "Video to attack")->required();
    attack->add_option("--output", output, "Attacked video")->required();
    attack_flags.add_to(*attack);
    raw.add_to(*attack);

    auto* extract = app.add_subcommand("extract", "Extract and score the watermark of a suspect video");
    extract->add_option("--original", original, "Original video")->required();
    extract->add_option("--suspect", suspect, "Suspect video")->required();
    extract->add_option("--manifest", manifest, "Manifest JSON from embed")->required();
    extract->add_option("--detect-threshold", detect, "Mean similarity needed to report detection");
    raw.add_to(*extract);

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "Embed, attack and extract over clips; write a report");
    evaluate->add_option("--clip", eval.clips, "Clip to evaluate (repeatable)");
    evaluate->add_option("--synthetic", eval.synthetic, "Bundled synthetic clip (repeatable)")
        ->check(CLI::IsMember({"plasma", "flicker_pan", "pulse", "static"}));
    evaluate->add_flag("--real-valued", eval.real_valued, "Keep synthetic luma unrounded");
    evaluate->add_option("--frames", eval.frames, "Synthetic clip length");
    evaluate->add_option("--out", eval.outs, "Report file, .csv or .json (repeatable)");
    evaluate->add_option("--manifest-dir", eval.manifest_dir, "Directory for per-run manifests");
    evaluate->add_option("--domains", eval.domains, "Domains to compare")->delimiter(',');
    evaluate->add_option("--attacks", eval.attacks, "Attacks to apply")->delimiter(',');
    evaluate->add_option("--detect-threshold", eval.detect, "Mean similarity needed to report detection");
    embed_flags.add_to(*evaluate, false);
    attack_flags.add_params(*evaluate);
    raw.add_to(*evaluate);

    std::string synth_name;
    int synth_w = 128, synth_h = 128, synth_frames = 30;
    auto* synth = app.add_subcommand("synth", "Render a bundled synthetic clip to Y4M");
    synth->add_option("--name", synth_name, "Clip name")
        ->required()
        ->check(CLI::IsMember({"plasma", "flicker_pan", "pulse", "static"}));
    synth->add_option("--output", output, "Output Y4M")->required();
    synth->add_option("--width", synth_w, "Frame width");
    synth->add_option("--height", synth_h, "Frame height");
    synth->add_option("--frames", synth_frames, "Frame count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return vwm::exit_code::config;
    }

    try {
        if (*embed) return run_embed(input, output, manifest, raw, embed_flags);
        if (*attack) return run_attack(input, output, raw, attack_flags);
        if (*extract) return run_extract(original, suspect, manifest, raw, detect);
        if (*evaluate) return run_evaluate(eval, raw, embed_flags, attack_flags);
        if (*synth) return run_synth(synth_name, output, synth_w, synth_h, synth_frames);
    } catch (const vwm::Error& e) {
        std::cerr << "vwm: " << e.what() << "\n";
        return vwm::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "vwm: internal error: " << e.what() << "\n";
        return 1;
    }
    return vwm::exit_code::config;
}
