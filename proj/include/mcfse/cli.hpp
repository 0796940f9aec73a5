#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcfse/evaluate.hpp"
#include "mcfse/loss.hpp"
#include "mcfse/pipeline.hpp"
#include "mcfse/report.hpp"
#include "mcfse/synthetic.hpp"
#include "mcfse/video.hpp"

namespace mcfse::cli {

namespace detail {

inline PixelFormat format_from_name(const std::string& s) {
    if (s == "gray8") return PixelFormat::gray8;
    if (s == "yuv420p") return PixelFormat::yuv420p;
    throw parameter_error("unknown pixel format '" + s + "'");
}

inline int accuracy_from_name(const std::string& s) {
    if (s == "full") return 1;
    if (s == "half") return 2;
    if (s == "quarter") return 4;
    throw parameter_error("accuracy must be full, half or quarter");
}

inline const char* accuracy_name(int d) {
    switch (d) {
        case 1: return "full";
        case 2: return "half";
        case 4: return "quarter";
    }
    return "?";
}

inline LossPattern pattern_from_name(const std::string& s) {
    if (s == "dispersed") return LossPattern::dispersed;
    if (s == "interleaved") return LossPattern::interleaved;
    if (s == "mixed") return LossPattern::mixed;
    throw parameter_error("pattern must be dispersed, interleaved or mixed");
}

struct ConfigFlags {
    std::string algo = "mcfse";
    std::string accuracy = "full";
    ConcealConfig cfg;
    std::string working = "64x64x16";
    CLI::Option* iterations_opt = nullptr;
    CLI::Option* gamma_opt = nullptr;

    void add_to(CLI::App* app) {
        app->add_option("--algo", algo, "concealment algorithm")
            ->check(CLI::IsMember({"tr", "ebma", "dmve", "fse3d", "fse3d-od", "mcfse"}))
            ->capture_default_str();
        app->add_option("--accuracy", accuracy, "motion estimation accuracy")
            ->check(CLI::IsMember({"full", "half", "quarter"}))
            ->capture_default_str();
        app->add_option("--border", cfg.border, "support border width B")->capture_default_str();
        app->add_option("--np", cfg.np, "previous reference frames")->capture_default_str();
        app->add_option("--nf", cfg.nf, "future reference frames")->capture_default_str();
        app->add_option("--rho", cfg.rho_hat, "weighting decay factor")->capture_default_str();
        app->add_option("--delta", cfg.delta, "reliability coefficient for concealed samples")
            ->capture_default_str();
        gamma_opt = app->add_option("--gamma", cfg.gamma, "orthogonality deficiency compensation")
                        ->capture_default_str();
        iterations_opt =
            app->add_option("--iterations", cfg.iterations, "model generation iterations")
                ->capture_default_str();
        app->add_option("--dmax", cfg.d_max, "maximum motion search range (full-pel)")
            ->capture_default_str();
        app->add_option("--decision-border", cfg.decision_border, "decision area ring width")
            ->capture_default_str();
        app->add_option("--tabs", cfg.t_abs, "absolute reliability threshold")
            ->capture_default_str();
        app->add_option("--trel", cfg.t_rel, "relative reliability threshold")
            ->capture_default_str();
        app->add_option("--fft-size", working, "transform working size MxNxP")
            ->capture_default_str();
        app->add_flag("--chroma", cfg.conceal_chroma, "also conceal chroma planes");
    }

    ConcealConfig resolve() const { return resolve_for(algo); }

    ConcealConfig resolve_for(const std::string& algo_name) const {
        ConcealConfig out = cfg;
        out.algorithm = mcfse::detail::algorithm_from_name(algo_name);
        out.accuracy = accuracy_from_name(accuracy);
        const auto dims = mcfse::detail::split(working, 'x');
        if (dims.size() != 3) throw parameter_error("--fft-size must look like 64x64x16");
        out.working = {static_cast<int>(mcfse::detail::parse_int(dims[0])),
                       static_cast<int>(mcfse::detail::parse_int(dims[1])),
                       static_cast<int>(mcfse::detail::parse_int(dims[2]))};
        if (out.algorithm == Algorithm::fse3d) {
            if (!iterations_opt || iterations_opt->count() == 0) out.iterations = 200;
            if (!gamma_opt || gamma_opt->count() == 0) out.gamma = 1.0;
        }
        return out;
    }
};

struct CorruptParams {
    std::string input;
    bool synthetic = false;
    int width = 0;
    int height = 0;
    std::string format = "gray8";
    int frames = 5;
    std::uint64_t seed = 1;
    double shift_x = 0.0;
    double shift_y = 0.0;
    double noise = 0.0;
    int waves = 24;
    double amplitude = 96.0;
    double max_freq = 0.25;
    std::string pattern = "dispersed";
    std::string error_frames;
    int error_period = 1;
    int error_start = 1;
    int fill = 128;
    std::string output_video;
    std::string output_mask;
    std::string output_original;
};

inline std::vector<int> resolve_error_frames(const CorruptParams& p, int frame_count) {
    std::vector<int> frames;
    if (!p.error_frames.empty()) {
        for (const auto part : mcfse::detail::split(p.error_frames, ','))
            frames.push_back(static_cast<int>(mcfse::detail::parse_int(part)));
    } else {
        if (p.error_period < 1) throw parameter_error("--error-period must be >= 1");
        for (int t = p.error_start; t < frame_count; t += p.error_period) frames.push_back(t);
    }
    return frames;
}

/// corrupt: load or synthesize a clip, imprint a loss pattern, write the
/// distorted video and its mask (and the pristine original for synthetic runs).
inline void do_corrupt(const CorruptParams& p) {
    VideoSequence seq;
    if (p.synthetic) {
        SyntheticConfig sc;
        sc.width = p.width;
        sc.height = p.height;
        sc.frames = p.frames;
        sc.seed = p.seed;
        sc.shift_x = p.shift_x;
        sc.shift_y = p.shift_y;
        sc.noise_sigma = p.noise;
        sc.waves = p.waves;
        sc.amplitude = p.amplitude;
        sc.max_frequency = p.max_freq;
        seq = make_synthetic_sequence(sc);
    } else {
        seq = read_raw_video(p.input, p.width, p.height, format_from_name(p.format));
    }

    const auto error_frames = resolve_error_frames(p, seq.frame_count);
    std::vector<bool> toggle(error_frames.size());
    for (std::size_t i = 0; i < toggle.size(); ++i) toggle[i] = (i % 2) == 1;

    const LossMask mask = generate_pattern(pattern_from_name(p.pattern), seq.width, seq.height,
                                           seq.frame_count, error_frames, toggle);
    const VideoSequence distorted =
        apply_loss(seq, mask, static_cast<std::uint8_t>(clamp_int(p.fill, 0, 255)));

    write_raw_video(distorted, p.output_video);
    write_mask(mask, p.output_mask);
    if (!p.output_original.empty()) write_raw_video(seq, p.output_original);
}

struct ConcealParams {
    std::string input;
    std::string mask;
    int width = 0;
    int height = 0;
    std::string format = "gray8";
    std::string output;
    std::string report;
    bool timing = false;
    ConcealConfig cfg;
};

inline RunReport do_conceal(const ConcealParams& p) {
    const VideoSequence distorted =
        read_raw_video(p.input, p.width, p.height, format_from_name(p.format));
    const LossMask mask = read_mask(p.mask, p.width, p.height);
    auto [concealed, report] = conceal_sequence(distorted, mask, p.cfg);
    write_raw_video(concealed, p.output);
    if (!p.report.empty()) emit_report(report, std::filesystem::path(p.report), p.timing);
    return report;
}

struct EvaluateParams {
    std::string reference;
    std::string test;
    std::string mask;
    int width = 0;
    int height = 0;
    std::string format = "gray8";
    std::string report;
    bool per_frame = false;
};

inline RegionPsnr do_evaluate(const EvaluateParams& p) {
    const PixelFormat fmt = format_from_name(p.format);
    const VideoSequence reference = read_raw_video(p.reference, p.width, p.height, fmt);
    const VideoSequence test = read_raw_video(p.test, p.width, p.height, fmt);
    SampleRegion region = p.mask.empty()
                              ? SampleRegion::all(p.width, p.height, reference.frame_count)
                              : SampleRegion::lost_of(read_mask(p.mask, p.width, p.height));
    const RegionPsnr psnr = psnr_region(reference, test, region);

    std::printf("aggregate %.2f dB over %llu samples\n", psnr.aggregate_db,
                static_cast<unsigned long long>(psnr.samples));
    if (p.per_frame)
        for (const auto& f : psnr.frames)
            std::printf("frame %d  %.2f dB  (%llu samples)\n", f.frame, f.psnr_db,
                        static_cast<unsigned long long>(f.samples));
    if (!p.report.empty()) {
        RunReport report;
        report.width = p.width;
        report.height = p.height;
        report.frames = reference.frame_count;
        report.psnr = psnr;
        emit_report(report, std::filesystem::path(p.report));
    }
    return psnr;
}

struct PipelineParams {
    CorruptParams corrupt;
    std::string algos = "mcfse";
    std::string workdir = ".";
    std::string table;
};

/// pipeline: corrupt, then conceal with each requested algorithm, then
/// evaluate over the lost regions; bit-identical to running the three
/// subcommands manually on the same paths.
inline void do_pipeline(const PipelineParams& p, const ConfigFlags& flags) {
    namespace fs = std::filesystem;
    fs::create_directories(p.workdir);
    CorruptParams cp = p.corrupt;
    cp.output_video = (fs::path(p.workdir) / "distorted.raw").string();
    cp.output_mask = (fs::path(p.workdir) / "mask.raw").string();
    if (cp.synthetic && cp.output_original.empty())
        cp.output_original = (fs::path(p.workdir) / "original.raw").string();
    do_corrupt(cp);
    const std::string reference = cp.synthetic ? cp.output_original : cp.input;

    struct Row {
        std::string algo;
        std::string accuracy;
        RegionPsnr psnr;
    };
    std::vector<Row> rows;
    for (const auto entry : mcfse::detail::split(p.algos, ',')) {
        const auto parts = mcfse::detail::split(entry, ':');
        if (parts.empty() || parts.size() > 2) throw parameter_error("bad --algos entry");
        const std::string algo(parts[0]);
        const std::string accuracy(parts.size() == 2 ? std::string(parts[1]) : flags.accuracy);

        ConcealParams conceal;
        conceal.input = cp.output_video;
        conceal.mask = cp.output_mask;
        conceal.width = cp.width;
        conceal.height = cp.height;
        conceal.format = cp.synthetic ? "gray8" : cp.format;
        const std::string tag = algo + "-" + accuracy;
        conceal.output = (fs::path(p.workdir) / ("concealed_" + tag + ".raw")).string();
        conceal.report = (fs::path(p.workdir) / ("report_" + tag + ".txt")).string();
        conceal.cfg = flags.resolve_for(algo);
        conceal.cfg.accuracy = accuracy_from_name(accuracy);
        RunReport report = do_conceal(conceal);

        EvaluateParams ev;
        ev.reference = reference;
        ev.test = conceal.output;
        ev.mask = cp.output_mask;
        ev.width = cp.width;
        ev.height = cp.height;
        ev.format = conceal.format;
        const RegionPsnr psnr = do_evaluate(ev);

        report.psnr = psnr;
        emit_report(report, fs::path(conceal.report));
        rows.push_back({algo, accuracy, psnr});
    }

    std::printf("%-10s %-8s %10s %12s\n", "algorithm", "accuracy", "psnr_db", "samples");
    for (const auto& row : rows)
        std::printf("%-10s %-8s %10.2f %12llu\n", row.algo.c_str(), row.accuracy.c_str(),
                    row.psnr.aggregate_db, static_cast<unsigned long long>(row.psnr.samples));

    if (!p.table.empty()) {
        std::ofstream out(p.table, std::ios::trunc);
        if (!out) throw io_error("cannot open " + p.table + " for writing");
        out << "algorithm,accuracy,psnr_db,samples\n";
        for (const auto& row : rows)
            out << row.algo << ',' << row.accuracy << ','
                << mcfse::detail::fmt_double(row.psnr.aggregate_db) << ',' << row.psnr.samples
                << '\n';
    }
}

inline void add_video_flags(CLI::App* app, int& width, int& height, std::string& format) {
    app->add_option("--width", width, "frame width in samples")->required();
    app->add_option("--height", height, "frame height in samples")->required();
    app->add_option("--format", format, "pixel format")
        ->check(CLI::IsMember({"gray8", "yuv420p"}))
        ->capture_default_str();
}

inline void add_corrupt_flags(CLI::App* app, CorruptParams& p, bool outputs_required) {
    app->add_option("--input", p.input, "raw input video");
    app->add_flag("--synthetic", p.synthetic, "generate a synthetic clip instead of reading one");
    add_video_flags(app, p.width, p.height, p.format);
    app->add_option("--frames", p.frames, "synthetic clip length")->capture_default_str();
    app->add_option("--seed", p.seed, "synthetic generator seed")->capture_default_str();
    app->add_option("--shift-x", p.shift_x, "synthetic translation per frame, x")
        ->capture_default_str();
    app->add_option("--shift-y", p.shift_y, "synthetic translation per frame, y")
        ->capture_default_str();
    app->add_option("--noise", p.noise, "synthetic per-frame noise sigma")->capture_default_str();
    app->add_option("--waves", p.waves, "synthetic texture component count")->capture_default_str();
    app->add_option("--amplitude", p.amplitude, "synthetic texture amplitude")
        ->capture_default_str();
    app->add_option("--max-freq", p.max_freq, "synthetic texture bandwidth, cycles/sample")
        ->capture_default_str();
    app->add_option("--pattern", p.pattern, "loss pattern")
        ->check(CLI::IsMember({"dispersed", "interleaved", "mixed"}))
        ->capture_default_str();
    app->add_option("--error-frames", p.error_frames, "explicit error frame list, e.g. 2,5,8");
    app->add_option("--error-period", p.error_period, "imprint errors every Nth frame")
        ->capture_default_str();
    app->add_option("--error-start", p.error_start, "first error frame")->capture_default_str();
    app->add_option("--fill", p.fill, "fill value for lost samples")->capture_default_str();
    auto* ov = app->add_option("--output-video", p.output_video, "distorted video path");
    auto* om = app->add_option("--output-mask", p.output_mask, "loss mask path");
    if (outputs_required) {
        ov->required();
        om->required();
    }
    app->add_option("--output-original", p.output_original,
                    "pristine clip path (synthetic runs)");
}

}  // namespace detail

/// Entry point shared by the mcfse tool and the test suites; args exclude the
/// program name.
inline int run(std::vector<std::string> args) {
    CLI::App app{"video error concealment toolkit"};
    app.require_subcommand(1);

    detail::CorruptParams corrupt_params;
    CLI::App* corrupt = app.add_subcommand("corrupt", "imprint loss patterns on a clip");
    detail::add_corrupt_flags(corrupt, corrupt_params, true);

    detail::ConcealParams conceal_params;
    detail::ConfigFlags conceal_flags;
    CLI::App* conceal = app.add_subcommand("conceal", "conceal lost blocks");
    conceal->add_option("--input", conceal_params.input, "distorted raw video")->required();
    conceal->add_option("--mask", conceal_params.mask, "loss mask path")->required();
    detail::add_video_flags(conceal, conceal_params.width, conceal_params.height,
                            conceal_params.format);
    conceal->add_option("--output", conceal_params.output, "concealed video path")->required();
    conceal->add_option("--report", conceal_params.report, "run report path");
    conceal->add_flag("--timing", conceal_params.timing, "include per-block timing in the report");
    conceal_flags.add_to(conceal);

    detail::EvaluateParams evaluate_params;
    CLI::App* evaluate = app.add_subcommand("evaluate", "region-restricted PSNR");
    evaluate->add_option("--reference", evaluate_params.reference, "reference video")->required();
    evaluate->add_option("--test", evaluate_params.test, "video under test")->required();
    evaluate->add_option("--mask", evaluate_params.mask,
                         "loss mask; evaluation restricted to lost samples");
    detail::add_video_flags(evaluate, evaluate_params.width, evaluate_params.height,
                            evaluate_params.format);
    evaluate->add_option("--report", evaluate_params.report, "report path");
    evaluate->add_flag("--per-frame", evaluate_params.per_frame, "print the per-frame series");

    detail::PipelineParams pipeline_params;
    detail::ConfigFlags pipeline_flags;
    CLI::App* pipeline = app.add_subcommand("pipeline", "corrupt, conceal and evaluate in one go");
    detail::add_corrupt_flags(pipeline, pipeline_params.corrupt, false);
    pipeline->add_option("--algos", pipeline_params.algos,
                         "comma list of algorithms, each optionally algo:accuracy")
        ->capture_default_str();
    pipeline->add_option("--workdir", pipeline_params.workdir, "directory for intermediates")
        ->capture_default_str();
    pipeline->add_option("--table", pipeline_params.table, "comparison table CSV path");
    pipeline_flags.add_to(pipeline);

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (corrupt->parsed()) {
            if (corrupt_params.synthetic != corrupt_params.input.empty())
                throw parameter_error("pass exactly one of --input and --synthetic");
            detail::do_corrupt(corrupt_params);
        } else if (conceal->parsed()) {
            conceal_params.cfg = conceal_flags.resolve();
            detail::do_conceal(conceal_params);
        } else if (evaluate->parsed()) {
            detail::do_evaluate(evaluate_params);
        } else if (pipeline->parsed()) {
            if (pipeline_params.corrupt.synthetic != pipeline_params.corrupt.input.empty())
                throw parameter_error("pass exactly one of --input and --synthetic");
            detail::do_pipeline(pipeline_params, pipeline_flags);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace mcfse::cli
