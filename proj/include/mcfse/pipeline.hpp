#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcfse/baselines.hpp"
#include "mcfse/common.hpp"
#include "mcfse/evaluate.hpp"
#include "mcfse/fse.hpp"
#include "mcfse/loss.hpp"
#include "mcfse/motion.hpp"
#include "mcfse/video.hpp"
#include "mcfse/volume.hpp"

namespace mcfse {

enum class Algorithm { tr, ebma, dmve, fse3d, fse3d_od, mcfse };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::tr: return "tr";
        case Algorithm::ebma: return "ebma";
        case Algorithm::dmve: return "dmve";
        case Algorithm::fse3d: return "fse3d";
        case Algorithm::fse3d_od: return "fse3d-od";
        case Algorithm::mcfse: return "mcfse";
    }
    return "?";
}

struct ConcealConfig {
    Algorithm algorithm = Algorithm::mcfse;
    int accuracy = 1;  // upsampling factor D: 1 full-, 2 half-, 4 quarter-pel
    int border = 16;   // B
    int np = 2;
    int nf = 0;
    double rho_hat = 0.8;
    double delta = 0.2;
    double gamma = 0.7;
    int iterations = 800;
    int d_max = 16;
    int decision_border = 4;
    double t_abs = 10.0;
    double t_rel = 3.0;
    GridDims working = kDefaultWorkingGrid;
    bool conceal_chroma = false;

    /// Per-algorithm defaults: the uncompensated variant runs 200 iterations
    /// at gamma = 1; everything else uses 800 iterations at gamma = 0.7.
    static ConcealConfig defaults_for(Algorithm a) {
        ConcealConfig cfg;
        cfg.algorithm = a;
        if (a == Algorithm::fse3d) {
            cfg.iterations = 200;
            cfg.gamma = 1.0;
        }
        return cfg;
    }

    friend bool operator==(const ConcealConfig&, const ConcealConfig&) = default;
};

enum class BlockPath {
    mcfse_aligned,  // motion accepted, model on the aligned volume
    mcfse_fixed,    // motion rejected or unavailable, model on the fixed volume
    fse_fixed,      // plain fixed-volume model generation
    tr,
    ebma,
    dmve,
    tr_fallback,    // primary path failed, co-located copy used instead
    fill_retain     // nothing applicable, fill value kept
};

inline const char* block_path_name(BlockPath p) {
    switch (p) {
        case BlockPath::mcfse_aligned: return "mcfse-aligned";
        case BlockPath::mcfse_fixed: return "mcfse-fixed";
        case BlockPath::fse_fixed: return "fse-fixed";
        case BlockPath::tr: return "tr";
        case BlockPath::ebma: return "ebma";
        case BlockPath::dmve: return "dmve";
        case BlockPath::tr_fallback: return "tr-fallback";
        case BlockPath::fill_retain: return "fill-retain";
    }
    return "?";
}

enum class Verdict { na, rejected, passed };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::na: return "na";
        case Verdict::rejected: return "reject";
        case Verdict::passed: return "pass";
    }
    return "?";
}

inline bool motion_estimate_equal(const MotionEstimate& a, const MotionEstimate& b) {
    return a.kappa == b.kappa && a.dx == b.dx && a.dy == b.dy && a.error == b.error;
}

struct BlockRecord {
    LossBlock block;
    BlockPath path = BlockPath::fill_retain;
    Verdict reliability = Verdict::na;
    std::vector<MotionEstimate> vectors;
    double time_ms = 0.0;
    std::string note;

    friend bool operator==(const BlockRecord& a, const BlockRecord& b) {
        if (!(a.block.x0 == b.block.x0 && a.block.y0 == b.block.y0 && a.block.lx == b.block.lx &&
              a.block.ly == b.block.ly && a.block.frame == b.block.frame))
            return false;
        if (a.path != b.path || a.reliability != b.reliability || a.time_ms != b.time_ms ||
            a.note != b.note || a.vectors.size() != b.vectors.size())
            return false;
        for (std::size_t i = 0; i < a.vectors.size(); ++i)
            if (!motion_estimate_equal(a.vectors[i], b.vectors[i])) return false;
        return true;
    }
};

struct FrameStats {
    int frame = 0;
    int blocks = 0;
    int discarded = 0;  // blocks that did not take the aligned path
    double discarded_pct = 0.0;

    friend bool operator==(const FrameStats&, const FrameStats&) = default;
};

struct RunReport {
    ConcealConfig config;
    int width = 0;
    int height = 0;
    int frames = 0;
    std::vector<BlockRecord> blocks;
    std::vector<FrameStats> frame_stats;
    std::optional<RegionPsnr> psnr;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

namespace detail {

inline GridDims halved_working(GridDims g) {
    return {std::max(g.m / 2, 16), std::max(g.n / 2, 16), g.p};
}

struct PlaneContext {
    VideoSequence* work = nullptr;
    ConcealState* state = nullptr;
    UpsampleCache* cache = nullptr;
    const ConcealConfig* cfg = nullptr;
};

inline std::vector<VolumeCoord> lost_coords_in_block(const ConcealState& state,
                                                     const LossBlock& block, int border, int np) {
    std::vector<VolumeCoord> coords;
    for (int j = 0; j < block.ly; ++j)
        for (int i = 0; i < block.lx; ++i)
            if (state.at(block.x0 + i, block.y0 + j, block.frame) == SampleState::lost)
                coords.push_back({border + i, border + j, np});
    return coords;
}

inline void commit_samples(PlaneContext& ctx, const LossBlock& block,
                           const std::vector<std::pair<int, int>>& positions,
                           const std::vector<double>& values) {
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const auto [x, y] = positions[i];
        ctx.work->luma_at(x, y, block.frame) = static_cast<std::uint8_t>(
            clamp_int(static_cast<int>(std::lround(values[i])), 0, 255));
        ctx.state->set(x, y, block.frame, SampleState::concealed);
    }
    ctx.cache->invalidate(block.frame);
}

inline std::vector<std::pair<int, int>> lost_positions(const ConcealState& state,
                                                       const LossBlock& block) {
    std::vector<std::pair<int, int>> pos;
    for (int j = 0; j < block.ly; ++j)
        for (int i = 0; i < block.lx; ++i)
            if (state.at(block.x0 + i, block.y0 + j, block.frame) == SampleState::lost)
                pos.emplace_back(block.x0 + i, block.y0 + j);
    return pos;
}

inline void commit_block(PlaneContext& ctx, const LossBlock& block, const ConcealedBlock& cb) {
    const auto positions = lost_positions(*ctx.state, block);
    std::vector<double> values;
    values.reserve(positions.size());
    for (const auto& [x, y] : positions) values.push_back(cb.at(x - block.x0, y - block.y0));
    commit_samples(ctx, block, positions, values);
}

inline void run_fse_on_volume(PlaneContext& ctx, const LossBlock& block,
                              const ExtrapolationVolume& vol) {
    const ConcealConfig& cfg = *ctx.cfg;
    const WeightVolume wv = build_weight_volume(vol, cfg.rho_hat, cfg.delta);
    ModelParams params;
    params.iterations = cfg.iterations;
    params.gamma = cfg.gamma;
    params.working = cfg.working;
    const SparseModel model = generate_model(vol, wv, params);

    const auto coords = lost_coords_in_block(*ctx.state, block, cfg.border, vol.geom.np);
    const auto values = evaluate_model(model, coords);
    const auto positions = lost_positions(*ctx.state, block);
    commit_samples(ctx, block, positions, values);
}

inline BlockRecord conceal_one_block(PlaneContext& ctx, const LossBlock& block) {
    const ConcealConfig& cfg = *ctx.cfg;
    BlockRecord rec;
    rec.block = block;
    const auto start = std::chrono::steady_clock::now();

    try {
        switch (cfg.algorithm) {
            case Algorithm::tr: {
                commit_block(ctx, block, tr_conceal(*ctx.work, block));
                rec.path = BlockPath::tr;
                break;
            }
            case Algorithm::ebma: {
                commit_block(ctx, block,
                             ebma_conceal(*ctx.work, *ctx.state, *ctx.cache, block, cfg.d_max,
                                          cfg.accuracy, cfg.nf >= 1));
                rec.path = BlockPath::ebma;
                break;
            }
            case Algorithm::dmve: {
                const ConcealedBlock cb =
                    dmve_conceal(*ctx.work, *ctx.state, *ctx.cache, block, cfg.d_max, cfg.accuracy,
                                 cfg.decision_border, cfg.nf >= 1);
                rec.vectors.push_back({cb.kappa, cb.dx, cb.dy, 0.0});
                commit_block(ctx, block, cb);
                rec.path = BlockPath::dmve;
                break;
            }
            case Algorithm::fse3d:
            case Algorithm::fse3d_od: {
                run_fse_on_volume(ctx, block,
                                  build_fixed_volume(*ctx.work, *ctx.state, block, cfg.border,
                                                     cfg.np, cfg.nf));
                rec.path = BlockPath::fse_fixed;
                break;
            }
            case Algorithm::mcfse: {
                const auto kappas =
                    reference_offsets(block.frame, ctx.work->frame_count, cfg.np, cfg.nf);
                bool aligned = false;
                if (!kappas.empty()) {
                    const DecisionArea area =
                        make_decision_area(*ctx.state, block, cfg.decision_border);
                    if (!area.empty()) {
                        for (int kappa : kappas) {
                            MotionEstimate est = estimate_motion(
                                *ctx.work, block.frame,
                                ctx.cache->get(block.frame + kappa, cfg.accuracy), area, cfg.d_max);
                            rec.vectors.push_back(est);
                        }
                        const bool reliable =
                            check_reliability(rec.vectors, area.size(), {cfg.t_abs, cfg.t_rel});
                        rec.reliability = reliable ? Verdict::passed : Verdict::rejected;
                        if (reliable) {
                            std::vector<const UpsampledPlane*> refs;
                            for (const auto& est : rec.vectors)
                                refs.push_back(
                                    &ctx.cache->get(block.frame + est.kappa, cfg.accuracy));
                            run_fse_on_volume(ctx, block,
                                              build_aligned_volume(*ctx.work, *ctx.state, refs,
                                                                   rec.vectors, block, cfg.border));
                            aligned = true;
                        }
                    } else {
                        rec.note = "empty decision area";
                    }
                } else {
                    rec.note = "no reference frames";
                }
                if (!aligned)
                    run_fse_on_volume(ctx, block,
                                      build_fixed_volume(*ctx.work, *ctx.state, block, cfg.border,
                                                         cfg.np, cfg.nf));
                rec.path = aligned ? BlockPath::mcfse_aligned : BlockPath::mcfse_fixed;
                break;
            }
        }
    } catch (const error& primary) {
        // fallback chain: co-located copy, then keeping the fill
        std::string why = primary.what();
        for (char& c : why)
            if (c == ',' || c == '\n' || c == '\r') c = ';';
        try {
            commit_block(ctx, block, tr_conceal(*ctx.work, block));
            rec.path = BlockPath::tr_fallback;
            rec.note = why;
        } catch (const error&) {
            rec.path = BlockPath::fill_retain;
            rec.note = why;
        }
    }

    rec.time_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    return rec;
}

inline void conceal_plane(VideoSequence& work, const LossMask& mask, const ConcealConfig& cfg,
                          int block_size, std::vector<BlockRecord>* records) {
    ConcealState state = ConcealState::from_mask(mask);
    UpsampleCache cache(work);
    PlaneContext ctx{&work, &state, &cache, &cfg};
    for (int t = 0; t < work.frame_count; ++t) {
        for (const LossBlock& block : enumerate_blocks(mask, t, block_size)) {
            BlockRecord rec = conceal_one_block(ctx, block);
            if (records) records->push_back(std::move(rec));
        }
    }
}

inline LossMask chroma_mask_of(const LossMask& luma, int cw, int ch) {
    LossMask m = LossMask::all_received(cw, ch, luma.frame_count);
    for (int t = 0; t < luma.frame_count; ++t)
        for (int cy = 0; cy < ch; ++cy)
            for (int cx = 0; cx < cw; ++cx)
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        if (!luma.is_received(std::min(2 * cx + dx, luma.width - 1),
                                              std::min(2 * cy + dy, luma.height - 1), t))
                            m.set_lost(cx, cy, t);
    return m;
}

}  // namespace detail

/// Conceals every lost block of the sequence: frames in temporal order, blocks
/// in raster order within a frame. Concealed samples become references for
/// later blocks and frames. Per-block failures fall back (fixed volume, then
/// co-located copy, then retained fill) and are recorded, never aborting the
/// run. Chroma planes, when enabled, run the same pipeline at subsampled
/// resolution with length parameters halved.
inline std::pair<VideoSequence, RunReport> conceal_sequence(const VideoSequence& distorted,
                                                            const LossMask& mask,
                                                            const ConcealConfig& cfg) {
    if (!mask.matches(distorted)) throw dimension_error("mask dimensions do not match sequence");
    if (cfg.accuracy != 1 && cfg.accuracy != 2 && cfg.accuracy != 4)
        throw parameter_error("accuracy must be 1, 2 or 4");
    if (cfg.border < 1) throw parameter_error("border must be positive");

    VideoSequence work = distorted;
    RunReport report;
    report.config = cfg;
    report.width = distorted.width;
    report.height = distorted.height;
    report.frames = distorted.frame_count;

    detail::conceal_plane(work, mask, cfg, kMacroblockSize, &report.blocks);

    if (cfg.conceal_chroma && work.has_chroma) {
        ConcealConfig ccfg = cfg;
        ccfg.border = (cfg.border + 1) / 2;
        ccfg.d_max = (cfg.d_max + 1) / 2;
        ccfg.decision_border = (cfg.decision_border + 1) / 2;
        ccfg.working = detail::halved_working(cfg.working);
        ccfg.conceal_chroma = false;
        const int cw = work.chroma_width();
        const int ch = work.chroma_height();
        const LossMask cmask = detail::chroma_mask_of(mask, cw, ch);
        for (auto* plane : {&work.cb, &work.cr}) {
            VideoSequence sub;
            sub.width = cw;
            sub.height = ch;
            sub.frame_count = work.frame_count;
            sub.luma = *plane;
            detail::conceal_plane(sub, cmask, ccfg, kMacroblockSize / 2, nullptr);
            *plane = std::move(sub.luma);
        }
    }

    // per-frame discarded-vector statistics
    std::map<int, FrameStats> stats;
    for (const auto& rec : report.blocks) {
        FrameStats& fs = stats[rec.block.frame];
        fs.frame = rec.block.frame;
        fs.blocks += 1;
        if (cfg.algorithm == Algorithm::mcfse && rec.path != BlockPath::mcfse_aligned)
            fs.discarded += 1;
    }
    for (auto& [t, fs] : stats) {
        fs.discarded_pct =
            fs.blocks > 0 ? 100.0 * static_cast<double>(fs.discarded) / fs.blocks : 0.0;
        report.frame_stats.push_back(fs);
    }
    return {std::move(work), std::move(report)};
}

/// Single-block entry point used by tests and tools; shares the sequence-level
/// machinery but conceals just one enumerated block.
inline BlockRecord conceal_block(VideoSequence& work, ConcealState& state, UpsampleCache& cache,
                                 const LossBlock& block, const ConcealConfig& cfg) {
    detail::PlaneContext ctx{&work, &state, &cache, &cfg};
    return detail::conceal_one_block(ctx, block);
}

}  // namespace mcfse
