#pragma once

#include <cmath>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/motion.hpp"
#include "mcfse/volume.hpp"

namespace mcfse {

/// Replacement content for one lost block, with where it came from.
struct ConcealedBlock {
    int lx = 0;
    int ly = 0;
    std::vector<double> samples;  // row-major, already in [0, 255]
    int kappa = 0;                // chosen reference offset (0 = none/co-located)
    int dx = 0;                   // chosen displacement, 1/D-pel units
    int dy = 0;

    double at(int i, int j) const { return samples[static_cast<std::size_t>(j) * lx + i]; }
};

namespace detail {

inline ConcealedBlock extract_displaced(const UpsampledPlane& up, const LossBlock& block,
                                        const MotionEstimate& mv) {
    ConcealedBlock out;
    out.lx = block.lx;
    out.ly = block.ly;
    out.kappa = mv.kappa;
    out.dx = mv.dx;
    out.dy = mv.dy;
    out.samples.resize(static_cast<std::size_t>(block.lx) * block.ly);
    const int d = up.factor;
    for (int j = 0; j < block.ly; ++j)
        for (int i = 0; i < block.lx; ++i) {
            const double v = up.at_clamped(d * (block.x0 + i) + mv.dx, d * (block.y0 + j) + mv.dy);
            out.samples[static_cast<std::size_t>(j) * block.lx + i] =
                static_cast<double>(clamp_int(static_cast<int>(std::lround(v)), 0, 255));
        }
    return out;
}

// Reference offsets a temporal baseline may search: the previous frame, plus
// the future frame in bi-temporal mode.
inline std::vector<int> baseline_kappas(const LossBlock& block, int frame_count, bool bi_temporal) {
    std::vector<int> kappas;
    if (block.frame >= 1) kappas.push_back(-1);
    if (bi_temporal && block.frame + 1 < frame_count) kappas.push_back(+1);
    if (kappas.empty()) throw no_reference_error("no reference frame available");
    return kappas;
}

}  // namespace detail

/// Temporal Replacement: the co-located block from the previous frame (its
/// concealed version if that frame was concealed earlier in the run).
inline ConcealedBlock tr_conceal(const VideoSequence& seq, const LossBlock& block) {
    if (block.frame < 1) throw no_reference_error("temporal replacement needs a previous frame");
    ConcealedBlock out;
    out.lx = block.lx;
    out.ly = block.ly;
    out.kappa = -1;
    out.samples.resize(static_cast<std::size_t>(block.lx) * block.ly);
    for (int j = 0; j < block.ly; ++j)
        for (int i = 0; i < block.lx; ++i)
            out.samples[static_cast<std::size_t>(j) * block.lx + i] =
                static_cast<double>(seq.luma_at(block.x0 + i, block.y0 + j, block.frame - 1));
    return out;
}

/// Decoder Motion Vector Estimation: matches the decision area around the loss
/// against its displaced image in the previous (and, bi-temporally, the
/// future) frame, then replaces the block from the winning reference at
/// sub-pel precision.
inline ConcealedBlock dmve_conceal(const VideoSequence& seq, const ConcealState& state,
                                   UpsampleCache& cache, const LossBlock& block, int d_max,
                                   int factor, int decision_border, bool bi_temporal) {
    const DecisionArea area = make_decision_area(state, block, decision_border);
    const auto kappas = detail::baseline_kappas(block, seq.frame_count, bi_temporal);

    MotionEstimate best;
    bool have = false;
    for (int kappa : kappas) {
        MotionEstimate est = estimate_motion(seq, block.frame, cache.get(block.frame + kappa, factor),
                                             area, d_max);
        if (!have || est.error < best.error) {
            best = est;
            have = true;
        }
    }
    return detail::extract_displaced(cache.get(block.frame + best.kappa, factor), block, best);
}

/// Extended Boundary Matching: minimizes the squared error of the one-pel
/// outer ring around the loss against the candidate block's ring in the
/// reference, then replaces the block with the winning candidate.
inline ConcealedBlock ebma_conceal(const VideoSequence& seq, const ConcealState& state,
                                   UpsampleCache& cache, const LossBlock& block, int d_max,
                                   int factor, bool bi_temporal, int ring_width = 1) {
    const DecisionArea ring = make_decision_area(state, block, ring_width);
    if (ring.empty()) throw empty_area_error("boundary ring has no received samples");
    const auto kappas = detail::baseline_kappas(block, seq.frame_count, bi_temporal);

    MotionEstimate best;
    bool have = false;
    for (int kappa : kappas) {
        MotionEstimate est = estimate_motion(seq, block.frame, cache.get(block.frame + kappa, factor),
                                             ring, d_max);
        if (!have || est.error < best.error) {
            best = est;
            have = true;
        }
    }
    return detail::extract_displaced(cache.get(block.frame + best.kappa, factor), block, best);
}

}  // namespace mcfse
