#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/volume.hpp"

namespace mcfse {

/// Real-valued plane on the D-times oversampled grid; full-pel samples sit at
/// (Dx, Dy) unchanged. Half-pel positions come from the 6-tap filter
/// (1,-5,20,20,-5,1)/32 applied horizontally then vertically with margin
/// replication; quarter-pel positions from bilinear interpolation of the
/// half-pel grid. No rounding anywhere.
struct UpsampledPlane {
    int width = 0;
    int height = 0;
    int factor = 1;
    int frame = 0;
    std::vector<double> s;

    double at(int x, int y) const { return s[static_cast<std::size_t>(y) * width + x]; }
    double at_clamped(int x, int y) const {
        return at(clamp_int(x, 0, width - 1), clamp_int(y, 0, height - 1));
    }
};

namespace detail {

inline double six_tap(const std::vector<double>& row, int stride, int count, int left) {
    static constexpr double taps[6] = {1.0, -5.0, 20.0, 20.0, -5.0, 1.0};
    double acc = 0.0;
    for (int i = 0; i < 6; ++i)
        acc += taps[i] * row[static_cast<std::size_t>(clamp_int(left - 2 + i, 0, count - 1)) * stride];
    return acc / 32.0;
}

// One separable doubling pass: inserts 6-tap midpoints between samples.
inline std::vector<double> double_six_tap(const std::vector<double>& in, int w, int h, int& ow,
                                          int& oh) {
    const int w2 = 2 * (w - 1) + 1;
    std::vector<double> horiz(static_cast<std::size_t>(w2) * h);
    parallel_for(0, h, [&](int y) {
        std::vector<double> src(static_cast<std::size_t>(w));
        for (int x = 0; x < w; ++x) src[static_cast<std::size_t>(x)] = in[static_cast<std::size_t>(y) * w + x];
        for (int x = 0; x < w; ++x) horiz[static_cast<std::size_t>(y) * w2 + 2 * x] = src[static_cast<std::size_t>(x)];
        for (int x = 0; x + 1 < w; ++x)
            horiz[static_cast<std::size_t>(y) * w2 + 2 * x + 1] = six_tap(src, 1, w, x);
    });
    const int h2 = 2 * (h - 1) + 1;
    std::vector<double> out(static_cast<std::size_t>(w2) * h2);
    parallel_for(0, w2, [&](int x) {
        std::vector<double> col(static_cast<std::size_t>(h));
        for (int y = 0; y < h; ++y) col[static_cast<std::size_t>(y)] = horiz[static_cast<std::size_t>(y) * w2 + x];
        for (int y = 0; y < h; ++y) out[static_cast<std::size_t>(2 * y) * w2 + x] = col[static_cast<std::size_t>(y)];
        for (int y = 0; y + 1 < h; ++y) out[static_cast<std::size_t>(2 * y + 1) * w2 + x] = six_tap(col, 1, h, y);
    });
    ow = w2;
    oh = h2;
    return out;
}

// One separable doubling pass with bilinear midpoints.
inline std::vector<double> double_bilinear(const std::vector<double>& in, int w, int h, int& ow,
                                           int& oh) {
    const int w2 = 2 * (w - 1) + 1;
    std::vector<double> horiz(static_cast<std::size_t>(w2) * h);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x)
            horiz[static_cast<std::size_t>(y) * w2 + 2 * x] = in[static_cast<std::size_t>(y) * w + x];
        for (int x = 0; x + 1 < w; ++x)
            horiz[static_cast<std::size_t>(y) * w2 + 2 * x + 1] =
                0.5 * (in[static_cast<std::size_t>(y) * w + x] + in[static_cast<std::size_t>(y) * w + x + 1]);
    });
    const int h2 = 2 * (h - 1) + 1;
    std::vector<double> out(static_cast<std::size_t>(w2) * h2);
    parallel_for(0, w2, [&](int x) {
        for (int y = 0; y < h; ++y) out[static_cast<std::size_t>(2 * y) * w2 + x] = horiz[static_cast<std::size_t>(y) * w2 + x];
        for (int y = 0; y + 1 < h; ++y)
            out[static_cast<std::size_t>(2 * y + 1) * w2 + x] =
                0.5 * (horiz[static_cast<std::size_t>(y) * w2 + x] + horiz[static_cast<std::size_t>(y + 1) * w2 + x]);
    });
    ow = w2;
    oh = h2;
    return out;
}

}  // namespace detail

/// Upsamples one luma frame by factor D in {1, 2, 4}.
inline UpsampledPlane upsample_plane(const VideoSequence& seq, int t, int factor) {
    if (factor != 1 && factor != 2 && factor != 4)
        throw parameter_error("upsampling factor must be 1, 2 or 4");

    std::vector<double> plane(seq.luma_frame_size());
    for (int y = 0; y < seq.height; ++y)
        for (int x = 0; x < seq.width; ++x)
            plane[static_cast<std::size_t>(y) * seq.width + x] = static_cast<double>(seq.luma_at(x, y, t));

    UpsampledPlane up;
    up.factor = factor;
    up.frame = t;
    int w = seq.width;
    int h = seq.height;
    if (factor >= 2) plane = detail::double_six_tap(plane, w, h, w, h);
    if (factor == 4) plane = detail::double_bilinear(plane, w, h, w, h);
    up.width = w;
    up.height = h;
    up.s = std::move(plane);
    return up;
}

/// Ring of received samples around a lost block, used as matching template.
struct DecisionArea {
    std::vector<std::pair<int, int>> offsets;  // absolute (x, y) in the frame

    bool empty() const { return offsets.empty(); }
    std::size_t size() const { return offsets.size(); }
};

/// Builds the ring of the given width around the block, keeping only in-frame
/// samples that were originally received (samples lost by other blocks of the
/// same pattern are excluded, shrinking the area).
inline DecisionArea make_decision_area(const ConcealState& state, const LossBlock& block,
                                       int width) {
    DecisionArea area;
    for (int y = block.y0 - width; y < block.y0 + block.ly + width; ++y) {
        for (int x = block.x0 - width; x < block.x0 + block.lx + width; ++x) {
            if (x >= block.x0 && x < block.x0 + block.lx && y >= block.y0 && y < block.y0 + block.ly)
                continue;
            if (x < 0 || x >= state.width || y < 0 || y >= state.height) continue;
            if (state.at(x, y, block.frame) != SampleState::received) continue;
            area.offsets.emplace_back(x, y);
        }
    }
    return area;
}

/// Sub-pel displacement toward one reference frame with its matching error.
/// dx, dy are in units of 1/D pel on the upsampled grid.
struct MotionEstimate {
    int kappa = 0;
    int dx = 0;
    int dy = 0;
    double error = 0.0;
};

/// Exhaustive search over all displacements up to +-d_max full-pel at 1/D-pel
/// resolution, minimizing the sum of squared errors of the decision area
/// against its displaced image in the upsampled reference. Ties prefer the
/// shorter displacement, then the lexicographically smaller (dx, dy).
inline MotionEstimate estimate_motion(const VideoSequence& seq, int tau,
                                      const UpsampledPlane& ref, const DecisionArea& area,
                                      int d_max) {
    if (area.empty()) throw empty_area_error("decision area has no received samples");

    const int d = ref.factor;
    const int range = d * d_max;
    const std::size_t count = area.size();
    std::vector<double> cur(count);
    std::vector<int> ux(count);
    std::vector<int> uy(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto [x, y] = area.offsets[i];
        cur[i] = static_cast<double>(seq.luma_at(x, y, tau));
        ux[i] = d * x;
        uy[i] = d * y;
    }

    MotionEstimate best;
    best.kappa = ref.frame - tau;
    double best_error = -1.0;
    int best_cost = 0;
    for (int dy = -range; dy <= range; ++dy) {
        for (int dx = -range; dx <= range; ++dx) {
            double e = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const double diff = cur[i] - ref.at_clamped(ux[i] + dx, uy[i] + dy);
                e += diff * diff;
                if (best_error >= 0.0 && e > best_error) break;
            }
            if (best_error < 0.0 || e < best_error) {
                best_error = e;
                best_cost = std::abs(dx) + std::abs(dy);
                best.dx = dx;
                best.dy = dy;
            } else if (e == best_error) {
                const int cost = std::abs(dx) + std::abs(dy);
                if (cost < best_cost ||
                    (cost == best_cost && (dx < best.dx || (dx == best.dx && dy < best.dy)))) {
                    best_cost = cost;
                    best.dx = dx;
                    best.dy = dy;
                }
            }
        }
    }
    best.error = best_error;
    return best;
}

struct ReliabilityConfig {
    double t_abs = 10.0;
    double t_rel = 3.0;
};

/// Gates a set of motion estimates: reliable iff the maximum mean error per
/// pixel stays within t_abs and the spread of the per-frame errors, normalized
/// by their mean, stays within t_rel. The spread ratio is 0 when all errors
/// vanish; single-estimate sets skip the spread test.
inline bool check_reliability(const std::vector<MotionEstimate>& estimates, std::size_t area_size,
                              const ReliabilityConfig& cfg) {
    if (estimates.empty()) throw parameter_error("reliability check needs at least one estimate");
    if (!(cfg.t_abs > 0.0 && cfg.t_rel > 0.0))
        throw parameter_error("reliability thresholds must be positive");

    double max_root = 0.0;
    double min_root = std::sqrt(estimates.front().error);
    double sum_root = 0.0;
    for (const auto& est : estimates) {
        const double root = std::sqrt(est.error);
        max_root = std::max(max_root, root);
        min_root = std::min(min_root, root);
        sum_root += root;
    }
    if (max_root / std::sqrt(static_cast<double>(area_size)) > cfg.t_abs) return false;
    if (estimates.size() >= 2 && sum_root > 0.0) {
        const double mean_root = sum_root / static_cast<double>(estimates.size());
        if ((max_root - min_root) / mean_root > cfg.t_rel) return false;
    }
    return true;
}

/// Caches upsampled reference planes per (frame, factor). Entries must be
/// invalidated whenever their source frame changes.
class UpsampleCache {
public:
    explicit UpsampleCache(const VideoSequence& seq) : seq_(&seq) {}

    const UpsampledPlane& get(int t, int factor) {
        const auto key = std::make_pair(t, factor);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, upsample_plane(*seq_, t, factor)).first;
        return it->second;
    }

    void invalidate(int t) {
        for (auto it = cache_.begin(); it != cache_.end();) {
            if (it->first.first == t)
                it = cache_.erase(it);
            else
                ++it;
        }
    }

private:
    const VideoSequence* seq_;
    std::map<std::pair<int, int>, UpsampledPlane> cache_;
};

/// Builds the motion-aligned extrapolation volume: the current-frame layer as
/// in the fixed volume, every reference layer sampled from its upsampled plane
/// on the D-strided grid anchored at the sub-pel displaced origin. vectors
/// must cover each reference layer exactly once.
inline ExtrapolationVolume build_aligned_volume(const VideoSequence& seq, const ConcealState& state,
                                                const std::vector<const UpsampledPlane*>& refs,
                                                const std::vector<MotionEstimate>& vectors,
                                                const LossBlock& block, int border) {
    if (refs.size() != vectors.size())
        throw parameter_error("one motion vector per reference layer required");

    int np = 0;
    int nf = 0;
    for (const auto& v : vectors) {
        if (v.kappa == 0) throw parameter_error("reference offset 0 is the current frame");
        np = std::max(np, -v.kappa);
        nf = std::max(nf, v.kappa);
    }
    std::vector<int> layer_of(static_cast<std::size_t>(np + nf + 1), -1);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const int pp = np + vectors[i].kappa;
        if (layer_of[static_cast<std::size_t>(pp)] != -1)
            throw parameter_error("duplicate motion vector for one reference layer");
        layer_of[static_cast<std::size_t>(pp)] = static_cast<int>(i);
        if (refs[i]->frame != block.frame + vectors[i].kappa)
            throw parameter_error("upsampled plane does not match its reference offset");
    }
    for (int pp = 0; pp <= np + nf; ++pp)
        if (pp != np && layer_of[static_cast<std::size_t>(pp)] == -1)
            throw parameter_error("missing motion vector for a reference layer");

    ExtrapolationVolume vol;
    vol.geom.x0 = block.x0;
    vol.geom.y0 = block.y0;
    vol.geom.tau = block.frame;
    vol.geom.border = border;
    vol.geom.np = np;
    vol.geom.nf = nf;
    vol.aligned = true;
    vol.m = block.lx + 2 * border;
    vol.n = block.ly + 2 * border;
    vol.p = np + nf + 1;
    vol.f.resize(static_cast<std::size_t>(vol.count()));
    vol.support.resize(vol.f.size());
    vol.concealed.resize(vol.f.size());

    for (int pp = 0; pp < vol.p; ++pp) {
        if (pp == np) {
            for (int nn = 0; nn < vol.n; ++nn) {
                for (int mm = 0; mm < vol.m; ++mm) {
                    const int x = block.x0 - border + mm;
                    const int y = block.y0 - border + nn;
                    const int i = vol.index(mm, nn, pp);
                    vol.f[i] = static_cast<double>(seq.sample_clamped(x, y, block.frame));
                    detail::classify(state.clamped(x, y, block.frame), vol.support[i],
                                     vol.concealed[i]);
                }
            }
            continue;
        }
        const int vi = layer_of[static_cast<std::size_t>(pp)];
        const UpsampledPlane& up = *refs[static_cast<std::size_t>(vi)];
        const MotionEstimate& mv = vectors[static_cast<std::size_t>(vi)];
        const int d = up.factor;
        const int t = block.frame + mv.kappa;
        for (int nn = 0; nn < vol.n; ++nn) {
            for (int mm = 0; mm < vol.m; ++mm) {
                const int uxr = d * (block.x0 - border) + mv.dx + d * mm;
                const int uyr = d * (block.y0 - border) + mv.dy + d * nn;
                const int i = vol.index(mm, nn, pp);
                vol.f[i] = up.at_clamped(uxr, uyr);
                // state of the nearest full-pel source sample
                const int sx = (clamp_int(uxr, 0, up.width - 1) + d / 2) / d;
                const int sy = (clamp_int(uyr, 0, up.height - 1) + d / 2) / d;
                detail::classify(state.clamped(sx, sy, t), vol.support[i], vol.concealed[i]);
            }
        }
    }
    return vol;
}

}  // namespace mcfse
