#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/loss.hpp"
#include "mcfse/video.hpp"

namespace mcfse {

/// Per-sample concealment bookkeeping across a run. "concealed" means the
/// sample was lost and has since been replaced by an earlier block's model.
enum class SampleState : std::uint8_t { received = 0, lost = 1, concealed = 2 };

struct ConcealState {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::vector<SampleState> states;

    static ConcealState from_mask(const LossMask& mask) {
        ConcealState s;
        s.width = mask.width;
        s.height = mask.height;
        s.frame_count = mask.frame_count;
        s.states.resize(mask.received.size());
        for (std::size_t i = 0; i < mask.received.size(); ++i)
            s.states[i] = mask.received[i] ? SampleState::received : SampleState::lost;
        return s;
    }

    std::size_t index(int x, int y, int t) const {
        return (static_cast<std::size_t>(t) * height + y) * width + x;
    }
    SampleState at(int x, int y, int t) const { return states[index(x, y, t)]; }
    void set(int x, int y, int t, SampleState s) { states[index(x, y, t)] = s; }

    /// Margin-replicated lookup, mirroring VideoSequence::sample_clamped.
    SampleState clamped(int x, int y, int t) const {
        return at(clamp_int(x, 0, width - 1), clamp_int(y, 0, height - 1), t);
    }
};

struct VolumeGeometry {
    int x0 = 0;       // loss position in the frame
    int y0 = 0;
    int tau = 0;      // frame carrying the loss
    int border = 16;  // B
    int np = 0;       // effective previous frames (after clipping)
    int nf = 0;       // effective future frames
};

/// M x N x P working signal around a loss: the real-valued samples plus the
/// support/loss partition. Linear layout has m fastest.
struct ExtrapolationVolume {
    int m = 0;
    int n = 0;
    int p = 0;
    VolumeGeometry geom;
    bool aligned = false;
    std::vector<double> f;
    std::vector<std::uint8_t> support;    // 1 = in A (received or concealed), 0 = in B
    std::vector<std::uint8_t> concealed;  // 1 = value came from a previous concealment

    int count() const { return m * n * p; }
    int index(int mm, int nn, int pp) const { return mm + m * (nn + n * pp); }
};

/// Nonnegative weights over the volume: zero on the loss, isotropic rho_hat
/// decay from the volume center elsewhere, concealed samples scaled by delta.
struct WeightVolume {
    int m = 0;
    int n = 0;
    int p = 0;
    double rho_hat = 0.8;
    double delta = 0.2;
    std::vector<double> w;

    int count() const { return m * n * p; }
    int index(int mm, int nn, int pp) const { return mm + m * (nn + n * pp); }
    double sum() const {
        double s = 0.0;
        for (double v : w) s += v;
        return s;
    }
};

namespace detail {

inline void classify(SampleState s, std::uint8_t& sup, std::uint8_t& con) {
    sup = (s != SampleState::lost) ? 1 : 0;
    con = (s == SampleState::concealed) ? 1 : 0;
}

}  // namespace detail

/// Cuts the fixed (unaligned) volume out of the sequence: the loss with a
/// border of B samples from frame tau, and co-located samples from up to np
/// previous and nf future frames. Out-of-frame reads replicate the margin;
/// frame offsets are clipped at the sequence ends.
inline ExtrapolationVolume build_fixed_volume(const VideoSequence& seq, const ConcealState& state,
                                              const LossBlock& block, int border, int np, int nf) {
    ExtrapolationVolume vol;
    vol.geom.x0 = block.x0;
    vol.geom.y0 = block.y0;
    vol.geom.tau = block.frame;
    vol.geom.border = border;
    vol.geom.np = std::min(np, block.frame);
    vol.geom.nf = std::min(nf, seq.frame_count - 1 - block.frame);
    vol.m = block.lx + 2 * border;
    vol.n = block.ly + 2 * border;
    vol.p = vol.geom.np + vol.geom.nf + 1;
    vol.f.resize(static_cast<std::size_t>(vol.count()));
    vol.support.resize(vol.f.size());
    vol.concealed.resize(vol.f.size());

    for (int pp = 0; pp < vol.p; ++pp) {
        const int t = block.frame - vol.geom.np + pp;
        for (int nn = 0; nn < vol.n; ++nn) {
            for (int mm = 0; mm < vol.m; ++mm) {
                const int x = block.x0 - border + mm;
                const int y = block.y0 - border + nn;
                const int i = vol.index(mm, nn, pp);
                vol.f[i] = static_cast<double>(seq.sample_clamped(x, y, t));
                detail::classify(state.clamped(x, y, t), vol.support[i], vol.concealed[i]);
            }
        }
    }
    return vol;
}

/// Convenience overload for callers holding only a loss mask.
inline ExtrapolationVolume build_fixed_volume(const VideoSequence& seq, const LossMask& mask,
                                              const LossBlock& block, int border, int np, int nf) {
    return build_fixed_volume(seq, ConcealState::from_mask(mask), block, border, np, nf);
}

inline WeightVolume build_weight_volume(const ExtrapolationVolume& vol, double rho_hat,
                                        double delta) {
    if (!(rho_hat > 0.0 && rho_hat <= 1.0))
        throw parameter_error("rho_hat must be in (0, 1]");
    if (!(delta > 0.0 && delta <= 1.0))
        throw parameter_error("delta must be in (0, 1]");

    WeightVolume wv;
    wv.m = vol.m;
    wv.n = vol.n;
    wv.p = vol.p;
    wv.rho_hat = rho_hat;
    wv.delta = delta;
    wv.w.resize(vol.f.size());

    const double cm = (vol.m - 1) / 2.0;
    const double cn = (vol.n - 1) / 2.0;
    const double cp = (vol.p - 1) / 2.0;
    for (int pp = 0; pp < vol.p; ++pp) {
        for (int nn = 0; nn < vol.n; ++nn) {
            for (int mm = 0; mm < vol.m; ++mm) {
                const int i = vol.index(mm, nn, pp);
                if (!vol.support[i]) {
                    wv.w[i] = 0.0;
                    continue;
                }
                const double dist = std::sqrt((mm - cm) * (mm - cm) + (nn - cn) * (nn - cn) +
                                              (pp - cp) * (pp - cp));
                double w = std::pow(rho_hat, dist);
                if (vol.concealed[i]) w *= delta;
                wv.w[i] = w;
            }
        }
    }
    return wv;
}

}  // namespace mcfse
