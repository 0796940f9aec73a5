#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/fft.hpp"
#include "mcfse/volume.hpp"

namespace mcfse {

/// Transform grid used for model generation. The volume sits at the origin of
/// this grid, zero-padded to the working size; the frequency grid of the basis
/// is the padded grid, identical for the fast and the reference path.
inline constexpr GridDims kDefaultWorkingGrid{64, 64, 16};

struct VolumeCoord {
    int m = 0;
    int n = 0;
    int p = 0;
};

/// 3D discrete Fourier basis over a padded working grid. Frequencies are
/// addressed by the linear index k = km + grid.m * (kn + grid.n * kp); a real
/// model pairs every frequency with its mirror.
struct BasisSpec {
    GridDims grid;

    int lin(int km, int kn, int kp) const { return km + grid.m * (kn + grid.n * kp); }
    void split(int k, int& km, int& kn, int& kp) const {
        km = k % grid.m;
        kn = (k / grid.m) % grid.n;
        kp = k / (grid.m * grid.n);
    }
    int mirror(int k) const {
        int km, kn, kp;
        split(k, km, kn, kp);
        return lin((grid.m - km) % grid.m, (grid.n - kn) % grid.n, (grid.p - kp) % grid.p);
    }
    bool self_paired(int k) const { return mirror(k) == k; }
    int canonical(int k) const { return std::min(k, mirror(k)); }

    static int axis_extent(int native, int base) {
        if (native <= base) return base;
        int e = 1;
        while (e < native) e <<= 1;
        return e;
    }
    static GridDims working_for(int m, int n, int p, GridDims base = kDefaultWorkingGrid) {
        return {axis_extent(m, base.m), axis_extent(n, base.n), axis_extent(p, base.p)};
    }
    static BasisSpec for_volume(const ExtrapolationVolume& vol,
                                GridDims base = kDefaultWorkingGrid) {
        return {working_for(vol.m, vol.n, vol.p, base)};
    }
};

/// Sparse frequency model: complex coefficient per selected frequency on the
/// working grid, kept conjugate-symmetric so the modeled signal is real.
struct SparseModel {
    GridDims grid;
    int m = 0;  // native volume extent the model was fitted on
    int n = 0;
    int p = 0;
    std::map<int, std::complex<double>> coeffs;
};

enum class EvalPath { fft, direct };

struct ModelParams {
    int iterations = 800;
    double gamma = 0.7;
    GridDims working = kDefaultWorkingGrid;
    EvalPath path = EvalPath::fft;
};

/// Per-iteration record for diagnostics and property tests. weighted_energy
/// has iterations + 1 entries (index 0 is the pre-iteration residual energy).
struct IterationTrace {
    std::vector<double> weighted_energy;
    std::vector<int> selected;  // canonical frequency index per iteration
};

namespace detail {

inline std::vector<std::complex<double>> axis_twiddles(int extent) {
    std::vector<std::complex<double>> tw(static_cast<std::size_t>(extent));
    for (int j = 0; j < extent; ++j) {
        const double ang = -2.0 * std::numbers::pi * j / extent;
        tw[static_cast<std::size_t>(j)] = {std::cos(ang), std::sin(ang)};
    }
    return tw;
}

inline std::vector<int> mirror_table(int extent) {
    std::vector<int> t(static_cast<std::size_t>(extent));
    for (int j = 0; j < extent; ++j) t[static_cast<std::size_t>(j)] = (extent - j) % extent;
    return t;
}

inline std::vector<int> wrap_minus(int extent, int shift) {
    std::vector<int> t(static_cast<std::size_t>(extent));
    for (int j = 0; j < extent; ++j) t[static_cast<std::size_t>(j)] = (j - shift + extent) % extent;
    return t;
}

// Direct (non-FFT) evaluation of the forward transform of a volume-supported
// signal at every frequency of the working grid: per-frequency triple sums.
inline std::vector<std::complex<double>> direct_forward(const std::vector<double>& s, int m, int n,
                                                        int p, const BasisSpec& basis) {
    const auto twm = axis_twiddles(basis.grid.m);
    const auto twn = axis_twiddles(basis.grid.n);
    const auto twp = axis_twiddles(basis.grid.p);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(basis.grid.count()));
    std::vector<std::complex<double>> am(static_cast<std::size_t>(m));
    std::vector<std::complex<double>> an(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> ap(static_cast<std::size_t>(p));
    for (int kp = 0; kp < basis.grid.p; ++kp) {
        for (int pp = 0; pp < p; ++pp)
            ap[static_cast<std::size_t>(pp)] =
                twp[static_cast<std::size_t>((static_cast<long long>(kp) * pp) % basis.grid.p)];
        for (int kn = 0; kn < basis.grid.n; ++kn) {
            for (int nn = 0; nn < n; ++nn)
                an[static_cast<std::size_t>(nn)] =
                    twn[static_cast<std::size_t>((static_cast<long long>(kn) * nn) % basis.grid.n)];
            for (int km = 0; km < basis.grid.m; ++km) {
                for (int mm = 0; mm < m; ++mm)
                    am[static_cast<std::size_t>(mm)] = twm[static_cast<std::size_t>(
                        (static_cast<long long>(km) * mm) % basis.grid.m)];
                std::complex<double> acc{0.0, 0.0};
                for (int pp = 0; pp < p; ++pp) {
                    for (int nn = 0; nn < n; ++nn) {
                        std::complex<double> row{0.0, 0.0};
                        const std::size_t base = static_cast<std::size_t>(m) * (nn + static_cast<std::size_t>(n) * pp);
                        for (int mm = 0; mm < m; ++mm)
                            row += s[base + static_cast<std::size_t>(mm)] * am[static_cast<std::size_t>(mm)];
                        acc += row * an[static_cast<std::size_t>(nn)] * ap[static_cast<std::size_t>(pp)];
                    }
                }
                out[static_cast<std::size_t>(basis.lin(km, kn, kp))] = acc;
            }
        }
    }
    return out;
}

inline double weight_sum_checked(const WeightVolume& wv) {
    const double sumw = wv.sum();
    if (!(sumw > 0.0)) throw degenerate_weights_error("weight volume sums to zero");
    return sumw;
}

}  // namespace detail

/// Weighted projection of a residual onto every basis function:
/// p_k = <w.r, phi_k> / <w, |phi_k|^2>. For the Fourier family the denominator
/// is sum(w) for every k; the numerator is the forward transform of w.r.
inline std::vector<std::complex<double>> weighted_projection(const std::vector<double>& residual,
                                                             const WeightVolume& wv,
                                                             const BasisSpec& basis,
                                                             EvalPath path = EvalPath::fft) {
    assert(residual.size() == wv.w.size());
    const double sumw = detail::weight_sum_checked(wv);

    std::vector<double> wr(residual.size());
    for (std::size_t i = 0; i < wr.size(); ++i) wr[i] = residual[i] * wv.w[i];

    std::vector<std::complex<double>> proj;
    if (path == EvalPath::fft) {
        std::vector<std::complex<double>> in(static_cast<std::size_t>(basis.grid.count()));
        for (int pp = 0; pp < wv.p; ++pp)
            for (int nn = 0; nn < wv.n; ++nn)
                for (int mm = 0; mm < wv.m; ++mm)
                    in[static_cast<std::size_t>(mm + basis.grid.m * (nn + basis.grid.n * pp))] =
                        wr[static_cast<std::size_t>(wv.index(mm, nn, pp))];
        proj.resize(in.size());
        FftEngine::forward(basis.grid, in.data(), proj.data());
    } else {
        proj = detail::direct_forward(wr, wv.m, wv.n, wv.p, basis);
    }
    for (auto& v : proj) v /= sumw;
    return proj;
}

/// Picks the frequency pair maximizing the summed selection criterion
/// |p_k|^2 * (phi_k^T W phi_k) of its members. Self-paired frequencies (DC and
/// Nyquist-type bins) count singly. Ties resolve to the smallest linear index.
/// Returns the canonical (smaller) index of the winning pair.
inline int select_basis(const std::vector<std::complex<double>>& proj, const WeightVolume& wv,
                        const BasisSpec& basis) {
    const double sumw = detail::weight_sum_checked(wv);
    const auto mirm = detail::mirror_table(basis.grid.m);
    const auto mirn = detail::mirror_table(basis.grid.n);
    const auto mirp = detail::mirror_table(basis.grid.p);

    int best = 0;
    double best_score = -1.0;
    int k = 0;
    for (int kp = 0; kp < basis.grid.p; ++kp) {
        for (int kn = 0; kn < basis.grid.n; ++kn) {
            const int mbase = basis.grid.m * (mirn[static_cast<std::size_t>(kn)] +
                                              basis.grid.n * mirp[static_cast<std::size_t>(kp)]);
            for (int km = 0; km < basis.grid.m; ++km, ++k) {
                const int mk = mirm[static_cast<std::size_t>(km)] + mbase;
                if (mk < k) continue;  // canonical member scans the pair once
                const double pair_factor = (mk == k) ? 1.0 : 2.0;
                const double score = std::norm(proj[static_cast<std::size_t>(k)]) * sumw * pair_factor;
                if (score > best_score) {
                    best_score = score;
                    best = k;
                }
            }
        }
    }
    return best;
}

namespace detail {

// Basis-function axis factors with the positive exponent, restricted to the
// native extent: phi_k[m,n,p] = am[m] * an[n] * ap[p].
struct BasisAxes {
    std::vector<std::complex<double>> am, an, ap;

    BasisAxes(const BasisSpec& basis, int k, int m, int n, int p)
        : am(static_cast<std::size_t>(m)), an(static_cast<std::size_t>(n)), ap(static_cast<std::size_t>(p)) {
        int km, kn, kp;
        basis.split(k, km, kn, kp);
        fill(am, km, basis.grid.m);
        fill(an, kn, basis.grid.n);
        fill(ap, kp, basis.grid.p);
    }

private:
    static void fill(std::vector<std::complex<double>>& a, int freq, int extent) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double ang = 2.0 * std::numbers::pi * freq * static_cast<double>(j) / extent;
            a[j] = {std::cos(ang), std::sin(ang)};
        }
    }
};

inline double weighted_energy(const std::vector<double>& r, const WeightVolume& wv) {
    double e = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) e += wv.w[i] * r[i] * r[i];
    return e;
}

// Subtracts the real contribution of the selected pair from the spatial
// residual: gamma * (c phi_u + conj(c) phi_u*) which is 2 Re(gamma c phi_u),
// or the single real term for self-paired u.
inline void subtract_pair(std::vector<double>& r, const WeightVolume& wv, const BasisSpec& basis,
                          int u, bool self, std::complex<double> gamma_c) {
    const BasisAxes ax(basis, u, wv.m, wv.n, wv.p);
    const double factor = self ? 1.0 : 2.0;
    for (int pp = 0; pp < wv.p; ++pp) {
        for (int nn = 0; nn < wv.n; ++nn) {
            const std::complex<double> z =
                gamma_c * ax.an[static_cast<std::size_t>(nn)] * ax.ap[static_cast<std::size_t>(pp)];
            const std::size_t base =
                static_cast<std::size_t>(wv.m) * (nn + static_cast<std::size_t>(wv.n) * pp);
            for (int mm = 0; mm < wv.m; ++mm)
                r[base + static_cast<std::size_t>(mm)] -=
                    factor * std::real(z * ax.am[static_cast<std::size_t>(mm)]);
        }
    }
}

}  // namespace detail

/// Iterative model generation: project the residual onto the basis, select the
/// strongest frequency pair, add gamma times its projection to the coefficient
/// set and subtract the same fraction from the residual, for a fixed number of
/// iterations. gamma < 1 compensates the orthogonality deficiency of the
/// masked, weighted scalar product.
///
/// The fast path never runs a per-iteration transform: it keeps the spectrum
/// of the weighted residual and updates it with shifted copies of the weight
/// spectrum, which is the frequency-domain image of the residual update. The
/// direct path recomputes the projection from the spatial residual each
/// iteration by plain summation.
inline SparseModel generate_model(const ExtrapolationVolume& vol, const WeightVolume& wv,
                                  const ModelParams& params, IterationTrace* trace = nullptr) {
    assert(vol.m == wv.m && vol.n == wv.n && vol.p == wv.p);
    if (params.iterations < 1) throw parameter_error("iterations must be >= 1");
    if (!(params.gamma > 0.0 && params.gamma <= 1.0))
        throw parameter_error("gamma must be in (0, 1]");

    const BasisSpec basis{BasisSpec::working_for(vol.m, vol.n, vol.p, params.working)};
    const double sumw = detail::weight_sum_checked(wv);
    const int cnt = basis.grid.count();

    SparseModel model;
    model.grid = basis.grid;
    model.m = vol.m;
    model.n = vol.n;
    model.p = vol.p;

    const bool track_spatial = trace != nullptr || params.path == EvalPath::direct;
    std::vector<double> r;
    if (track_spatial) r = vol.f;
    if (trace) {
        trace->weighted_energy.clear();
        trace->selected.clear();
        trace->weighted_energy.push_back(detail::weighted_energy(r, wv));
    }

    const auto mirm = detail::mirror_table(basis.grid.m);
    const auto mirn = detail::mirror_table(basis.grid.n);
    const auto mirp = detail::mirror_table(basis.grid.p);

    std::vector<std::complex<double>> rw;  // fast path: spectrum of w . r
    std::vector<std::complex<double>> wspec;
    if (params.path == EvalPath::fft) {
        std::vector<std::complex<double>> in(static_cast<std::size_t>(cnt));
        for (int pp = 0; pp < vol.p; ++pp)
            for (int nn = 0; nn < vol.n; ++nn)
                for (int mm = 0; mm < vol.m; ++mm) {
                    const std::size_t src = static_cast<std::size_t>(vol.index(mm, nn, pp));
                    in[static_cast<std::size_t>(mm + basis.grid.m * (nn + basis.grid.n * pp))] =
                        vol.f[src] * wv.w[src];
                }
        rw.resize(in.size());
        FftEngine::forward(basis.grid, in.data(), rw.data());

        std::fill(in.begin(), in.end(), std::complex<double>{0.0, 0.0});
        for (int pp = 0; pp < vol.p; ++pp)
            for (int nn = 0; nn < vol.n; ++nn)
                for (int mm = 0; mm < vol.m; ++mm)
                    in[static_cast<std::size_t>(mm + basis.grid.m * (nn + basis.grid.n * pp))] =
                        wv.w[static_cast<std::size_t>(vol.index(mm, nn, pp))];
        wspec.resize(in.size());
        FftEngine::forward(basis.grid, in.data(), wspec.data());
    }

    for (int iter = 0; iter < params.iterations; ++iter) {
        int u = 0;
        std::complex<double> pu;

        if (params.path == EvalPath::fft) {
            // scan canonical bins of the maintained spectrum
            double best_score = -1.0;
            int k = 0;
            for (int kp = 0; kp < basis.grid.p; ++kp) {
                for (int kn = 0; kn < basis.grid.n; ++kn) {
                    const int mbase =
                        basis.grid.m * (mirn[static_cast<std::size_t>(kn)] +
                                        basis.grid.n * mirp[static_cast<std::size_t>(kp)]);
                    for (int km = 0; km < basis.grid.m; ++km, ++k) {
                        const int mk = mirm[static_cast<std::size_t>(km)] + mbase;
                        if (mk < k) continue;
                        const double score =
                            std::norm(rw[static_cast<std::size_t>(k)]) * ((mk == k) ? 1.0 : 2.0);
                        if (score > best_score) {
                            best_score = score;
                            u = k;
                        }
                    }
                }
            }
            pu = rw[static_cast<std::size_t>(u)] / sumw;
        } else {
            const auto proj = weighted_projection(r, wv, basis, EvalPath::direct);
            u = select_basis(proj, wv, basis);
            pu = proj[static_cast<std::size_t>(u)];
        }

        const int um = basis.mirror(u);
        const bool self = (um == u);
        if (self) pu = {pu.real(), 0.0};

        model.coeffs[u] += params.gamma * pu;
        if (!self) model.coeffs[um] += params.gamma * std::conj(pu);

        const std::complex<double> gc = params.gamma * pu;
        if (params.path == EvalPath::fft) {
            int u_m, u_n, u_p;
            basis.split(u, u_m, u_n, u_p);
            const auto sub1m = detail::wrap_minus(basis.grid.m, u_m);
            const auto sub1n = detail::wrap_minus(basis.grid.n, u_n);
            const auto sub1p = detail::wrap_minus(basis.grid.p, u_p);
            int v_m, v_n, v_p;
            basis.split(um, v_m, v_n, v_p);
            const auto sub2m = detail::wrap_minus(basis.grid.m, v_m);
            const auto sub2n = detail::wrap_minus(basis.grid.n, v_n);
            const auto sub2p = detail::wrap_minus(basis.grid.p, v_p);
            const std::complex<double> gcc = std::conj(gc);

            int k = 0;
            for (int kp = 0; kp < basis.grid.p; ++kp) {
                for (int kn = 0; kn < basis.grid.n; ++kn) {
                    const int mbase =
                        basis.grid.m * (mirn[static_cast<std::size_t>(kn)] +
                                        basis.grid.n * mirp[static_cast<std::size_t>(kp)]);
                    const int w1base =
                        basis.grid.m * (sub1n[static_cast<std::size_t>(kn)] +
                                        basis.grid.n * sub1p[static_cast<std::size_t>(kp)]);
                    const int w2base =
                        basis.grid.m * (sub2n[static_cast<std::size_t>(kn)] +
                                        basis.grid.n * sub2p[static_cast<std::size_t>(kp)]);
                    for (int km = 0; km < basis.grid.m; ++km, ++k) {
                        const int mk = mirm[static_cast<std::size_t>(km)] + mbase;
                        if (mk < k) continue;  // only canonical bins are ever read
                        auto& bin = rw[static_cast<std::size_t>(k)];
                        bin -= gc * wspec[static_cast<std::size_t>(sub1m[static_cast<std::size_t>(km)] + w1base)];
                        if (!self)
                            bin -= gcc * wspec[static_cast<std::size_t>(sub2m[static_cast<std::size_t>(km)] + w2base)];
                    }
                }
            }
        }

        if (track_spatial) detail::subtract_pair(r, wv, basis, u, self, gc);
        if (trace) {
            trace->selected.push_back(basis.canonical(u));
            trace->weighted_energy.push_back(detail::weighted_energy(r, wv));
        }
    }
    return model;
}

/// Evaluates the model at the requested volume coordinates. The fast path runs
/// one unnormalized inverse transform of the sparse coefficient grid; the
/// direct path sums the selected basis functions term by term. The imaginary
/// residue of the conjugate-symmetric sum is discarded; pass imag_residue to
/// observe its magnitude.
inline std::vector<double> evaluate_model(const SparseModel& model,
                                          const std::vector<VolumeCoord>& region,
                                          EvalPath path = EvalPath::fft,
                                          double* imag_residue = nullptr) {
    const BasisSpec basis{model.grid};
    std::vector<double> out(region.size(), 0.0);
    double residue = 0.0;

    if (path == EvalPath::fft) {
        std::vector<std::complex<double>> dense(static_cast<std::size_t>(model.grid.count()));
        for (const auto& [k, c] : model.coeffs) dense[static_cast<std::size_t>(k)] = c;
        std::vector<std::complex<double>> g(dense.size());
        FftEngine::backward(model.grid, dense.data(), g.data());
        for (std::size_t i = 0; i < region.size(); ++i) {
            const auto& c = region[i];
            assert(model.grid.contains(c.m, c.n, c.p));
            const auto v = g[static_cast<std::size_t>(c.m + model.grid.m * (c.n + model.grid.n * c.p))];
            out[i] = v.real();
            residue = std::max(residue, std::abs(v.imag()));
        }
    } else {
        for (std::size_t i = 0; i < region.size(); ++i) {
            const auto& coord = region[i];
            std::complex<double> acc{0.0, 0.0};
            for (const auto& [k, c] : model.coeffs) {
                int km, kn, kp;
                basis.split(k, km, kn, kp);
                const double ang =
                    2.0 * std::numbers::pi *
                    (static_cast<double>(km) * coord.m / model.grid.m +
                     static_cast<double>(kn) * coord.n / model.grid.n +
                     static_cast<double>(kp) * coord.p / model.grid.p);
                acc += c * std::complex<double>{std::cos(ang), std::sin(ang)};
            }
            out[i] = acc.real();
            residue = std::max(residue, std::abs(acc.imag()));
        }
    }
    if (imag_residue) *imag_residue = residue;
    return out;
}

/// Model values over the whole native volume, in volume layout.
inline std::vector<double> evaluate_model_volume(const SparseModel& model,
                                                 EvalPath path = EvalPath::fft,
                                                 double* imag_residue = nullptr) {
    std::vector<VolumeCoord> region;
    region.reserve(static_cast<std::size_t>(model.m) * model.n * model.p);
    for (int pp = 0; pp < model.p; ++pp)
        for (int nn = 0; nn < model.n; ++nn)
            for (int mm = 0; mm < model.m; ++mm) region.push_back({mm, nn, pp});
    return evaluate_model(model, region, path, imag_residue);
}

}  // namespace mcfse
