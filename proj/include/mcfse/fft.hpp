#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace mcfse {

/// Extent of a 3D sample or frequency grid. Linear layout has m fastest:
/// index = m + dim_m * (n + dim_n * p).
struct GridDims {
    int m = 0;
    int n = 0;
    int p = 0;

    int count() const { return m * n * p; }
    bool contains(int mm, int nn, int pp) const {
        return mm >= 0 && mm < m && nn >= 0 && nn < n && pp >= 0 && pp < p;
    }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Complex-to-complex 3D transforms backed by FFTW with a per-dims plan cache.
/// Forward uses the negative exponent; backward is the unnormalized inverse.
/// Plans are created with FFTW_ESTIMATE so results are run-to-run deterministic.
class FftEngine {
public:
    static void forward(GridDims dims, const std::complex<double>* in, std::complex<double>* out) {
        execute(dims, FFTW_FORWARD, in, out);
    }
    static void backward(GridDims dims, const std::complex<double>* in, std::complex<double>* out) {
        execute(dims, FFTW_BACKWARD, in, out);
    }

private:
    static void execute(GridDims dims, int sign, const std::complex<double>* in,
                        std::complex<double>* out) {
        fftw_plan plan = plan_for(dims, sign);
        fftw_execute_dft(plan,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    static fftw_plan plan_for(GridDims dims, int sign) {
        static std::mutex mutex;
        static std::map<std::tuple<int, int, int, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mutex);
        const auto key = std::make_tuple(dims.m, dims.n, dims.p, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        std::vector<std::complex<double>> scratch_in(static_cast<std::size_t>(dims.count()));
        std::vector<std::complex<double>> scratch_out(scratch_in.size());
        // fftw_plan_dft_3d is row-major with the last dimension fastest, so the
        // (p, n, m) order makes m the fastest axis, matching GridDims layout.
        fftw_plan plan = fftw_plan_dft_3d(dims.p, dims.n, dims.m,
                                          reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                          reinterpret_cast<fftw_complex*>(scratch_out.data()),
                                          sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, plan);
        return plan;
    }
};

}  // namespace mcfse
