#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mcfse {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input/output failure (file missing, short write, malformed container).
class io_error : public error {
public:
    using error::error;
};

/// Frame or volume geometry violates a contract (too small, mismatched, odd for 4:2:0).
class dimension_error : public error {
public:
    using error::error;
};

/// Raw file size is not a whole number of frames.
class size_mismatch_error : public error {
public:
    using error::error;
};

/// A numeric parameter is outside its admissible range.
class parameter_error : public error {
public:
    using error::error;
};

/// Weight volume sums to zero; no support to project onto.
class degenerate_weights_error : public error {
public:
    using error::error;
};

/// Decision area or matching ring contains no usable samples.
class empty_area_error : public error {
public:
    using error::error;
};

/// A required reference frame does not exist.
class no_reference_error : public error {
public:
    using error::error;
};

inline int clamp_int(int v, int lo, int hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

/// Thread budget for internal parallelism. FSE_THREADS sets it; default 1 (sequential).
inline int thread_budget() {
    if (const char* env = std::getenv("FSE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) {
            const unsigned hw = std::thread::hardware_concurrency();
            return std::min<int>(n, hw > 0 ? static_cast<int>(hw) : n);
        }
    }
    return 1;
}

/// Chunked parallel loop over [begin, end). Results must not depend on the
/// partitioning; callers only use it for writes to disjoint ranges.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn) {
    const int count = end - begin;
    const int threads = std::min(thread_budget(), std::max(count, 1));
    if (threads <= 1 || count <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (count + threads - 1) / threads;
    for (int tid = 0; tid < threads; ++tid) {
        const int lo = begin + tid * chunk;
        const int hi = std::min(lo + chunk, end);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace mcfse
