#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/loss.hpp"
#include "mcfse/video.hpp"

namespace mcfse {

/// PSNR reported for identical content (MSE = 0).
constexpr double kPsnrCap = 99.0;

/// Set of luma samples to evaluate, same shape as a loss mask.
struct SampleRegion {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::vector<std::uint8_t> in_region;

    static SampleRegion all(int width, int height, int frames) {
        SampleRegion r;
        r.width = width;
        r.height = height;
        r.frame_count = frames;
        r.in_region.assign(static_cast<std::size_t>(width) * height * frames, 1);
        return r;
    }

    /// The lost samples of a mask: the region the paper's methodology scores.
    static SampleRegion lost_of(const LossMask& mask) {
        SampleRegion r;
        r.width = mask.width;
        r.height = mask.height;
        r.frame_count = mask.frame_count;
        r.in_region.resize(mask.received.size());
        for (std::size_t i = 0; i < mask.received.size(); ++i)
            r.in_region[i] = mask.received[i] ? 0 : 1;
        return r;
    }

    bool contains(int x, int y, int t) const {
        return in_region[(static_cast<std::size_t>(t) * height + y) * width + x] != 0;
    }
};

struct FramePsnr {
    int frame = 0;
    double psnr_db = 0.0;
    std::uint64_t samples = 0;

    friend bool operator==(const FramePsnr&, const FramePsnr&) = default;
};

/// Region-restricted luminance PSNR: pooled MSE over all evaluated samples,
/// plus a per-frame series omitting frames with empty regions.
struct RegionPsnr {
    double aggregate_db = 0.0;
    std::uint64_t samples = 0;
    std::vector<FramePsnr> frames;

    friend bool operator==(const RegionPsnr&, const RegionPsnr&) = default;
};

namespace detail {

inline double mse_to_psnr(double mse) {
    if (mse <= 0.0) return kPsnrCap;
    return std::min(10.0 * std::log10(255.0 * 255.0 / mse), kPsnrCap);
}

}  // namespace detail

inline RegionPsnr psnr_region(const VideoSequence& reference, const VideoSequence& test,
                              const SampleRegion& region) {
    if (reference.width != test.width || reference.height != test.height ||
        reference.frame_count != test.frame_count)
        throw dimension_error("reference and test sequences differ in shape");
    if (region.width != reference.width || region.height != reference.height ||
        region.frame_count != reference.frame_count)
        throw dimension_error("evaluation region does not match the sequences");

    RegionPsnr out;
    double total_sq = 0.0;
    for (int t = 0; t < reference.frame_count; ++t) {
        double frame_sq = 0.0;
        std::uint64_t frame_n = 0;
        for (int y = 0; y < reference.height; ++y) {
            for (int x = 0; x < reference.width; ++x) {
                if (!region.contains(x, y, t)) continue;
                const double d = static_cast<double>(reference.luma_at(x, y, t)) -
                                 static_cast<double>(test.luma_at(x, y, t));
                frame_sq += d * d;
                ++frame_n;
            }
        }
        if (frame_n > 0)
            out.frames.push_back({t, detail::mse_to_psnr(frame_sq / static_cast<double>(frame_n)), frame_n});
        total_sq += frame_sq;
        out.samples += frame_n;
    }
    if (out.samples == 0) throw parameter_error("evaluation region is empty");
    out.aggregate_db = detail::mse_to_psnr(total_sq / static_cast<double>(out.samples));
    return out;
}

/// Whole-frame PSNR series.
inline std::vector<double> full_frame_psnr(const VideoSequence& reference,
                                           const VideoSequence& test) {
    const RegionPsnr r = psnr_region(reference, test,
                                     SampleRegion::all(reference.width, reference.height,
                                                       reference.frame_count));
    std::vector<double> out;
    out.reserve(r.frames.size());
    for (const auto& f : r.frames) out.push_back(f.psnr_db);
    return out;
}

}  // namespace mcfse
