#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mcfse/video.hpp"

namespace mcfse {

/// Seeded clip generator: a band-limited random texture translated globally by
/// (shift_x, shift_y) pel per frame, plus optional per-frame Gaussian noise.
/// The texture is a sum of cosines, so fractional shifts are sampled exactly.
struct SyntheticConfig {
    int width = 96;
    int height = 96;
    int frames = 5;
    std::uint64_t seed = 1;
    double shift_x = 0.0;   // pel per frame
    double shift_y = 0.0;
    double noise_sigma = 0.0;
    int waves = 24;
    double amplitude = 96.0;       // peak deviation from mid-gray
    double max_frequency = 0.25;   // cycles per sample
};

inline VideoSequence make_synthetic_sequence(const SyntheticConfig& cfg) {
    if (cfg.width <= 0 || cfg.height <= 0 || cfg.frames < 0)
        throw parameter_error("synthetic clip needs positive dimensions");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Wave {
        double fx, fy, phase, amp;
    };
    std::vector<Wave> waves(static_cast<std::size_t>(std::max(cfg.waves, 1)));
    double total_amp = 0.0;
    for (auto& w : waves) {
        const double freq = 0.02 + (cfg.max_frequency - 0.02) * unit(rng);
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        w.fx = freq * std::cos(theta);
        w.fy = freq * std::sin(theta);
        w.phase = 2.0 * std::numbers::pi * unit(rng);
        w.amp = 0.25 + 0.75 * unit(rng);
        total_amp += w.amp;
    }
    for (auto& w : waves) w.amp *= cfg.amplitude / total_amp;

    VideoSequence seq = VideoSequence::create(cfg.width, cfg.height, cfg.frames, PixelFormat::gray8);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (int t = 0; t < cfg.frames; ++t) {
        const double ox = t * cfg.shift_x;
        const double oy = t * cfg.shift_y;
        for (int y = 0; y < cfg.height; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                double v = 128.0;
                for (const auto& w : waves)
                    v += w.amp * std::cos(2.0 * std::numbers::pi *
                                              (w.fx * (x + ox) + w.fy * (y + oy)) +
                                          w.phase);
                if (cfg.noise_sigma > 0.0) v += noise(rng);
                seq.luma_at(x, y, t) =
                    static_cast<std::uint8_t>(clamp_int(static_cast<int>(std::lround(v)), 0, 255));
            }
        }
    }
    return seq;
}

/// Frames of independent noise; references like these defeat motion estimation.
inline VideoSequence make_noise_sequence(int width, int height, int frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(0, 255);
    VideoSequence seq = VideoSequence::create(width, height, frames, PixelFormat::gray8);
    for (auto& s : seq.luma) s = static_cast<std::uint8_t>(dist(rng));
    return seq;
}

}  // namespace mcfse
