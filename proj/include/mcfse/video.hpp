#pragma once

#include <cassert>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mcfse/common.hpp"

namespace mcfse {

enum class PixelFormat { gray8, yuv420p };

/// Smallest frame dimension the toolkit accepts: a 16x16 loss with a 16-sample
/// border needs a 48x48 footprint.
constexpr int kMinFrameDim = 48;

/// Ordered stack of 8-bit planar frames. Immutable after load in all read
/// paths; the concealment pipeline owns its working copy exclusively.
struct VideoSequence {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    bool has_chroma = false;
    std::vector<std::uint8_t> luma;  // frame_count * width * height, row-major per frame
    std::vector<std::uint8_t> cb;    // 4:2:0 planes when has_chroma
    std::vector<std::uint8_t> cr;

    int chroma_width() const { return has_chroma ? width / 2 : 0; }
    int chroma_height() const { return has_chroma ? height / 2 : 0; }

    std::size_t luma_frame_size() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    std::size_t chroma_frame_size() const {
        return static_cast<std::size_t>(chroma_width()) * static_cast<std::size_t>(chroma_height());
    }

    std::uint8_t luma_at(int x, int y, int t) const {
        return luma[luma_frame_size() * t + static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& luma_at(int x, int y, int t) {
        return luma[luma_frame_size() * t + static_cast<std::size_t>(y) * width + x];
    }

    /// v[clamp(x), clamp(y), t]: margin replication for out-of-frame reads.
    std::uint8_t sample_clamped(int x, int y, int t) const {
        assert(t >= 0 && t < frame_count);
        return luma_at(clamp_int(x, 0, width - 1), clamp_int(y, 0, height - 1), t);
    }

    static VideoSequence create(int width, int height, int frames, PixelFormat format,
                                std::uint8_t fill = 0) {
        VideoSequence seq;
        seq.width = width;
        seq.height = height;
        seq.frame_count = frames;
        seq.has_chroma = (format == PixelFormat::yuv420p);
        seq.luma.assign(seq.luma_frame_size() * frames, fill);
        if (seq.has_chroma) {
            seq.cb.assign(seq.chroma_frame_size() * frames, 128);
            seq.cr.assign(seq.chroma_frame_size() * frames, 128);
        }
        return seq;
    }
};

/// Relative reference offsets for a block at frame tau: -np..-1 and +1..+nf,
/// clipped to the sequence bounds.
inline std::vector<int> reference_offsets(int tau, int frame_count, int np, int nf) {
    std::vector<int> kappas;
    for (int k = -np; k <= nf; ++k) {
        if (k == 0) continue;
        const int t = tau + k;
        if (t >= 0 && t < frame_count) kappas.push_back(k);
    }
    return kappas;
}

namespace detail {

inline std::size_t frame_bytes(int width, int height, PixelFormat format) {
    const std::size_t luma = static_cast<std::size_t>(width) * height;
    return format == PixelFormat::gray8 ? luma : luma + 2 * (luma / 4);
}

}  // namespace detail

/// Reads a header-less raw planar file. Frame count is inferred from the file
/// size, which must be an exact multiple of the per-frame byte count.
inline VideoSequence read_raw_video(const std::filesystem::path& path, int width, int height,
                                    PixelFormat format) {
    if (width < kMinFrameDim || height < kMinFrameDim)
        throw dimension_error("frame dimensions below " + std::to_string(kMinFrameDim) + ": " +
                              std::to_string(width) + "x" + std::to_string(height));
    if (format == PixelFormat::yuv420p && (width % 2 != 0 || height % 2 != 0))
        throw dimension_error("yuv420p requires even dimensions");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const std::uint64_t size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0, std::ios::beg);

    const std::size_t per_frame = detail::frame_bytes(width, height, format);
    if (size % per_frame != 0)
        throw size_mismatch_error(path.string() + ": " + std::to_string(size) +
                                  " bytes is not a whole number of " + std::to_string(per_frame) +
                                  "-byte frames");

    VideoSequence seq = VideoSequence::create(width, height, static_cast<int>(size / per_frame), format);
    for (int t = 0; t < seq.frame_count; ++t) {
        in.read(reinterpret_cast<char*>(seq.luma.data() + seq.luma_frame_size() * t),
                static_cast<std::streamsize>(seq.luma_frame_size()));
        if (seq.has_chroma) {
            in.read(reinterpret_cast<char*>(seq.cb.data() + seq.chroma_frame_size() * t),
                    static_cast<std::streamsize>(seq.chroma_frame_size()));
            in.read(reinterpret_cast<char*>(seq.cr.data() + seq.chroma_frame_size() * t),
                    static_cast<std::streamsize>(seq.chroma_frame_size()));
        }
    }
    if (!in) throw io_error("short read from " + path.string());
    return seq;
}

/// Writes frames in temporal order, each plane row-major, luma then chroma.
inline void write_raw_video(const VideoSequence& seq, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    for (int t = 0; t < seq.frame_count; ++t) {
        out.write(reinterpret_cast<const char*>(seq.luma.data() + seq.luma_frame_size() * t),
                  static_cast<std::streamsize>(seq.luma_frame_size()));
        if (seq.has_chroma) {
            out.write(reinterpret_cast<const char*>(seq.cb.data() + seq.chroma_frame_size() * t),
                      static_cast<std::streamsize>(seq.chroma_frame_size()));
            out.write(reinterpret_cast<const char*>(seq.cr.data() + seq.chroma_frame_size() * t),
                      static_cast<std::streamsize>(seq.chroma_frame_size()));
        }
    }
    if (!out) throw io_error("write failure on " + path.string());
}

}  // namespace mcfse
