#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/video.hpp"

namespace mcfse {

constexpr int kMacroblockSize = 16;

/// Per-frame, per-sample validity map. true (1) = received, false (0) = lost.
struct LossMask {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    std::vector<std::uint8_t> received;

    static LossMask all_received(int width, int height, int frames) {
        LossMask m;
        m.width = width;
        m.height = height;
        m.frame_count = frames;
        m.received.assign(static_cast<std::size_t>(width) * height * frames, 1);
        return m;
    }

    std::size_t frame_size() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    std::size_t index(int x, int y, int t) const {
        return frame_size() * t + static_cast<std::size_t>(y) * width + x;
    }
    bool is_received(int x, int y, int t) const { return received[index(x, y, t)] != 0; }
    void set_lost(int x, int y, int t) { received[index(x, y, t)] = 0; }

    bool matches(const VideoSequence& seq) const {
        return width == seq.width && height == seq.height && frame_count == seq.frame_count;
    }

    std::uint64_t lost_count() const {
        std::uint64_t n = 0;
        for (std::uint8_t v : received) n += (v == 0);
        return n;
    }
    std::uint64_t lost_count(int t) const {
        std::uint64_t n = 0;
        const std::size_t base = frame_size() * t;
        for (std::size_t i = 0; i < frame_size(); ++i) n += (received[base + i] == 0);
        return n;
    }
};

/// One lost macroblock-aligned rectangle, clipped to the frame.
struct LossBlock {
    int x0 = 0;
    int y0 = 0;
    int lx = 0;
    int ly = 0;
    int frame = 0;
};

enum class LossPattern { dispersed, interleaved, mixed };

namespace detail {

// DISPERSED: checkerboard of lost macroblocks. The per-frame shift flips the
// checkerboard phase, so shifted/unshifted masks are complements on the grid.
inline bool dispersed_lost(int bx, int by, bool shifted) {
    return (((bx + by) % 2) == 0) != shifted;
}

// INTERLEAVED: every 4th macroblock row lost; the lost segment spans half the
// frame width, anchored left/right alternately per lost row. The shift moves
// the pattern one macroblock down and one to the right with wrap-around.
inline bool interleaved_lost(int bx, int by, int blocks_x, int blocks_y, bool shifted) {
    if (shifted) {
        bx = (bx - 1 + blocks_x) % blocks_x;
        by = (by - 1 + blocks_y) % blocks_y;
    }
    if (by % 4 != 0) return false;
    const int segment = blocks_x / 2;
    const int row_index = by / 4;
    if (row_index % 2 == 0) return bx < segment;
    return bx >= blocks_x - segment;
}

}  // namespace detail

/// Builds one of the three loss patterns over the listed error frames. toggle
/// marks error frames whose pattern is shifted ("every other frame"); it must
/// be empty or match error_frames in length. MIXED applies DISPERSED to
/// even-indexed error frames and INTERLEAVED to odd-indexed ones.
inline LossMask generate_pattern(LossPattern kind, int width, int height, int frame_count,
                                 const std::vector<int>& error_frames,
                                 const std::vector<bool>& toggle = {}) {
    if (width < 32 || height < 32)
        throw dimension_error("loss patterns need at least 32x32 frames");
    if (!toggle.empty() && toggle.size() != error_frames.size())
        throw parameter_error("toggle list must match error frame list");

    LossMask mask = LossMask::all_received(width, height, frame_count);
    const int blocks_x = (width + kMacroblockSize - 1) / kMacroblockSize;
    const int blocks_y = (height + kMacroblockSize - 1) / kMacroblockSize;

    for (std::size_t e = 0; e < error_frames.size(); ++e) {
        const int t = error_frames[e];
        if (t < 0 || t >= frame_count)
            throw parameter_error("error frame " + std::to_string(t) + " out of range");
        const bool shifted = toggle.empty() ? false : static_cast<bool>(toggle[e]);
        LossPattern frame_kind = kind;
        if (kind == LossPattern::mixed)
            frame_kind = (e % 2 == 0) ? LossPattern::dispersed : LossPattern::interleaved;

        for (int by = 0; by < blocks_y; ++by) {
            for (int bx = 0; bx < blocks_x; ++bx) {
                const bool lost = frame_kind == LossPattern::dispersed
                                      ? detail::dispersed_lost(bx, by, shifted)
                                      : detail::interleaved_lost(bx, by, blocks_x, blocks_y, shifted);
                if (!lost) continue;
                const int x0 = bx * kMacroblockSize;
                const int y0 = by * kMacroblockSize;
                const int x1 = std::min(x0 + kMacroblockSize, width);
                const int y1 = std::min(y0 + kMacroblockSize, height);
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) mask.set_lost(x, y, t);
            }
        }
    }
    return mask;
}

/// Replaces lost samples by the fill value; received samples are untouched.
/// Chroma samples are filled where any of their four luma samples is lost.
inline VideoSequence apply_loss(const VideoSequence& seq, const LossMask& mask,
                                std::uint8_t fill = 128) {
    if (!mask.matches(seq)) throw dimension_error("mask dimensions do not match sequence");
    VideoSequence out = seq;
    for (int t = 0; t < seq.frame_count; ++t) {
        for (int y = 0; y < seq.height; ++y)
            for (int x = 0; x < seq.width; ++x)
                if (!mask.is_received(x, y, t)) out.luma_at(x, y, t) = fill;
        if (out.has_chroma) {
            const int cw = out.chroma_width();
            const int ch = out.chroma_height();
            for (int cy = 0; cy < ch; ++cy) {
                for (int cx = 0; cx < cw; ++cx) {
                    bool lost = false;
                    for (int dy = 0; dy < 2 && !lost; ++dy)
                        for (int dx = 0; dx < 2 && !lost; ++dx)
                            lost = !mask.is_received(2 * cx + dx, 2 * cy + dy, t);
                    if (lost) {
                        const std::size_t i = out.chroma_frame_size() * t +
                                              static_cast<std::size_t>(cy) * cw + cx;
                        out.cb[i] = fill;
                        out.cr[i] = fill;
                    }
                }
            }
        }
    }
    return out;
}

/// Lists the lost blocks of one frame on the block grid, raster order
/// (left-to-right, top-to-bottom). A block is listed iff any of its samples is
/// lost; edge blocks are clipped to the frame.
inline std::vector<LossBlock> enumerate_blocks(const LossMask& mask, int frame,
                                               int block_size = kMacroblockSize) {
    std::vector<LossBlock> blocks;
    const int blocks_x = (mask.width + block_size - 1) / block_size;
    const int blocks_y = (mask.height + block_size - 1) / block_size;
    for (int by = 0; by < blocks_y; ++by) {
        for (int bx = 0; bx < blocks_x; ++bx) {
            const int x0 = bx * block_size;
            const int y0 = by * block_size;
            const int x1 = std::min(x0 + block_size, mask.width);
            const int y1 = std::min(y0 + block_size, mask.height);
            bool any_lost = false;
            for (int y = y0; y < y1 && !any_lost; ++y)
                for (int x = x0; x < x1 && !any_lost; ++x)
                    any_lost = !mask.is_received(x, y, frame);
            if (any_lost) blocks.push_back({x0, y0, x1 - x0, y1 - y0, frame});
        }
    }
    return blocks;
}

/// Mask file format: raw 8-bit, one byte per luma sample per frame,
/// 0x00 = lost, 0xFF = received, frames concatenated.
inline void write_mask(const LossMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    std::vector<std::uint8_t> bytes(mask.received.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.received[i] ? 0xFF : 0x00;
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("write failure on " + path.string());
}

inline LossMask read_mask(const std::filesystem::path& path, int width, int height) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const std::uint64_t size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    const std::size_t per_frame = static_cast<std::size_t>(width) * height;
    if (per_frame == 0 || size % per_frame != 0)
        throw size_mismatch_error(path.string() + ": not a whole number of mask frames");
    LossMask mask = LossMask::all_received(width, height, static_cast<int>(size / per_frame));
    std::vector<std::uint8_t> bytes(mask.received.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw io_error("short read from " + path.string());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] == 0x00)
            mask.received[i] = 0;
        else if (bytes[i] == 0xFF)
            mask.received[i] = 1;
        else
            throw io_error(path.string() + ": mask bytes must be 0x00 or 0xFF");
    }
    return mask;
}

}  // namespace mcfse
