#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcfse/common.hpp"
#include "mcfse/pipeline.hpp"

namespace mcfse {

/// Line-oriented run report, schema "fse-report v1": bracketed sections of
/// key=value lines and CSV tables. Numbers round-trip exactly (shortest
/// representation that parses back to the same value).

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw io_error("bad number in report: '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw io_error("bad integer in report: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

inline std::string sanitize_note(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

inline Algorithm algorithm_from_name(std::string_view s) {
    for (Algorithm a : {Algorithm::tr, Algorithm::ebma, Algorithm::dmve, Algorithm::fse3d,
                        Algorithm::fse3d_od, Algorithm::mcfse})
        if (s == algorithm_name(a)) return a;
    throw io_error("unknown algorithm '" + std::string(s) + "'");
}

inline BlockPath block_path_from_name(std::string_view s) {
    for (BlockPath p : {BlockPath::mcfse_aligned, BlockPath::mcfse_fixed, BlockPath::fse_fixed,
                        BlockPath::tr, BlockPath::ebma, BlockPath::dmve, BlockPath::tr_fallback,
                        BlockPath::fill_retain})
        if (s == block_path_name(p)) return p;
    throw io_error("unknown block path '" + std::string(s) + "'");
}

inline Verdict verdict_from_name(std::string_view s) {
    for (Verdict v : {Verdict::na, Verdict::rejected, Verdict::passed})
        if (s == verdict_name(v)) return v;
    throw io_error("unknown verdict '" + std::string(s) + "'");
}

inline std::string fmt_vectors(const std::vector<MotionEstimate>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(vs[i].kappa) + ':' + std::to_string(vs[i].dx) + ':' +
               std::to_string(vs[i].dy) + ':' + fmt_double(vs[i].error);
    }
    return out;
}

inline std::vector<MotionEstimate> parse_vectors(std::string_view s) {
    std::vector<MotionEstimate> out;
    if (s.empty()) return out;
    for (std::string_view entry : split(s, ';')) {
        const auto parts = split(entry, ':');
        if (parts.size() != 4) throw io_error("bad motion vector entry in report");
        out.push_back({static_cast<int>(parse_int(parts[0])), static_cast<int>(parse_int(parts[1])),
                       static_cast<int>(parse_int(parts[2])), parse_double(parts[3])});
    }
    return out;
}

}  // namespace detail

inline void emit_report(const RunReport& report, std::ostream& os, bool include_timing = false) {
    using detail::fmt_double;
    const ConcealConfig& c = report.config;
    os << "fse-report v1\n";
    os << "[config]\n";
    os << "algorithm=" << algorithm_name(c.algorithm) << '\n';
    os << "accuracy=" << c.accuracy << '\n';
    os << "width=" << report.width << '\n';
    os << "height=" << report.height << '\n';
    os << "frames=" << report.frames << '\n';
    os << "border=" << c.border << '\n';
    os << "np=" << c.np << '\n';
    os << "nf=" << c.nf << '\n';
    os << "rho_hat=" << fmt_double(c.rho_hat) << '\n';
    os << "delta=" << fmt_double(c.delta) << '\n';
    os << "gamma=" << fmt_double(c.gamma) << '\n';
    os << "iterations=" << c.iterations << '\n';
    os << "d_max=" << c.d_max << '\n';
    os << "decision_border=" << c.decision_border << '\n';
    os << "t_abs=" << fmt_double(c.t_abs) << '\n';
    os << "t_rel=" << fmt_double(c.t_rel) << '\n';
    os << "working=" << c.working.m << 'x' << c.working.n << 'x' << c.working.p << '\n';
    os << "chroma=" << (c.conceal_chroma ? 1 : 0) << '\n';

    os << "[blocks]\n";
    os << "frame,x0,y0,lx,ly,path,reliable,vectors,note";
    if (include_timing) os << ",time_ms";
    os << '\n';
    for (const auto& r : report.blocks) {
        os << r.block.frame << ',' << r.block.x0 << ',' << r.block.y0 << ',' << r.block.lx << ','
           << r.block.ly << ',' << block_path_name(r.path) << ',' << verdict_name(r.reliability)
           << ',' << detail::fmt_vectors(r.vectors) << ',' << detail::sanitize_note(r.note);
        if (include_timing) os << ',' << fmt_double(r.time_ms);
        os << '\n';
    }

    os << "[frames]\n";
    os << "frame,blocks,discarded,discarded_pct\n";
    for (const auto& f : report.frame_stats)
        os << f.frame << ',' << f.blocks << ',' << f.discarded << ','
           << fmt_double(f.discarded_pct) << '\n';

    if (report.psnr) {
        os << "[psnr]\n";
        os << "aggregate=" << fmt_double(report.psnr->aggregate_db) << '\n';
        os << "samples=" << report.psnr->samples << '\n';
        os << "frame,psnr,samples\n";
        for (const auto& f : report.psnr->frames)
            os << f.frame << ',' << fmt_double(f.psnr_db) << ',' << f.samples << '\n';
    }
    os << "[end]\n";
}

inline void emit_report(const RunReport& report, const std::filesystem::path& path,
                        bool include_timing = false) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    emit_report(report, out, include_timing);
    if (!out) throw io_error("write failure on " + path.string());
}

inline RunReport parse_report(std::istream& is) {
    using detail::parse_double;
    using detail::parse_int;
    using detail::split;

    std::string line;
    if (!std::getline(is, line) || line != "fse-report v1")
        throw io_error("not an fse-report v1 document");

    RunReport report;
    std::string section;
    bool blocks_have_timing = false;
    bool in_psnr_table = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.front() == '[') {
            section = line;
            in_psnr_table = false;
            if (section == "[end]") break;
            if (section == "[psnr]") report.psnr.emplace();
            continue;
        }
        if (section == "[config]") {
            const auto kv = split(line, '=');
            if (kv.size() != 2) throw io_error("bad config line: " + line);
            const std::string_view key = kv[0];
            const std::string_view val = kv[1];
            ConcealConfig& c = report.config;
            if (key == "algorithm") c.algorithm = detail::algorithm_from_name(val);
            else if (key == "accuracy") c.accuracy = static_cast<int>(parse_int(val));
            else if (key == "width") report.width = static_cast<int>(parse_int(val));
            else if (key == "height") report.height = static_cast<int>(parse_int(val));
            else if (key == "frames") report.frames = static_cast<int>(parse_int(val));
            else if (key == "border") c.border = static_cast<int>(parse_int(val));
            else if (key == "np") c.np = static_cast<int>(parse_int(val));
            else if (key == "nf") c.nf = static_cast<int>(parse_int(val));
            else if (key == "rho_hat") c.rho_hat = parse_double(val);
            else if (key == "delta") c.delta = parse_double(val);
            else if (key == "gamma") c.gamma = parse_double(val);
            else if (key == "iterations") c.iterations = static_cast<int>(parse_int(val));
            else if (key == "d_max") c.d_max = static_cast<int>(parse_int(val));
            else if (key == "decision_border") c.decision_border = static_cast<int>(parse_int(val));
            else if (key == "t_abs") c.t_abs = parse_double(val);
            else if (key == "t_rel") c.t_rel = parse_double(val);
            else if (key == "working") {
                const auto d = split(val, 'x');
                if (d.size() != 3) throw io_error("bad working grid: " + line);
                c.working = {static_cast<int>(parse_int(d[0])), static_cast<int>(parse_int(d[1])),
                             static_cast<int>(parse_int(d[2]))};
            } else if (key == "chroma")
                c.conceal_chroma = parse_int(val) != 0;
            else
                throw io_error("unknown config key '" + std::string(key) + "'");
        } else if (section == "[blocks]") {
            if (line.rfind("frame,", 0) == 0) {
                blocks_have_timing = line.find(",time_ms") != std::string::npos;
                continue;
            }
            const auto f = split(line, ',');
            const std::size_t expected = blocks_have_timing ? 10u : 9u;
            if (f.size() != expected) throw io_error("bad block record: " + line);
            BlockRecord r;
            r.block.frame = static_cast<int>(parse_int(f[0]));
            r.block.x0 = static_cast<int>(parse_int(f[1]));
            r.block.y0 = static_cast<int>(parse_int(f[2]));
            r.block.lx = static_cast<int>(parse_int(f[3]));
            r.block.ly = static_cast<int>(parse_int(f[4]));
            r.path = detail::block_path_from_name(f[5]);
            r.reliability = detail::verdict_from_name(f[6]);
            r.vectors = detail::parse_vectors(f[7]);
            r.note = std::string(f[8]);
            if (blocks_have_timing) r.time_ms = parse_double(f[9]);
            report.blocks.push_back(std::move(r));
        } else if (section == "[frames]") {
            if (line.rfind("frame,", 0) == 0) continue;
            const auto f = split(line, ',');
            if (f.size() != 4) throw io_error("bad frame stats: " + line);
            report.frame_stats.push_back({static_cast<int>(parse_int(f[0])),
                                          static_cast<int>(parse_int(f[1])),
                                          static_cast<int>(parse_int(f[2])), parse_double(f[3])});
        } else if (section == "[psnr]") {
            if (line.rfind("aggregate=", 0) == 0) {
                report.psnr->aggregate_db = parse_double(std::string_view(line).substr(10));
            } else if (line.rfind("samples=", 0) == 0) {
                report.psnr->samples = static_cast<std::uint64_t>(parse_int(std::string_view(line).substr(8)));
            } else if (line.rfind("frame,", 0) == 0) {
                in_psnr_table = true;
            } else if (in_psnr_table) {
                const auto f = split(line, ',');
                if (f.size() != 3) throw io_error("bad psnr record: " + line);
                report.psnr->frames.push_back({static_cast<int>(parse_int(f[0])),
                                               parse_double(f[1]),
                                               static_cast<std::uint64_t>(parse_int(f[2]))});
            }
        } else if (section.empty()) {
            throw io_error("content before first section: " + line);
        }
    }
    return report;
}

inline RunReport parse_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    return parse_report(in);
}

}  // namespace mcfse
