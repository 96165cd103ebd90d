// io.hpp: CSV emission and parsing for trajectories and sections.
//
// Every floating-point field is written with 17 significant digits, which is
// enough for strtod to recover the exact double.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semiq/analysis.hpp"
#include "semiq/errors.hpp"
#include "semiq/integrator.hpp"
#include "semiq/model.hpp"

namespace semiq::io {

inline constexpr std::string_view kTrajectoryHeader = "t,n1,ominus,oplus,x,p,e_eff,i_inv";
inline constexpr std::string_view kSectionHeader = "t_cross,ominus,oplus,n1,p,direction";

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view s) {
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (tmp.empty() || end != tmp.c_str() + tmp.size())
        throw IoError("csv: bad number '" + tmp + "'");
    return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

inline std::vector<std::string> read_lines(std::istream& is) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const ModelParams& p) {
    os << kTrajectoryHeader << '\n';
    for (const Sample& s : traj.samples) {
        const SystemState& q = s.s;
        os << fmt17(s.t) << ',' << fmt17(q.n1) << ',' << fmt17(q.om) << ',' << fmt17(q.op) << ','
           << fmt17(q.x) << ',' << fmt17(q.p) << ',' << fmt17(effective_energy(q, p)) << ','
           << fmt17(invariant_I(q)) << '\n';
    }
}

struct TrajectoryRow {
    Sample sample;
    double e_eff{};
    double i_inv{};
};

/// dn is not part of the file format; it is supplied by the caller.
inline std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is, double dn = 0.0) {
    const auto lines = read_lines(is);
    if (lines.empty() || lines.front() != kTrajectoryHeader)
        throw IoError("trajectory csv: missing or unexpected header");
    std::vector<TrajectoryRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_csv(lines[i]);
        if (f.size() != 8) throw IoError("trajectory csv: expected 8 fields on line " + std::to_string(i + 1));
        TrajectoryRow r;
        r.sample.t = parse_double(f[0]);
        r.sample.s = {parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                      parse_double(f[4]), parse_double(f[5]), dn};
        r.e_eff = parse_double(f[6]);
        r.i_inv = parse_double(f[7]);
        rows.push_back(r);
    }
    return rows;
}

inline void write_section_csv(std::ostream& os, const PoincareSection& sec) {
    os << kSectionHeader << '\n';
    for (const SectionPoint& q : sec.points)
        os << fmt17(q.t_cross) << ',' << fmt17(q.om) << ',' << fmt17(q.op) << ',' << fmt17(q.n1)
           << ',' << fmt17(q.p) << ',' << (q.direction > 0 ? "1" : "-1") << '\n';
}

/// The plane residual x is not stored; parsed points carry x = 0.
inline std::vector<SectionPoint> read_section_csv(std::istream& is) {
    const auto lines = read_lines(is);
    if (lines.empty() || lines.front() != kSectionHeader)
        throw IoError("section csv: missing or unexpected header");
    std::vector<SectionPoint> pts;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_csv(lines[i]);
        if (f.size() != 6) throw IoError("section csv: expected 6 fields on line " + std::to_string(i + 1));
        SectionPoint q;
        q.t_cross = parse_double(f[0]);
        q.om = parse_double(f[1]);
        q.op = parse_double(f[2]);
        q.n1 = parse_double(f[3]);
        q.p = parse_double(f[4]);
        q.direction = static_cast<int>(parse_double(f[5]));
        pts.push_back(q);
    }
    return pts;
}

} // namespace semiq::io
