// svg.hpp: minimal self-contained 2-D line/scatter plots.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "semiq/io.hpp"

namespace semiq::svg {

struct Series {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color{"#1f77b4"};
    bool scatter{false};
};

struct Plot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
    int width{800};
    int height{500};
};

namespace detail {

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace detail

inline void write(std::ostream& os, const Plot& plot) {
    constexpr double ml = 80, mr = 160, mt = 40, mb = 60;
    const double w = plot.width, h = plot.height;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const Series& s : plot.series) {
        for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
            x0 = std::min(x0, s.xs[i]);
            x1 = std::max(x1, s.xs[i]);
            y0 = std::min(y0, s.ys[i]);
            y1 = std::max(y1, s.ys[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double padx = 0.03 * (x1 - x0), pady = 0.05 * (y1 - y0);
    x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;

    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\""
       << plot.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::esc(plot.title) << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
       << h - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">"
           << detail::num(xv) << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
           << detail::num(yv) << "</text>\n";
    }
    os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">"
       << detail::esc(plot.xlabel) << "</text>\n";
    os << "<text x=\"18\" y=\"" << (mt + h - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << (mt + h - mb) / 2 << ")\">" << detail::esc(plot.ylabel) << "</text>\n";

    int legend_row = 0;
    for (const Series& s : plot.series) {
        const std::size_t n = std::min(s.xs.size(), s.ys.size());
        if (s.scatter) {
            os << "<g fill=\"" << s.color << "\">\n";
            for (std::size_t i = 0; i < n; ++i)
                if (std::isfinite(s.xs[i]) && std::isfinite(s.ys[i]))
                    os << "<circle cx=\"" << detail::num(px(s.xs[i])) << "\" cy=\""
                       << detail::num(py(s.ys[i])) << "\" r=\"1.2\"/>\n";
            os << "</g>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t i = 0; i < n; ++i)
                if (std::isfinite(s.xs[i]) && std::isfinite(s.ys[i]))
                    os << detail::num(px(s.xs[i])) << ',' << detail::num(py(s.ys[i])) << ' ';
            os << "\"/>\n";
        }
        const double ly = mt + 10 + 18 * legend_row++;
        os << "<rect x=\"" << w - mr + 12 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\""
           << s.color << "\"/>\n";
        os << "<text x=\"" << w - mr + 28 << "\" y=\"" << ly + 1 << "\">" << detail::esc(s.label)
           << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace semiq::svg
