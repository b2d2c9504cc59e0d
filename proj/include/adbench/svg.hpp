#pragma once

// Standalone SVG line plots for the coverage and moving-average curves: one
// polyline plus a horizontal rule (threshold or average error). No
// timestamps or generator tags — re-rendering identical data produces an
// identical file.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>

#include "adbench/csv.hpp"
#include "adbench/errors.hpp"

namespace adbench {

struct SvgPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
    double hline = std::nan("");  // horizontal rule, skipped when NaN
    std::string hline_label;
};

inline void write_svg(const SvgPlot& p, const std::string& path) {
    if (p.x.size() != p.y.size() || p.x.empty())
        throw InvalidInputError("svg: x/y size mismatch or empty");
    const double w = 640, h = 420, ml = 60, mr = 20, mt = 36, mb = 44;

    double x_lo = *std::min_element(p.x.begin(), p.x.end());
    double x_hi = *std::max_element(p.x.begin(), p.x.end());
    double y_lo = *std::min_element(p.y.begin(), p.y.end());
    double y_hi = *std::max_element(p.y.begin(), p.y.end());
    if (!std::isnan(p.hline)) {
        y_lo = std::min(y_lo, p.hline);
        y_hi = std::max(y_hi, p.hline);
    }
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) y_hi = y_lo + 1.0;
    const double y_pad = 0.05 * (y_hi - y_lo);
    y_lo -= y_pad;
    y_hi += y_pad;

    auto sx = [&](double v) { return ml + (v - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
    auto sy = [&](double v) { return h - mb - (v - y_lo) / (y_hi - y_lo) * (h - mt - mb); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << p.title << "</text>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"" << h - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">" << p.x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 14 " << h / 2 << ")\">" << p.y_label << "</text>\n";
    // axis range ticks
    auto tick = [&](double vx, double vy, const std::string& txt, bool on_x) {
        if (on_x)
            out << "<text x=\"" << sx(vx) << "\" y=\"" << h - mb + 16
                << "\" text-anchor=\"middle\" font-size=\"10\">" << txt << "</text>\n";
        else
            out << "<text x=\"" << ml - 6 << "\" y=\"" << sy(vy) + 4
                << "\" text-anchor=\"end\" font-size=\"10\">" << txt << "</text>\n";
    };
    tick(x_lo, 0, format_double(x_lo), true);
    tick(x_hi, 0, format_double(x_hi), true);
    tick(0, y_lo + y_pad, format_double(y_lo + y_pad), false);
    tick(0, y_hi - y_pad, format_double(y_hi - y_pad), false);

    if (!std::isnan(p.hline)) {
        out << "<line x1=\"" << ml << "\" y1=\"" << sy(p.hline) << "\" x2=\"" << w - mr
            << "\" y2=\"" << sy(p.hline)
            << "\" stroke=\"red\" stroke-dasharray=\"6 3\"/>\n";
        out << "<text x=\"" << w - mr << "\" y=\"" << sy(p.hline) - 4
            << "\" text-anchor=\"end\" font-size=\"10\" fill=\"red\">" << p.hline_label
            << "</text>\n";
    }

    out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        if (i) out << ' ';
        out << format_double(sx(p.x[i])) << ',' << format_double(sy(p.y[i]));
    }
    out << "\"/>\n</svg>\n";
}

}  // namespace adbench
