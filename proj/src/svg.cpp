#include "ganaudit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ganaudit/analysis.hpp"

namespace ganaudit {

const std::vector<std::string>& svg_palette() {
    static const std::vector<std::string> colors = {
        "#303030", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    };
    return colors;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void emit_svg_histogram(const std::string& svg_path,
                        const std::vector<SvgGroupSeries>& groups,
                        const SvgHistogramSpec& spec) {
    if (groups.empty()) throw std::invalid_argument("emit_svg_histogram: no groups");
    for (const auto& g : groups)
        if (g.values.empty())
            throw std::invalid_argument("emit_svg_histogram: empty group " + g.name);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& g : groups)
        for (double v : g.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (spec.has_band) {
        lo = std::min(lo, spec.band_center - spec.band_epsilon);
        hi = std::max(hi, spec.band_center + spec.band_epsilon);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.02 * (hi - lo);
    lo -= pad;
    hi += pad;

    std::vector<Histogram> hists;
    int peak = 1;
    for (const auto& g : groups) {
        hists.push_back(histogram(g.values, spec.bins, {lo, hi}));
        for (int c : hists.back().counts) peak = std::max(peak, c);
    }

    const double ml = 60, mr = 20, mt = 40, mb = 50;
    double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
    auto sx = [&](double v) { return ml + (v - lo) / (hi - lo) * pw; };
    auto sy = [&](double count) { return mt + ph - count / static_cast<double>(peak) * ph; };

    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("emit_svg_histogram: cannot write " + svg_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
        << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        out << "<text x=\"" << spec.width / 2.0 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << spec.title << "</text>\n";

    if (spec.has_band) {
        double x0 = sx(spec.band_center - spec.band_epsilon);
        double x1 = sx(spec.band_center + spec.band_epsilon);
        out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(mt) << "\" width=\""
            << fmt(x1 - x0) << "\" height=\"" << fmt(ph)
            << "\" fill=\"#ffd54d\" fill-opacity=\"0.35\"/>\n";
    }

    const auto& palette = svg_palette();
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const std::string& color = palette[gi % palette.size()];
        const Histogram& h = hists[gi];
        double bw = (sx(h.edges[1]) - sx(h.edges[0]));
        for (int b = 0; b < spec.bins; ++b) {
            if (h.counts[b] == 0) continue;
            double x = sx(h.edges[b]);
            double y = sy(h.counts[b]);
            out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
                << fmt(bw) << "\" height=\"" << fmt(mt + ph - y) << "\" fill=\"" << color
                << "\" fill-opacity=\"0.45\"/>\n";
        }
        double mean = 0.0;
        for (double v : groups[gi].values) mean += v;
        mean /= static_cast<double>(groups[gi].values.size());
        out << "<line x1=\"" << fmt(sx(mean)) << "\" y1=\"" << fmt(mt) << "\" x2=\""
            << fmt(sx(mean)) << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n";
        // legend
        double ly = mt + 14 + 18.0 * gi;
        out << "<rect x=\"" << fmt(ml + pw - 150) << "\" y=\"" << fmt(ly - 10)
            << "\" width=\"12\" height=\"12\" fill=\"" << color
            << "\" fill-opacity=\"0.6\"/>\n";
        out << "<text x=\"" << fmt(ml + pw - 132) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << groups[gi].name
            << "</text>\n";
    }

    // axes
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
        << fmt(ml + pw) << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double v = lo + (hi - lo) * i / 5.0;
        double x = sx(v);
        out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(mt + ph + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(v) << "</text>\n";
        int count = static_cast<int>(std::lround(peak * i / 5.0));
        double y = sy(count);
        out << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << count
            << "</text>\n";
    }
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(spec.height - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << spec.x_label << "</text>\n";
    out << "</svg>\n";
}

void emit_svg_scatter(const std::string& svg_path, const std::vector<double>& xs,
                      const std::vector<double>& ys, const SvgScatterSpec& spec) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("emit_svg_scatter: bad point lists");
    auto bounds = [](const std::vector<double>& v) {
        double lo = *std::min_element(v.begin(), v.end());
        double hi = *std::max_element(v.begin(), v.end());
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
        }
        double pad = 0.04 * (hi - lo);
        return std::pair<double, double>{lo - pad, hi + pad};
    };
    auto [xlo, xhi] = bounds(xs);
    auto [ylo, yhi] = bounds(ys);

    const double ml = 70, mr = 20, mt = 40, mb = 55;
    double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
    auto sx = [&, xlo = xlo, xhi = xhi](double v) { return ml + (v - xlo) / (xhi - xlo) * pw; };
    auto sy = [&, ylo = ylo, yhi = yhi](double v) {
        return mt + ph - (v - ylo) / (yhi - ylo) * ph;
    };

    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("emit_svg_scatter: cannot write " + svg_path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
        << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width << " "
        << spec.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        out << "<text x=\"" << spec.width / 2.0 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"16\">" << spec.title << "</text>\n";
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << "<circle cx=\"" << fmt(sx(xs[i])) << "\" cy=\"" << fmt(sy(ys[i]))
            << "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";

    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
        << fmt(ml + pw) << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double xv = xlo + (xhi - xlo) * i / 5.0;
        double yv = ylo + (yhi - ylo) * i / 5.0;
        out << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(mt + ph + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(xv) << "</text>\n";
        out << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(sy(yv) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(yv) << "</text>\n";
    }
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(spec.height - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << spec.x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 16 "
        << fmt(mt + ph / 2) << ")\">" << spec.y_label << "</text>\n";
    out << "</svg>\n";
}

}  // namespace ganaudit
