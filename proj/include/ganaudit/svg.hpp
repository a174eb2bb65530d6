#pragma once

#include <string>
#include <vector>

namespace ganaudit {

struct SvgGroupSeries {
    std::string name;
    std::vector<double> values;
};

struct SvgHistogramSpec {
    int bins = 40;
    std::string title;
    std::string x_label = "value";
    bool has_band = false;  // shaded [center - epsilon, center + epsilon]
    double band_center = 0.0;
    double band_epsilon = 0.0;
    int width = 900;
    int height = 520;
};

// Self-contained SVG: translucent per-group bars in a fixed color order,
// dashed vertical mean lines, optional shaded band. No external renderer.
void emit_svg_histogram(const std::string& svg_path,
                        const std::vector<SvgGroupSeries>& groups,
                        const SvgHistogramSpec& spec);

struct SvgScatterSpec {
    std::string title;
    std::string x_label = "x";
    std::string y_label = "y";
    int width = 900;
    int height = 520;
};

void emit_svg_scatter(const std::string& svg_path, const std::vector<double>& xs,
                      const std::vector<double>& ys, const SvgScatterSpec& spec);

// Stable group color order used by the plots.
const std::vector<std::string>& svg_palette();

}  // namespace ganaudit
