#pragma once

#include <utility>
#include <vector>

#include "ganaudit/tensor.hpp"

namespace ganaudit {

// Mean coefficient of variation over non-overlapping patch x patch tiles
// (population std / (mean + 1e-8), per channel). The grid anchors at (0,0);
// trailing partial patches are dropped. Accepts HxW or HxWxC tensors.
double patch_cv(const Tensor& image, int patch = 8);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct Histogram {
    std::vector<double> edges;  // bins + 1 uniform edges
    std::vector<int> counts;
    int below = 0;  // values outside [lo, hi], excluded from counts
    int above = 0;
};

Histogram histogram(const std::vector<double>& values, int bins,
                    std::pair<double, double> range);

}  // namespace ganaudit
