#include "ganaudit/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace ganaudit {

double patch_cv(const Tensor& image, int patch) {
    if (patch < 1) throw std::invalid_argument("patch_cv: patch must be >= 1");
    if (image.shape.size() != 2 && image.shape.size() != 3)
        throw std::invalid_argument("patch_cv: image must be HxW or HxWxC");
    std::size_t h = image.shape[0], w = image.shape[1];
    std::size_t channels = image.shape.size() == 3 ? image.shape[2] : 1;
    std::size_t p = static_cast<std::size_t>(patch);
    if (h < p || w < p)
        throw std::invalid_argument("patch_cv: image smaller than one patch");

    std::size_t rows = h / p, cols = w / p;
    double acc = 0.0;
    std::size_t count = 0;
    double n = static_cast<double>(p * p);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t pr = 0; pr < rows; ++pr) {
            for (std::size_t pc = 0; pc < cols; ++pc) {
                double sum = 0.0, sumsq = 0.0;
                for (std::size_t i = 0; i < p; ++i) {
                    for (std::size_t j = 0; j < p; ++j) {
                        std::size_t y = pr * p + i, x = pc * p + j;
                        double v = image.data[(y * w + x) * channels + c];
                        sum += v;
                        sumsq += v * v;
                    }
                }
                double mean = sum / n;
                double var = std::max(sumsq / n - mean * mean, 0.0);
                acc += std::sqrt(var) / (mean + 1e-8);
                ++count;
            }
        }
    }
    return acc / static_cast<double>(count);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
    double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

Histogram histogram(const std::vector<double>& values, int bins,
                    std::pair<double, double> range) {
    if (values.empty()) throw std::invalid_argument("histogram: empty input");
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    double lo = range.first, hi = range.second;
    if (!(hi > lo)) throw std::invalid_argument("histogram: range must be non-empty");

    Histogram out;
    out.edges.resize(bins + 1);
    // multiply before dividing so exact-grid values land on their edges
    for (int i = 0; i <= bins; ++i) out.edges[i] = lo + (hi - lo) * i / bins;
    out.counts.assign(bins, 0);
    for (double v : values) {
        if (v < lo) {
            ++out.below;
            continue;
        }
        if (v > hi) {
            ++out.above;
            continue;
        }
        int idx = std::min(static_cast<int>((v - lo) * bins / (hi - lo)), bins - 1);
        ++out.counts[idx];
    }
    return out;
}

}  // namespace ganaudit
