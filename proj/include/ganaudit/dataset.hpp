#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganaudit/tensor.hpp"

namespace ganaudit {

// On-disk dataset: one stacked GTEN (first dim = sample index) plus a JSON
// sidecar with the group tag and optional integer labels.
struct Dataset {
    std::vector<Tensor> samples;
    std::vector<int> labels;  // empty when unlabeled
    std::string group;
};

void save_dataset(const std::string& dir, const Dataset& ds);
Dataset load_dataset(const std::string& dir);

enum class SyntheticKind { TwoClassPpca, Spiral, SingleColor, ShiftedCluster };

SyntheticKind synthetic_kind_from_string(const std::string& s);

struct SyntheticParams {
    int n = 200;        // samples per dataset (per class for two-class-ppca)
    int n_test = 50;    // two-class-ppca held-out samples per class
    int dim = 16;       // flat sample dimension
    int height = 16;    // image kinds
    int width = 16;
    int latent_k = 2;   // intrinsic dimension of the generating PPCA models
    double sigma2 = 0.05;
    double mean_scale = 3.0;  // two-class-ppca class means at +-mean_scale
    double shift = 3.0;       // shifted-cluster offset per coordinate
    double value = -1.0;      // single-color fixed level; negative = random per sample
};

// Writes dataset directories (and for spiral also a model directory) under
// out_dir; returns the list of paths created.
std::vector<std::string> make_synthetic(SyntheticKind kind, const SyntheticParams& params,
                                        std::uint64_t seed, const std::string& out_dir);

}  // namespace ganaudit
