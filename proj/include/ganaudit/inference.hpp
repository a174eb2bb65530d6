#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ganaudit/ais.hpp"
#include "ganaudit/projection.hpp"
#include "ganaudit/tensor.hpp"

namespace ganaudit {

// Pluggable evaluation distance. Optimization always uses plain l2; this
// hook exists for perceptual metrics supplied by callers.
using DistanceFn = std::function<double(const Tensor&, const Tensor&)>;

inline DistanceFn l2_distance_fn() {
    return [](const Tensor& a, const Tensor& b) { return l2_distance(a, b); };
}

struct LabeledDataset {
    std::vector<Tensor> samples;
    std::vector<int> labels;
    std::string group;
};

struct ClassDecision {
    int class_id = -1;
    bool tie = false;
    std::vector<double> scores;  // per-class score, higher = chosen for ll
};

// argmax over class-conditional AIS log-likelihoods; ties break to the
// lowest class id.
ClassDecision classify_by_ll(const std::vector<GeneratorModel>& class_models,
                             const Tensor& x, double sigma2, const AISConfig& cfg,
                             std::uint64_t seed);

// argmin over per-class projection distances under the given metric.
ClassDecision classify_by_projection(const std::vector<GeneratorModel>& class_models,
                                     const Tensor& x, const InversionConfig& cfg,
                                     const DistanceFn& distance, std::uint64_t seed);

struct KnnDecision {
    int class_id = -1;
    std::size_t neighbor = 0;
    double distance = 0.0;
    bool tie = false;
};

KnnDecision knn1_classify(const LabeledDataset& train, const Tensor& x,
                          const DistanceFn& distance);

// distance to the nearest training sample; higher = more outlying
double knn1_outlier_score(const std::vector<Tensor>& train, const Tensor& x,
                          const DistanceFn& distance);

// Rank-based AUC with mid-rank tie handling:
// P(outlier > inlier) + P(outlier == inlier) / 2.
double roc_auc(const std::vector<double>& inlier_scores,
               const std::vector<double>& outlier_scores);

struct ClassifierReport {
    std::vector<int> predicted;
    std::vector<std::vector<double>> scores;
    double accuracy = 0.0;
    std::vector<std::vector<int>> confusion;  // [true][predicted]
    std::string method;
};

ClassifierReport make_classifier_report(const std::vector<int>& predicted,
                                        const std::vector<std::vector<double>>& scores,
                                        const std::vector<int>& labels, int n_classes,
                                        std::string method);

}  // namespace ganaudit
