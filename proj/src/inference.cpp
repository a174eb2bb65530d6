#include "ganaudit/inference.hpp"

#include <algorithm>
#include <stdexcept>

namespace ganaudit {

ClassDecision classify_by_ll(const std::vector<GeneratorModel>& class_models,
                             const Tensor& x, double sigma2, const AISConfig& cfg,
                             std::uint64_t seed) {
    if (class_models.size() < 2)
        throw std::invalid_argument("classify_by_ll: need at least 2 class models");
    ClassDecision d;
    d.scores.reserve(class_models.size());
    // every class shares the seed stream, so identical models score
    // identically and the tie rule is exact
    for (std::size_t c = 0; c < class_models.size(); ++c) {
        LLEstimate est = estimate_ll_single(class_models[c], x, sigma2, cfg, seed);
        d.scores.push_back(est.combined);
        if (d.class_id < 0 || est.combined > d.scores[d.class_id]) {
            d.class_id = static_cast<int>(c);
        } else if (est.combined == d.scores[d.class_id]) {
            d.tie = true;  // kept the lower class id
        }
    }
    return d;
}

ClassDecision classify_by_projection(const std::vector<GeneratorModel>& class_models,
                                     const Tensor& x, const InversionConfig& cfg,
                                     const DistanceFn& distance, std::uint64_t seed) {
    if (class_models.size() < 2)
        throw std::invalid_argument("classify_by_projection: need at least 2 class models");
    ClassDecision d;
    d.scores.reserve(class_models.size());
    for (std::size_t c = 0; c < class_models.size(); ++c) {
        ProjectionResult proj = project(class_models[c], x, cfg, seed);
        double dist = distance(x.reshaped(proj.reconstruction.shape), proj.reconstruction);
        d.scores.push_back(dist);
        if (d.class_id < 0 || dist < d.scores[d.class_id]) {
            d.class_id = static_cast<int>(c);
        } else if (dist == d.scores[d.class_id]) {
            d.tie = true;
        }
    }
    return d;
}

KnnDecision knn1_classify(const LabeledDataset& train, const Tensor& x,
                          const DistanceFn& distance) {
    if (train.samples.empty()) throw std::invalid_argument("knn1_classify: empty train set");
    if (train.samples.size() != train.labels.size())
        throw std::invalid_argument("knn1_classify: samples/labels length mismatch");
    KnnDecision d;
    for (std::size_t i = 0; i < train.samples.size(); ++i) {
        double dist = distance(x, train.samples[i]);
        if (i == 0 || dist < d.distance) {
            d.distance = dist;
            d.neighbor = i;
            d.class_id = train.labels[i];
            d.tie = false;
        } else if (dist == d.distance) {
            d.tie = true;  // kept the lower sample index
        }
    }
    return d;
}

double knn1_outlier_score(const std::vector<Tensor>& train, const Tensor& x,
                          const DistanceFn& distance) {
    if (train.empty()) throw std::invalid_argument("knn1_outlier_score: empty train set");
    double best = distance(x, train[0]);
    for (std::size_t i = 1; i < train.size(); ++i) best = std::min(best, distance(x, train[i]));
    return best;
}

double roc_auc(const std::vector<double>& inlier_scores,
               const std::vector<double>& outlier_scores) {
    if (inlier_scores.empty() || outlier_scores.empty())
        throw std::invalid_argument("roc_auc: both score lists must be non-empty");

    struct Entry {
        double score;
        bool outlier;
    };
    std::vector<Entry> all;
    all.reserve(inlier_scores.size() + outlier_scores.size());
    for (double s : inlier_scores) all.push_back({s, false});
    for (double s : outlier_scores) all.push_back({s, true});
    std::sort(all.begin(), all.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // mid-ranks over tie groups
    double outlier_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) ++j;
        double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (all[k].outlier) outlier_rank_sum += mid;
        i = j;
    }
    double n_out = static_cast<double>(outlier_scores.size());
    double n_in = static_cast<double>(inlier_scores.size());
    double u = outlier_rank_sum - n_out * (n_out + 1.0) / 2.0;
    return u / (n_out * n_in);
}

ClassifierReport make_classifier_report(const std::vector<int>& predicted,
                                        const std::vector<std::vector<double>>& scores,
                                        const std::vector<int>& labels, int n_classes,
                                        std::string method) {
    if (predicted.size() != labels.size())
        throw std::invalid_argument("make_classifier_report: length mismatch");
    ClassifierReport rep;
    rep.predicted = predicted;
    rep.scores = scores;
    rep.method = std::move(method);
    rep.confusion.assign(n_classes, std::vector<int>(n_classes, 0));
    int correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes || predicted[i] < 0 ||
            predicted[i] >= n_classes)
            throw std::invalid_argument("make_classifier_report: label outside class set");
        rep.confusion[labels[i]][predicted[i]]++;
        if (labels[i] == predicted[i]) ++correct;
    }
    rep.accuracy = predicted.empty() ? 0.0
                                     : static_cast<double>(correct) /
                                           static_cast<double>(predicted.size());
    return rep;
}

}  // namespace ganaudit
