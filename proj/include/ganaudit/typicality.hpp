#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ganaudit/ais.hpp"
#include "ganaudit/models.hpp"

namespace ganaudit {

// Entropy of the model's density, estimated as the mean negative AIS
// log-likelihood of n fresh samples drawn from the model itself. The LL
// pool is retained for the bootstrap.
struct EntropyEstimate {
    double h_hat = 0.0;
    std::vector<double> generated_lls;
};

EntropyEstimate estimate_entropy(const GeneratorModel& model, double sigma2, int n,
                                 const AISConfig& cfg, std::uint64_t seed,
                                 int workers = 1);

// level-quantile of |resample mean - pool mean| over bootstrap resamples of
// size group_size drawn from the generated-LL pool.
double bootstrap_epsilon(const std::vector<double>& generated_lls, int group_size,
                         double level, int resamples = 10000,
                         std::uint64_t seed = 0x626f6f74);

struct TypicalityVerdict {
    bool member = false;
    double margin = 0.0;     // |mean + H| - epsilon, negative inside the set
    double mean_ll = 0.0;
    double deviation = 0.0;  // |mean + H|
};

TypicalityVerdict typicality_test(const std::vector<double>& group_lls, double h_hat,
                                  double epsilon);

struct TypicalityGroupEntry {
    std::string name;
    int n = 0;
    double mean_ll_nats = 0.0;
    double mean_ll_bits_per_dim = 0.0;
    double deviation = 0.0;
    double margin = 0.0;
    bool member = false;
    std::vector<double> lls;
};

struct TypicalityReport {
    double entropy_hat = 0.0;
    double epsilon = 0.0;
    int group_size = 50;
    double level = 0.95;
    int bootstrap_resamples = 10000;
    std::vector<TypicalityGroupEntry> groups;
};

// Builds the full report. H-hat and every group LL use the same AIS config
// so estimator bias cancels in the comparison.
TypicalityReport build_typicality_report(
    const GeneratorModel& model, double sigma2,
    const std::vector<std::pair<std::string, std::vector<Tensor>>>& groups,
    int entropy_samples, int group_size, double level, int bootstrap_resamples,
    const AISConfig& cfg, std::uint64_t seed, int workers = 1);

}  // namespace ganaudit
