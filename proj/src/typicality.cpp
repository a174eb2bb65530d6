#include "ganaudit/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ganaudit/density.hpp"

namespace ganaudit {

EntropyEstimate estimate_entropy(const GeneratorModel& model, double sigma2, int n,
                                 const AISConfig& cfg, std::uint64_t seed,
                                 int workers) {
    if (n < 2) throw std::invalid_argument("estimate_entropy: n must be >= 2");
    std::vector<Tensor> xs = sample_dataset(model, sigma2, n, derive_seed(seed, 0x656e74));
    std::vector<LLEstimate> lls =
        estimate_ll(model, xs, sigma2, cfg, derive_seed(seed, 0x656e74, 1), workers);
    EntropyEstimate est;
    est.generated_lls.reserve(lls.size());
    double acc = 0.0;
    for (const LLEstimate& e : lls) {
        est.generated_lls.push_back(e.combined);
        acc += e.combined;
    }
    est.h_hat = -acc / static_cast<double>(lls.size());
    return est;
}

double bootstrap_epsilon(const std::vector<double>& generated_lls, int group_size,
                         double level, int resamples, std::uint64_t seed) {
    if (group_size < 1) throw std::invalid_argument("bootstrap_epsilon: group size must be >= 1");
    if (generated_lls.size() < static_cast<std::size_t>(group_size))
        throw std::invalid_argument("bootstrap_epsilon: pool smaller than group size");
    if (level <= 0.0 || level >= 1.0)
        throw std::invalid_argument("bootstrap_epsilon: level outside (0, 1)");
    if (resamples < 1) throw std::invalid_argument("bootstrap_epsilon: resamples must be >= 1");

    double pool_mean = 0.0;
    for (double v : generated_lls) pool_mean += v;
    pool_mean /= static_cast<double>(generated_lls.size());

    Rng rng(seed);
    std::vector<double> deviations(resamples);
    for (int b = 0; b < resamples; ++b) {
        double acc = 0.0;
        for (int i = 0; i < group_size; ++i)
            acc += generated_lls[rng.uniform_int(generated_lls.size())];
        deviations[b] = std::fabs(acc / group_size - pool_mean);
    }
    std::sort(deviations.begin(), deviations.end());
    // nearest-rank quantile
    std::size_t idx = static_cast<std::size_t>(std::ceil(level * resamples));
    idx = std::min(std::max<std::size_t>(idx, 1), deviations.size()) - 1;
    return deviations[idx];
}

TypicalityVerdict typicality_test(const std::vector<double>& group_lls, double h_hat,
                                  double epsilon) {
    if (group_lls.empty()) throw std::invalid_argument("typicality_test: empty group");
    TypicalityVerdict v;
    double acc = 0.0;
    for (double ll : group_lls) acc += ll;
    v.mean_ll = acc / static_cast<double>(group_lls.size());
    v.deviation = std::fabs(v.mean_ll + h_hat);
    v.margin = v.deviation - epsilon;
    v.member = v.margin <= 0.0;
    return v;
}

TypicalityReport build_typicality_report(
    const GeneratorModel& model, double sigma2,
    const std::vector<std::pair<std::string, std::vector<Tensor>>>& groups,
    int entropy_samples, int group_size, double level, int bootstrap_resamples,
    const AISConfig& cfg, std::uint64_t seed, int workers) {
    TypicalityReport report;
    report.group_size = group_size;
    report.level = level;
    report.bootstrap_resamples = bootstrap_resamples;

    EntropyEstimate ent =
        estimate_entropy(model, sigma2, entropy_samples, cfg, seed, workers);
    report.entropy_hat = ent.h_hat;
    report.epsilon = bootstrap_epsilon(ent.generated_lls, group_size, level,
                                       bootstrap_resamples, derive_seed(seed, 0x657073));

    std::size_t dims = model.output_size();
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& [name, samples] = groups[gi];
        std::vector<LLEstimate> lls =
            estimate_ll(model, samples, sigma2, cfg, derive_seed(seed, 0x677270, gi), workers);
        TypicalityGroupEntry entry;
        entry.name = name;
        entry.n = static_cast<int>(samples.size());
        entry.lls.reserve(lls.size());
        for (const LLEstimate& e : lls) entry.lls.push_back(e.combined);
        TypicalityVerdict v = typicality_test(entry.lls, report.entropy_hat, report.epsilon);
        entry.mean_ll_nats = v.mean_ll;
        entry.mean_ll_bits_per_dim = bits_per_dim(v.mean_ll, dims);
        entry.deviation = v.deviation;
        entry.margin = v.margin;
        entry.member = v.member;
        report.groups.push_back(std::move(entry));
    }
    return report;
}

}  // namespace ganaudit
