#pragma once

#include <cstdint>
#include <vector>

#include "ganaudit/models.hpp"
#include "ganaudit/tensor.hpp"

namespace ganaudit {

struct InversionConfig {
    int iterations = 750;
    int restarts = 4;
    int init_pool = 500;
    double lr0 = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct ProjectionResult {
    Tensor z_star;
    Tensor reconstruction;
    double error = 0.0;  // freshly recomputed |G(z_star) - x|
    // l2 error per restart: init, one entry per iteration, final
    std::vector<std::vector<double>> restart_traces;
    int winner_restart = -1;
    int failed_restarts = 0;
};

// lr0 * (1 + cos(pi t / T)) / 2
double cosine_lr(int t, int total, double lr0);

// Multi-restart latent inversion: each restart draws init_pool prior
// samples, starts from the decoded sample closest to x, then runs Adam with
// a cosine schedule on the squared pixel distance. Restart streams are
// derived from (seed, sample_id, restart) so parallel order never matters.
ProjectionResult project(const GeneratorModel& model, const Tensor& x,
                         const InversionConfig& cfg, std::uint64_t seed,
                         std::uint64_t sample_id = 0);

// Single optimization run from a caller-supplied initial latent (no pool,
// no restarts).
ProjectionResult project_from(const GeneratorModel& model, const Tensor& x,
                              const InversionConfig& cfg, const Tensor& init);

struct ReconError {
    std::uint64_t sample_id;
    double error;
    int winner_restart;
};

std::vector<ReconError> recon_error_set(const GeneratorModel& model,
                                        const std::vector<Tensor>& xs,
                                        const InversionConfig& cfg, std::uint64_t seed,
                                        int workers = 1);

}  // namespace ganaudit
