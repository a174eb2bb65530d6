#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ganaudit/models.hpp"
#include "ganaudit/rng.hpp"
#include "ganaudit/tensor.hpp"

namespace ganaudit {

struct AISConfig {
    int steps = 500;  // intermediate distributions T
    int chains = 4;
    int leapfrog_steps = 10;
    double initial_step_size = 0.05;
    double target_accept = 0.65;
    double adapt_smoothing = 0.9;
    double schedule_sharpness = 4.0;
};

// Per-sample AIS output. The combined estimate is log-mean-exp over chains
// and is a stochastic lower bound of the true log-likelihood that tightens
// as T grows.
struct LLEstimate {
    std::vector<double> chain_logw;          // final log-weight per chain
    double combined = 0.0;                   // log_mean_exp(chain_logw)
    std::vector<double> trace;               // combined running estimate, length T
    std::vector<double> acceptance_history;  // mean acceptance per step, length T
    double mean_acceptance = 0.0;
    int divergences = 0;
    bool flagged = false;  // some chain rejected > 10% of steps as divergent
};

// beta_0 = 0 < ... < beta_T = 1, logistic in t/T and affinely rescaled so
// the endpoints are hit exactly.
std::vector<double> beta_schedule(int steps, double sharpness);

using LogDensityFn = std::function<double(const Tensor&)>;
using GradFn = std::function<Tensor(const Tensor&)>;

struct LeapfrogResult {
    Tensor z;
    Tensor momentum;
    bool finite = true;
};

// Half-kick / drift / half-kick with L drifts. Time-reversible: negating the
// momentum and integrating again recovers the start.
LeapfrogResult leapfrog(const Tensor& z, const Tensor& momentum, double step, int drifts,
                        const GradFn& grad);

struct HmcResult {
    Tensor z;
    bool accepted = false;
    bool divergent = false;
};

// One HMC transition: fresh standard-normal momentum, leapfrog proposal,
// Metropolis-Hastings accept with probability min(1, exp(H0 - H1)).
// Non-finite Hamiltonians reject automatically and are flagged divergent.
HmcResult hmc_step(const Tensor& z, const LogDensityFn& log_density, const GradFn& grad,
                   double step, int drifts, Rng& rng);

// Multiplicative step-size control on an exponential moving average of the
// acceptance indicator: grow 2% above target, shrink 2% below.
double adapt_step_size(double current, bool accepted, double smoothing, double target,
                       double& accept_ema);

struct StepSizeAdapter {
    double step;
    double accept_ema;
    double smoothing;
    double target;

    StepSizeAdapter(double step0, double smoothing_, double target_)
        : step(step0), accept_ema(target_), smoothing(smoothing_), target(target_) {}

    void update(bool accepted) {
        step = adapt_step_size(step, accepted, smoothing, target, accept_ema);
    }
};

// log(mean(exp(values))), max-shifted.
double log_mean_exp(const std::vector<double>& values);

struct ChainTrace {
    std::vector<double> logw;       // running log-weight after each step, length T
    std::vector<bool> accepted;     // per-step MH outcome
    int divergences = 0;
    double final_step_size = 0.0;
};

// One AIS chain: z0 ~ p(z), then for each level accumulate
// (beta_t - beta_{t-1}) * log_obs at the state BEFORE the transition and
// move with an HMC step targeting level t.
ChainTrace ais_chain(const GeneratorModel& model, const Tensor& x, double sigma2,
                     const AISConfig& cfg, std::uint64_t seed);

LLEstimate estimate_ll_single(const GeneratorModel& model, const Tensor& x, double sigma2,
                              const AISConfig& cfg, std::uint64_t seed,
                              std::uint64_t sample_id = 0);

// Chain streams are derived from (seed, sample_id, chain), so estimates are
// identical under any parallel schedule.
std::vector<LLEstimate> estimate_ll(const GeneratorModel& model,
                                    const std::vector<Tensor>& xs, double sigma2,
                                    const AISConfig& cfg, std::uint64_t seed,
                                    int workers = 1);

}  // namespace ganaudit
