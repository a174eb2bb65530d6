#include "ganaudit/ais.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ganaudit/density.hpp"
#include "ganaudit/parallel.hpp"

namespace ganaudit {

std::vector<double> beta_schedule(int steps, double sharpness) {
    if (steps < 1) throw std::invalid_argument("beta_schedule: steps must be >= 1");
    if (sharpness <= 0.0) throw std::invalid_argument("beta_schedule: sharpness must be > 0");
    auto logistic = [](double s) { return 1.0 / (1.0 + std::exp(-s)); };
    double lo = logistic(-sharpness), hi = logistic(sharpness);
    std::vector<double> betas(steps + 1);
    for (int t = 0; t <= steps; ++t) {
        double u = static_cast<double>(t) / steps;
        betas[t] = (logistic(sharpness * (2.0 * u - 1.0)) - lo) / (hi - lo);
    }
    betas.front() = 0.0;
    betas.back() = 1.0;
    return betas;
}

LeapfrogResult leapfrog(const Tensor& z, const Tensor& momentum, double step, int drifts,
                        const GradFn& grad) {
    if (drifts < 1) throw std::invalid_argument("leapfrog: drifts must be >= 1");
    LeapfrogResult out;
    out.z = z;
    out.momentum = momentum;
    if (step == 0.0) return out;

    Tensor g = grad(out.z);
    if (!is_finite(g)) {
        out.finite = false;
        return out;
    }
    axpy(0.5 * step, g, out.momentum);
    for (int l = 0; l < drifts; ++l) {
        axpy(step, out.momentum, out.z);
        if (!is_finite(out.z)) {
            out.finite = false;
            return out;
        }
        g = grad(out.z);
        if (!is_finite(g)) {
            out.finite = false;
            return out;
        }
        axpy(l + 1 < drifts ? step : 0.5 * step, g, out.momentum);
    }
    if (!is_finite(out.momentum)) out.finite = false;
    return out;
}

HmcResult hmc_step(const Tensor& z, const LogDensityFn& log_density, const GradFn& grad,
                   double step, int drifts, Rng& rng) {
    if (step <= 0.0) throw std::invalid_argument("hmc_step: step must be > 0");
    Tensor p = Tensor::zeros(z.shape);
    for (double& v : p.data) v = rng.normal();

    HmcResult out;
    out.z = z;
    double h0 = -log_density(z) + 0.5 * squared_norm(p);

    LeapfrogResult prop = leapfrog(z, p, step, drifts, grad);
    double u = rng.uniform();  // drawn unconditionally to keep streams aligned
    if (!prop.finite) {
        out.divergent = true;
        return out;
    }
    double h1 = -log_density(prop.z) + 0.5 * squared_norm(prop.momentum);
    if (!std::isfinite(h0) || !std::isfinite(h1)) {
        out.divergent = true;
        return out;
    }
    if (std::log(u) < h0 - h1) {
        out.z = std::move(prop.z);
        out.accepted = true;
    }
    return out;
}

double adapt_step_size(double current, bool accepted, double smoothing, double target,
                       double& accept_ema) {
    if (smoothing <= 0.0 || smoothing >= 1.0)
        throw std::invalid_argument("adapt_step_size: smoothing outside (0, 1)");
    accept_ema = smoothing * accept_ema + (1.0 - smoothing) * (accepted ? 1.0 : 0.0);
    return current * (accept_ema > target ? 1.02 : 0.98);
}

double log_mean_exp(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("log_mean_exp: empty input");
    double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;  // all -inf (or a nan poisoned the max)
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - m);
    return m + std::log(acc / static_cast<double>(values.size()));
}

ChainTrace ais_chain(const GeneratorModel& model, const Tensor& x, double sigma2,
                     const AISConfig& cfg, std::uint64_t seed) {
    if (x.size() != model.output_size())
        throw std::invalid_argument("ais_chain: sample shape mismatch");
    if (cfg.steps < 1 || cfg.chains < 1 || cfg.leapfrog_steps < 1)
        throw std::invalid_argument("ais_chain: steps, chains, leapfrog_steps must be >= 1");
    if (cfg.target_accept <= 0.0 || cfg.target_accept >= 1.0)
        throw std::invalid_argument("ais_chain: target acceptance outside (0, 1)");

    std::vector<double> betas = beta_schedule(cfg.steps, cfg.schedule_sharpness);
    Rng rng(seed);
    Tensor z = Tensor::zeros({static_cast<std::size_t>(model.latent_dim)});
    for (double& v : z.data) v = rng.normal();

    ChainTrace trace;
    trace.logw.reserve(cfg.steps);
    trace.accepted.reserve(cfg.steps);
    StepSizeAdapter adapter(cfg.initial_step_size, cfg.adapt_smoothing, cfg.target_accept);

    double logw = 0.0;
    for (int t = 1; t <= cfg.steps; ++t) {
        double beta = betas[t];
        // weight update uses the state before the transition
        logw += (beta - betas[t - 1]) * log_obs(x, decode(model, z), sigma2);
        trace.logw.push_back(logw);

        auto log_density = [&](const Tensor& zz) {
            return log_prior(zz) + beta * log_obs(x, decode(model, zz), sigma2);
        };
        auto grad = [&](const Tensor& zz) {
            return annealed_eval(model, x, zz, sigma2, beta).grad;
        };
        HmcResult res = hmc_step(z, log_density, grad, adapter.step, cfg.leapfrog_steps, rng);
        if (res.divergent) ++trace.divergences;
        trace.accepted.push_back(res.accepted);
        z = std::move(res.z);
        adapter.update(res.accepted);
    }
    trace.final_step_size = adapter.step;
    return trace;
}

LLEstimate estimate_ll_single(const GeneratorModel& model, const Tensor& x, double sigma2,
                              const AISConfig& cfg, std::uint64_t seed,
                              std::uint64_t sample_id) {
    std::vector<ChainTrace> chains(cfg.chains);
    for (int c = 0; c < cfg.chains; ++c)
        chains[c] = ais_chain(model, x, sigma2, cfg, derive_seed(seed, sample_id, c));

    LLEstimate est;
    est.chain_logw.reserve(cfg.chains);
    for (const ChainTrace& c : chains) est.chain_logw.push_back(c.logw.back());
    est.combined = log_mean_exp(est.chain_logw);

    est.trace.resize(cfg.steps);
    est.acceptance_history.resize(cfg.steps);
    std::vector<double> at(cfg.chains);
    double total_accept = 0.0;
    for (int t = 0; t < cfg.steps; ++t) {
        double acc = 0.0;
        for (int c = 0; c < cfg.chains; ++c) {
            at[c] = chains[c].logw[t];
            acc += chains[c].accepted[t] ? 1.0 : 0.0;
        }
        est.trace[t] = log_mean_exp(at);
        est.acceptance_history[t] = acc / cfg.chains;
        total_accept += est.acceptance_history[t];
    }
    est.mean_acceptance = total_accept / cfg.steps;
    for (const ChainTrace& c : chains) {
        est.divergences += c.divergences;
        if (c.divergences > cfg.steps / 10) est.flagged = true;
    }
    return est;
}

std::vector<LLEstimate> estimate_ll(const GeneratorModel& model,
                                    const std::vector<Tensor>& xs, double sigma2,
                                    const AISConfig& cfg, std::uint64_t seed,
                                    int workers) {
    if (xs.empty()) throw std::invalid_argument("estimate_ll: empty input");
    std::vector<LLEstimate> out(xs.size());
    parallel_for(xs.size(), workers, [&](std::size_t i) {
        out[i] = estimate_ll_single(model, xs[i], sigma2, cfg, seed, i);
    });
    return out;
}

}  // namespace ganaudit
