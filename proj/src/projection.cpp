#include "ganaudit/projection.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ganaudit/autodiff.hpp"
#include "ganaudit/parallel.hpp"
#include "ganaudit/rng.hpp"

namespace ganaudit {

double cosine_lr(int t, int total, double lr0) {
    if (t < 0 || t > total) throw std::invalid_argument("cosine_lr: t outside [0, T]");
    if (total < 1) throw std::invalid_argument("cosine_lr: T must be >= 1");
    return lr0 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * t / total));
}

namespace {

struct RestartOutcome {
    Tensor z;
    double error = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    bool failed = false;
};

Tensor pool_init(const GeneratorModel& model, const Tensor& x, int pool, Rng& rng) {
    std::size_t d = static_cast<std::size_t>(model.latent_dim);
    Tensor best_z = Tensor::zeros({d});
    double best_sq = std::numeric_limits<double>::infinity();
    Tensor z = Tensor::zeros({d});
    for (int i = 0; i < pool; ++i) {
        for (double& v : z.data) v = rng.normal();
        Tensor g = decode(model, z);
        double sq = squared_distance(g, x.reshaped(g.shape));
        if (sq < best_sq) {
            best_sq = sq;
            best_z = z;
        }
    }
    return best_z;
}

RestartOutcome descend(const GeneratorModel& model, const Tensor& x,
                       const InversionConfig& cfg, Tensor z) {
    std::size_t d = static_cast<std::size_t>(model.latent_dim);
    RestartOutcome out;
    out.trace.reserve(cfg.iterations + 2);
    Tensor m = Tensor::zeros({d});
    Tensor v = Tensor::zeros({d});
    double b1t = 1.0, b2t = 1.0;

    for (int t = 0; t < cfg.iterations; ++t) {
        // loss = |G(z) - x|^2 on the tape, gradient via one backward pass
        Tensor grad;
        double sq;
        if (model.kind == ModelKind::Spiral || model.kind == ModelKind::Constant) {
            Tensor g = decode(model, z);
            Tensor residual = sub(g, x.reshaped(g.shape));
            sq = squared_norm(residual);
            grad = vjp(model, z, scale(residual, 2.0));
        } else {
            Tape tape;
            int z_node = tape.input(z);
            int g_node = record_decoder(tape, model, z_node);
            int r_node = tape.sub_const(g_node, x.reshaped(tape.value(g_node).shape));
            int loss = tape.sum_squares(r_node);
            sq = tape.value(loss).data[0];
            grad = tape.backward(loss, Tensor::scalar(1.0), z_node);
        }
        if (!std::isfinite(sq) || !is_finite(grad)) {
            out.failed = true;
            return out;
        }
        out.trace.push_back(std::sqrt(sq));

        double lr = cosine_lr(t, cfg.iterations, cfg.lr0);
        b1t *= cfg.adam_beta1;
        b2t *= cfg.adam_beta2;
        for (std::size_t i = 0; i < d; ++i) {
            m.data[i] = cfg.adam_beta1 * m.data[i] + (1.0 - cfg.adam_beta1) * grad.data[i];
            v.data[i] = cfg.adam_beta2 * v.data[i] +
                        (1.0 - cfg.adam_beta2) * grad.data[i] * grad.data[i];
            double m_hat = m.data[i] / (1.0 - b1t);
            double v_hat = v.data[i] / (1.0 - b2t);
            z.data[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
        if (!is_finite(z)) {
            out.failed = true;
            return out;
        }
    }
    out.z = z;
    Tensor g = decode(model, z);
    out.error = l2_distance(g, x.reshaped(g.shape));
    out.trace.push_back(out.error);
    if (!std::isfinite(out.error)) out.failed = true;
    return out;
}

RestartOutcome run_restart(const GeneratorModel& model, const Tensor& x,
                           const InversionConfig& cfg, std::uint64_t stream_seed) {
    Rng rng(stream_seed);
    return descend(model, x, cfg, pool_init(model, x, cfg.init_pool, rng));
}

}  // namespace

ProjectionResult project(const GeneratorModel& model, const Tensor& x,
                         const InversionConfig& cfg, std::uint64_t seed,
                         std::uint64_t sample_id) {
    if (x.size() != model.output_size())
        throw std::invalid_argument("project: sample shape mismatch");
    if (cfg.iterations < 1 || cfg.restarts < 1 || cfg.init_pool < 1)
        throw std::invalid_argument("project: iterations, restarts, init_pool must be >= 1");

    ProjectionResult result;
    result.restart_traces.resize(cfg.restarts);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        RestartOutcome o = run_restart(model, x, cfg, derive_seed(seed, sample_id, r));
        result.restart_traces[r] = std::move(o.trace);
        if (o.failed) {
            ++result.failed_restarts;
            continue;
        }
        if (o.error < best) {
            best = o.error;
            result.z_star = std::move(o.z);
            result.winner_restart = r;
        }
    }
    if (result.winner_restart < 0)
        throw std::runtime_error("project: all restarts diverged");
    result.reconstruction = forward_eval(model, result.z_star);
    result.error = l2_distance(result.reconstruction, x.reshaped(result.reconstruction.shape));
    return result;
}

ProjectionResult project_from(const GeneratorModel& model, const Tensor& x,
                              const InversionConfig& cfg, const Tensor& init) {
    if (x.size() != model.output_size())
        throw std::invalid_argument("project_from: sample shape mismatch");
    if (init.size() != static_cast<std::size_t>(model.latent_dim))
        throw std::invalid_argument("project_from: init dimension mismatch");
    RestartOutcome o = descend(model, x, cfg, init);
    if (o.failed) throw std::runtime_error("project_from: optimization diverged");
    ProjectionResult result;
    result.restart_traces.push_back(std::move(o.trace));
    result.winner_restart = 0;
    result.z_star = std::move(o.z);
    result.reconstruction = forward_eval(model, result.z_star);
    result.error = l2_distance(result.reconstruction, x.reshaped(result.reconstruction.shape));
    return result;
}

std::vector<ReconError> recon_error_set(const GeneratorModel& model,
                                        const std::vector<Tensor>& xs,
                                        const InversionConfig& cfg, std::uint64_t seed,
                                        int workers) {
    if (xs.empty()) throw std::invalid_argument("recon_error_set: empty input");
    std::vector<ReconError> out(xs.size());
    parallel_for(xs.size(), workers, [&](std::size_t i) {
        ProjectionResult r = project(model, xs[i], cfg, seed, i);
        out[i] = ReconError{i, r.error, r.winner_restart};
    });
    return out;
}

}  // namespace ganaudit
