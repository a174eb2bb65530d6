#include "ganaudit/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ganaudit/autodiff.hpp"
#include "linalg.hpp"

namespace ganaudit {

namespace {
constexpr double kLn2Pi = 1.8378770664093454835606594728112;
constexpr double kLn2 = 0.69314718055994530941723212145818;
}  // namespace

double log_obs(const Tensor& x, const Tensor& g, double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("log_obs: sigma2 must be positive");
    if (x.size() != g.size()) throw std::invalid_argument("log_obs: shape mismatch");
    double d = static_cast<double>(x.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = x.data[i] - g.data[i];
        sq += r * r;
    }
    return -0.5 * d * (kLn2Pi + std::log(sigma2)) - sq / (2.0 * sigma2);
}

double log_prior(const Tensor& z) {
    double d = static_cast<double>(z.size());
    return -0.5 * d * kLn2Pi - 0.5 * squared_norm(z);
}

double log_joint_annealed(const GeneratorModel& model, const Tensor& x,
                          const Tensor& z, double sigma2, double beta) {
    if (beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("log_joint_annealed: beta outside [0, 1]");
    double lp = log_prior(z);
    if (beta == 0.0) return lp;
    return lp + beta * log_obs(x, decode(model, z), sigma2);
}

AnnealedEval annealed_eval(const GeneratorModel& model, const Tensor& x,
                           const Tensor& z, double sigma2, double beta) {
    AnnealedEval out;
    Tensor g = decode(model, z);
    double d = static_cast<double>(x.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = x.data[i] - g.data[i];
        sq += r * r;
    }
    double lobs = -0.5 * d * (kLn2Pi + std::log(sigma2)) - sq / (2.0 * sigma2);
    out.log_density = log_prior(z) + beta * lobs;

    // d/dz: -z + (beta / sigma2) * J^T (x - g)
    Tensor residual = sub(x.reshaped(g.shape), g);
    out.grad = scale(z, -1.0);
    if (beta != 0.0) {
        Tensor pull = vjp(model, z, residual);
        axpy(beta / sigma2, pull, out.grad);
    }
    return out;
}

double ppca_loglik(const GeneratorModel& model, double sigma2, const Tensor& x) {
    if (model.kind != ModelKind::Linear)
        throw std::invalid_argument("ppca_loglik: model must be linear");
    if (sigma2 <= 0.0) throw std::invalid_argument("ppca_loglik: sigma2 must be positive");
    std::size_t dim = model.weight.shape[0];
    std::size_t k = model.weight.shape[1];
    if (x.size() != dim) throw std::invalid_argument("ppca_loglik: shape mismatch");

    // Woodbury: |W W^T + s I_D| = s^(D-k) |M|, M = W^T W + s I_k
    std::vector<double> m(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                acc += model.weight.data[i * k + a] * model.weight.data[i * k + b];
            m[a * k + b] = acc + (a == b ? sigma2 : 0.0);
            m[b * k + a] = m[a * k + b];
        }
    std::vector<double> l = linalg::cholesky(k, m);
    double logdet_m = 0.0;
    for (std::size_t a = 0; a < k; ++a) logdet_m += 2.0 * std::log(l[a * k + a]);
    double logdet = static_cast<double>(dim - k) * std::log(sigma2) + logdet_m;

    std::vector<double> r(dim);
    for (std::size_t i = 0; i < dim; ++i) r[i] = x.data[i] - model.mean.data[i];
    std::vector<double> t(k, 0.0);
    double rr = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        rr += r[i] * r[i];
        for (std::size_t a = 0; a < k; ++a) t[a] += model.weight.data[i * k + a] * r[i];
    }
    std::vector<double> mt = linalg::cholesky_solve(k, l, t);
    double tmt = 0.0;
    for (std::size_t a = 0; a < k; ++a) tmt += t[a] * mt[a];
    double quad = (rr - tmt) / sigma2;

    return -0.5 * (static_cast<double>(dim) * kLn2Pi + logdet + quad);
}

double quadrature_loglik(const GeneratorModel& model, double sigma2, const Tensor& x,
                         std::pair<double, double> z_range, int steps) {
    if (model.latent_dim > 2)
        throw std::invalid_argument("quadrature_loglik: latent_dim must be <= 2");
    if (steps < 2) throw std::invalid_argument("quadrature_loglik: steps must be >= 2");
    double lo = z_range.first, hi = z_range.second;
    if (hi - lo < 6.0)
        throw std::invalid_argument(
            "quadrature_loglik: range must cover >= 6 prior standard deviations");

    double h = (hi - lo) / static_cast<double>(steps - 1);
    double log_h = std::log(h);
    auto axis_log_weight = [&](int i) {
        return (i == 0 || i == steps - 1) ? log_h - kLn2 : log_h;
    };

    std::vector<double> terms;
    Tensor z = Tensor::zeros({static_cast<std::size_t>(model.latent_dim)});
    if (model.latent_dim == 1) {
        terms.reserve(steps);
        for (int i = 0; i < steps; ++i) {
            z.data[0] = lo + h * i;
            terms.push_back(log_joint_annealed(model, x, z, sigma2, 1.0) + axis_log_weight(i));
        }
    } else {
        terms.reserve(static_cast<std::size_t>(steps) * steps);
        for (int i = 0; i < steps; ++i)
            for (int j = 0; j < steps; ++j) {
                z.data[0] = lo + h * i;
                z.data[1] = lo + h * j;
                terms.push_back(log_joint_annealed(model, x, z, sigma2, 1.0) +
                                axis_log_weight(i) + axis_log_weight(j));
            }
    }
    double m = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - m);
    return m + std::log(acc);
}

double bits_per_dim(double ll_nats, std::size_t dims) {
    if (dims < 1) throw std::invalid_argument("bits_per_dim: dims must be >= 1");
    return ll_nats / (static_cast<double>(dims) * kLn2);
}

double psnr(double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("psnr: sigma2 must be positive");
    return 10.0 * std::log10(1.0 / sigma2);
}

double sigma2_from_errors(const std::vector<double>& l2_errors, std::size_t dims) {
    if (l2_errors.empty()) throw std::invalid_argument("sigma2_from_errors: no errors");
    if (dims < 1) throw std::invalid_argument("sigma2_from_errors: dims must be >= 1");
    double acc = 0.0;
    for (double e : l2_errors) acc += e * e;
    return acc / (static_cast<double>(l2_errors.size()) * static_cast<double>(dims));
}

}  // namespace ganaudit
