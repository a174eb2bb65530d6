#pragma once

#include <utility>
#include <vector>

#include "ganaudit/models.hpp"
#include "ganaudit/tensor.hpp"

namespace ganaudit {

// log p_sigma(x | g) under isotropic Gaussian observation noise:
// -D/2 ln(2 pi sigma2) - |x - g|^2 / (2 sigma2)
double log_obs(const Tensor& x, const Tensor& g, double sigma2);

// log density of the standard-normal latent prior
double log_prior(const Tensor& z);

// log p(z) + beta * log p_sigma(x | G(z)); the AIS bridge between prior
// (beta = 0) and full joint (beta = 1).
double log_joint_annealed(const GeneratorModel& model, const Tensor& x,
                          const Tensor& z, double sigma2, double beta);

// Value and gradient in z of the annealed log joint, one decoder pass.
// Never throws on non-finite values; callers treat them as divergences.
struct AnnealedEval {
    double log_density;
    Tensor grad;
};
AnnealedEval annealed_eval(const GeneratorModel& model, const Tensor& x,
                           const Tensor& z, double sigma2, double beta);

// Exact marginal log N(x; mean, W W^T + sigma2 I) for linear decoders.
double ppca_loglik(const GeneratorModel& model, double sigma2, const Tensor& x);

// Brute-force oracle for latent_dim <= 2: log-sum-exp over a trapezoid grid
// of the full log joint plus log cell weight.
double quadrature_loglik(const GeneratorModel& model, double sigma2, const Tensor& x,
                         std::pair<double, double> z_range, int steps);

double bits_per_dim(double ll_nats, std::size_t dims);

// 10 log10(1 / sigma2) for unit peak intensity
double psnr(double sigma2);

// Maximum-likelihood observation variance from projection residuals:
// mean squared reconstruction error per pixel.
double sigma2_from_errors(const std::vector<double>& l2_errors, std::size_t dims);

}  // namespace ganaudit
