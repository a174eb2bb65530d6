#include <cmath>

#include "doctest.h"
#include "ganaudit/density.hpp"
#include "ganaudit/rng.hpp"
#include "oracles.hpp"

using namespace ganaudit;

namespace {
constexpr double kLn2Pi = 1.8378770664093454835606594728112;
}

TEST_CASE("log_obs: frozen values") {
    Tensor x2({2}, {0.3, 0.7});
    CHECK(log_obs(x2, x2, 1.0) == doctest::Approx(-kLn2Pi).epsilon(1e-14));

    Tensor x1({1}, {0.5});
    double inv2pi = 1.0 / (2.0 * 3.14159265358979323846);
    CHECK(log_obs(x1, x1, inv2pi) == doctest::Approx(0.0).epsilon(1e-14));

    Tensor g1({1}, {-0.5});
    CHECK(log_obs(x1, g1, 1.0) == doctest::Approx(-1.4189385332046727).epsilon(1e-14));

    CHECK_THROWS_AS(log_obs(x1, x1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(log_obs(x1, x2, 1.0), std::invalid_argument);
}

TEST_CASE("log_obs is maximized at g = x") {
    Rng rng(2);
    Tensor x = Tensor::zeros({5});
    for (double& v : x.data) v = rng.normal();
    double sigma2 = 0.3;
    double peak = log_obs(x, x, sigma2);
    CHECK(peak == doctest::Approx(-2.5 * (kLn2Pi + std::log(sigma2))));
    for (int trial = 0; trial < 20; ++trial) {
        Tensor g = x;
        for (double& v : g.data) v += 0.1 * rng.normal();
        CHECK(log_obs(x, g, sigma2) < peak);
    }
}

TEST_CASE("log_prior: frozen values and additivity") {
    CHECK(log_prior(Tensor({2}, {0, 0})) == doctest::Approx(-kLn2Pi).epsilon(1e-14));
    CHECK(log_prior(Tensor({2}, {1, 0})) == doctest::Approx(-2.3378770664093453).epsilon(1e-14));
    Tensor a({2}, {0.3, -0.8}), b({3}, {1.1, 0.2, -0.5}), joint({5}, {0.3, -0.8, 1.1, 0.2, -0.5});
    CHECK(log_prior(joint) == doctest::Approx(log_prior(a) + log_prior(b)).epsilon(1e-14));
}

TEST_CASE("log_joint_annealed endpoints and affinity in beta") {
    GeneratorModel m = make_spiral_model();
    Tensor x({2}, {0.4, 0.9});
    Tensor z({1}, {0.6});
    double sigma2 = 0.05;
    CHECK(log_joint_annealed(m, x, z, sigma2, 0.0) == log_prior(z));
    CHECK(log_joint_annealed(m, x, z, sigma2, 1.0) ==
          doctest::Approx(log_prior(z) + log_obs(x, decode(m, z), sigma2)).epsilon(1e-14));
    double q1 = log_joint_annealed(m, x, z, sigma2, 0.25);
    double q2 = log_joint_annealed(m, x, z, sigma2, 0.5);
    double q3 = log_joint_annealed(m, x, z, sigma2, 0.75);
    CHECK(q2 - q1 == doctest::Approx(q3 - q2).epsilon(1e-10));
    CHECK_THROWS_AS(log_joint_annealed(m, x, z, sigma2, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(log_joint_annealed(m, x, z, sigma2, -0.1), std::invalid_argument);
}

TEST_CASE("annealed_eval gradient matches finite differences") {
    GeneratorModel m = make_spiral_model();
    Tensor x({2}, {0.4, 0.9});
    double sigma2 = 0.05, beta = 0.7, h = 1e-6;
    Tensor z({1}, {0.55});
    AnnealedEval ev = annealed_eval(m, x, z, sigma2, beta);
    CHECK(ev.log_density == doctest::Approx(log_joint_annealed(m, x, z, sigma2, beta)));
    Tensor zp({1}, {0.55 + h}), zm({1}, {0.55 - h});
    double fd = (log_joint_annealed(m, x, zp, sigma2, beta) -
                 log_joint_annealed(m, x, zm, sigma2, beta)) /
                (2 * h);
    CHECK(ev.grad.data[0] == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("ppca_loglik: frozen 2x1 example") {
    GeneratorModel m = make_linear_model(Tensor({2, 1}, {1.0, 0.0}), Tensor({2}, {0, 0}));
    double got = ppca_loglik(m, 1.0, Tensor({2}, {0, 0}));
    CHECK(got == doctest::Approx(-2.184450656689318).epsilon(1e-14));
}

TEST_CASE("ppca_loglik: W = 0 reduces to log_obs") {
    GeneratorModel m = make_linear_model(Tensor::zeros({3, 2}), Tensor({3}, {0.1, 0.2, 0.3}));
    Tensor x({3}, {0.5, -0.4, 0.2});
    CHECK(ppca_loglik(m, 0.3, x) ==
          doctest::Approx(log_obs(x, m.mean, 0.3)).epsilon(1e-12));
}

TEST_CASE("ppca_loglik is invariant under latent rotation") {
    Rng rng(13);
    Tensor w = Tensor::zeros({5, 2});
    for (double& v : w.data) v = rng.normal();
    Tensor mu = Tensor::zeros({5});
    double theta = 0.73, c = std::cos(theta), s = std::sin(theta);
    Tensor wr = Tensor::zeros({5, 2});
    for (std::size_t i = 0; i < 5; ++i) {
        wr.data[i * 2 + 0] = w.data[i * 2 + 0] * c + w.data[i * 2 + 1] * s;
        wr.data[i * 2 + 1] = -w.data[i * 2 + 0] * s + w.data[i * 2 + 1] * c;
    }
    GeneratorModel a = make_linear_model(w, mu), b = make_linear_model(wr, mu);
    Tensor x({5}, {0.5, -1.0, 0.2, 0.8, -0.3});
    CHECK(ppca_loglik(a, 0.2, x) == doctest::Approx(ppca_loglik(b, 0.2, x)).epsilon(1e-12));
}

TEST_CASE("ppca_loglik agrees with the full-covariance Cholesky oracle") {
    Rng rng(23);
    std::size_t dim = 6;
    Tensor w = Tensor::zeros({dim, 3});
    for (double& v : w.data) v = rng.normal() * 0.8;
    Tensor mu = Tensor::zeros({dim});
    for (double& v : mu.data) v = rng.normal();
    double sigma2 = 0.15;
    GeneratorModel m = make_linear_model(w, mu);

    std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            for (std::size_t a = 0; a < 3; ++a)
                cov[i][j] += w.data[i * 3 + a] * w.data[j * 3 + a];
            if (i == j) cov[i][j] += sigma2;
        }
    for (int trial = 0; trial < 5; ++trial) {
        Tensor x = Tensor::zeros({dim});
        for (double& v : x.data) v = rng.normal() * 1.5;
        double expect = oracles::gaussian_loglik(cov, std::vector<double>(mu.data.begin(), mu.data.end()),
                                                 std::vector<double>(x.data.begin(), x.data.end()));
        CHECK(ppca_loglik(m, sigma2, x) == doctest::Approx(expect).epsilon(1e-10));
    }
    CHECK_THROWS_AS(ppca_loglik(make_spiral_model(), 0.1, Tensor({2}, {0, 0})),
                    std::invalid_argument);
}

TEST_CASE("ppca mean log-likelihood matches negative analytic entropy") {
    Rng rng(37);
    std::size_t dim = 5;
    Tensor w = Tensor::zeros({dim, 2});
    for (double& v : w.data) v = rng.normal() * 0.6;
    double sigma2 = 0.1;
    GeneratorModel m = make_linear_model(w, Tensor::zeros({dim}));

    std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            for (std::size_t a = 0; a < 2; ++a)
                cov[i][j] += w.data[i * 2 + a] * w.data[j * 2 + a];
            if (i == j) cov[i][j] += sigma2;
        }
    double entropy = oracles::gaussian_entropy(cov);

    int n = 4000;
    auto xs = sample_dataset(m, sigma2, n, 4);
    std::vector<double> lls(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        lls[i] = ppca_loglik(m, sigma2, xs[i]);
        mean += lls[i];
    }
    mean /= n;
    double var = 0.0;
    for (double ll : lls) var += (ll - mean) * (ll - mean);
    var /= n;
    double se = std::sqrt(var / n);
    CHECK(std::fabs(mean - (-entropy)) <= 3.0 * se);
}

TEST_CASE("quadrature_loglik: constant model is exact for any grid") {
    GeneratorModel m = make_constant_model(Tensor({3}, {0.2, 0.4, 0.6}));
    Tensor x({3}, {0.3, 0.3, 0.7});
    double expect = log_obs(x, m.constant_output, 0.1);
    CHECK(quadrature_loglik(m, 0.1, x, {-8, 8}, 101) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(quadrature_loglik(m, 0.1, x, {-6, 7}, 257) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("quadrature_loglik matches ppca_loglik on a 1-d linear model") {
    Rng rng(41);
    Tensor w = Tensor::zeros({4, 1});
    for (double& v : w.data) v = rng.normal();
    Tensor mu({4}, {0.1, -0.2, 0.3, 0.0});
    GeneratorModel m = make_linear_model(w, mu);
    double sigma2 = 0.2;
    for (int trial = 0; trial < 3; ++trial) {
        Tensor x = Tensor::zeros({4});
        for (double& v : x.data) v = rng.normal();
        double oracle = ppca_loglik(m, sigma2, x);
        double quad = quadrature_loglik(m, sigma2, x, {-8, 8}, 4001);
        CHECK(quad == doctest::Approx(oracle).epsilon(1e-7));
        CHECK(std::fabs(quad - oracle) <= 1e-4);
        // grid refinement has converged
        double quad2 = quadrature_loglik(m, sigma2, x, {-8, 8}, 8001);
        CHECK(std::fabs(quad2 - quad) <= 1e-5);
    }
}

TEST_CASE("quadrature_loglik on a 2-d latent matches the closed form") {
    Rng rng(43);
    Tensor w = Tensor::zeros({3, 2});
    for (double& v : w.data) v = rng.normal() * 0.7;
    GeneratorModel m = make_linear_model(w, Tensor::zeros({3}));
    Tensor x({3}, {0.4, -0.2, 0.6});
    double oracle = ppca_loglik(m, 0.25, x);
    CHECK(quadrature_loglik(m, 0.25, x, {-8, 8}, 321) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("quadrature_loglik preconditions") {
    GeneratorModel m = make_spiral_model();
    Tensor x({2}, {0.1, 0.1});
    CHECK_THROWS_AS(quadrature_loglik(m, 0.1, x, {-2, 2}, 100), std::invalid_argument);
    GeneratorModel big = make_linear_model(Tensor::zeros({4, 3}), Tensor::zeros({4}));
    CHECK_THROWS_AS(quadrature_loglik(big, 0.1, Tensor::zeros({4}), {-8, 8}, 100),
                    std::invalid_argument);
}

TEST_CASE("bits_per_dim: frozen values, sign and monotonicity") {
    CHECK(bits_per_dim(0.0, 10) == 0.0);
    CHECK(bits_per_dim(-kLn2Pi, 2) == doctest::Approx(-1.3257480647361593).epsilon(1e-14));
    CHECK(bits_per_dim(3.1, 4) > 0.0);
    CHECK(bits_per_dim(-1.0, 4) < bits_per_dim(-0.5, 4));
    CHECK_THROWS_AS(bits_per_dim(1.0, 0), std::invalid_argument);
}

TEST_CASE("psnr: reference variance table") {
    // four of the five published sigma2/PSNR pairs match the formula
    CHECK(std::fabs(psnr(0.018) - 17.4) <= 0.1);
    CHECK(std::fabs(psnr(0.012) - 19.2) <= 0.1);
    CHECK(std::fabs(psnr(0.021) - 16.8) <= 0.1);
    CHECK(std::fabs(psnr(0.019) - 17.2) <= 0.1);
    // the 0.008 row is published as 21.2; the formula gives 20.97
    CHECK(psnr(0.008) == doctest::Approx(20.969100130080564).epsilon(1e-12));
    CHECK(std::fabs(psnr(0.008) - 21.2) > 0.1);

    CHECK(psnr(1.0) == doctest::Approx(0.0));
    CHECK(psnr(0.01) > psnr(0.02));  // monotone
    CHECK_THROWS_AS(psnr(0.0), std::invalid_argument);
}

TEST_CASE("sigma2_from_errors is the per-pixel mean squared error") {
    std::vector<double> errors{1.0, 2.0, 3.0};
    CHECK(sigma2_from_errors(errors, 4) == doctest::Approx((1.0 + 4.0 + 9.0) / (3.0 * 4.0)));
    CHECK_THROWS_AS(sigma2_from_errors({}, 4), std::invalid_argument);
}
