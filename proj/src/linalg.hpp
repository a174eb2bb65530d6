#pragma once

// Small dense symmetric routines used by the PPCA fit and the closed-form
// marginal likelihood. Cyclic Jacobi is plenty at desk scale (D <= 4096).

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ganaudit::linalg {

// Symmetric eigendecomposition, eigenvalues sorted descending.
// a is n x n row-major and is destroyed. vecs ends up with eigenvector j in
// column j (vecs[i * n + j]).
inline void sym_eig(std::size_t n, std::vector<double> a,
                    std::vector<double>& vals, std::vector<double>& vecs) {
    vals.assign(n, 0.0);
    vecs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
        return std::sqrt(2.0 * s);
    };
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a[i * n + j]));
    if (scale == 0.0) scale = 1.0;

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > 1e-14 * scale * n; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::fabs(apq) <= 1e-300) continue;
                double app = a[p * n + p], aqq = a[q * n + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = vecs[k * n + p], vkq = vecs[k * n + q];
                    vecs[k * n + p] = c * vkp - s * vkq;
                    vecs[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) vals[i] = a[i * n + i];

    // sort descending, carrying columns along
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (vals[order[j]] > vals[order[i]]) std::swap(order[i], order[j]);
    std::vector<double> sorted_vals(n), sorted_vecs(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted_vals[j] = vals[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted_vecs[i * n + j] = vecs[i * n + order[j]];
    }
    vals = std::move(sorted_vals);
    vecs = std::move(sorted_vecs);
}

// Cholesky A = L L^T for a symmetric positive definite n x n matrix.
// Returns the lower factor, throws if A is not positive definite.
inline std::vector<double> cholesky(std::size_t n, const std::vector<double>& a) {
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
                l[i * n + i] = std::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    return l;
}

// Solve L L^T x = b in place given the lower Cholesky factor.
inline std::vector<double> cholesky_solve(std::size_t n, const std::vector<double>& l,
                                          std::vector<double> b) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
        b[i] = s / l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * b[k];
        b[ii] = s / l[ii * n + ii];
    }
    return b;
}

}  // namespace ganaudit::linalg
