#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ganaudit {

// Dense row-major tensor of 64-bit floats. The single value type for
// samples, latent codes and model weights.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (numel(shape) != data.size())
            throw std::invalid_argument("Tensor: shape/data size mismatch");
    }

    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        std::size_t n = numel(s);
        return Tensor(std::move(s), std::vector<double>(n, 0.0));
    }

    static Tensor vector(std::vector<double> d) {
        std::vector<std::size_t> s{d.size()};
        return Tensor(std::move(s), std::move(d));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    Tensor reshaped(std::vector<std::size_t> s) const {
        if (numel(s) != data.size())
            throw std::invalid_argument("Tensor::reshaped: element count mismatch");
        return Tensor(std::move(s), data);
    }
};

inline bool is_finite(const Tensor& t) {
    for (double v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline void check_finite(const Tensor& t, const char* context) {
    if (!is_finite(t))
        throw std::runtime_error(std::string(context) + ": non-finite value");
}

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* context) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(context) + ": shape mismatch");
}

// y = W x, W is [m, n] row-major, x has n elements. Accumulation order is
// fixed so every caller produces bit-identical results.
inline Tensor matvec(const Tensor& w, const Tensor& x) {
    if (w.shape.size() != 2)
        throw std::invalid_argument("matvec: weight must be 2-d");
    std::size_t m = w.shape[0], n = w.shape[1];
    if (x.size() != n)
        throw std::invalid_argument("matvec: inner dimension mismatch");
    Tensor y = Tensor::zeros({m});
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        const double* row = w.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x.data[j];
        y.data[i] = acc;
    }
    return y;
}

// y = W^T u for W [m, n], u has m elements.
inline Tensor matvec_transposed(const Tensor& w, const Tensor& u) {
    if (w.shape.size() != 2)
        throw std::invalid_argument("matvec_transposed: weight must be 2-d");
    std::size_t m = w.shape[0], n = w.shape[1];
    if (u.size() != m)
        throw std::invalid_argument("matvec_transposed: inner dimension mismatch");
    Tensor y = Tensor::zeros({n});
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = w.data.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) y.data[j] += row[j] * u.data[i];
    }
    return y;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor y = a;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += b.data[i];
    return y;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor y = a;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= b.data[i];
    return y;
}

inline Tensor scale(const Tensor& a, double s) {
    Tensor y = a;
    for (double& v : y.data) v *= s;
    return y;
}

inline void axpy(double a, const Tensor& x, Tensor& y) {
    check_same_shape(x, y, "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += a * x.data[i];
}

inline double dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data[i] * b.data[i];
    return acc;
}

inline double squared_norm(const Tensor& a) { return dot(a, a); }

inline double squared_distance(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "squared_distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return acc;
}

inline double l2_distance(const Tensor& a, const Tensor& b) {
    return std::sqrt(squared_distance(a, b));
}

}  // namespace ganaudit
