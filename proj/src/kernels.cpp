#include "morphtag/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>

namespace morphtag::kernels {

namespace serial {

void matvec(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y) {
    const size_t m = y.size(), n = x.size();
    assert(w.size() == m * n && b.size() == m);
    for (size_t i = 0; i < m; ++i) {
        double acc = b[i];
        const double* row = w.data() + i * n;
        for (size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void matvec_grad_input(std::span<const double> w, std::span<const double> dy,
                       std::span<double> x_grad) {
    const size_t m = dy.size(), n = x_grad.size();
    assert(w.size() == m * n);
    for (size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (size_t i = 0; i < m; ++i) acc += w[i * n + j] * dy[i];
        x_grad[j] += acc;
    }
}

void matvec_grad_params(std::span<const double> dy, std::span<const double> x,
                        std::span<double> w_grad, std::span<double> b_grad) {
    const size_t m = dy.size(), n = x.size();
    assert(w_grad.size() == m * n && b_grad.size() == m);
    for (size_t i = 0; i < m; ++i) {
        double* row = w_grad.data() + i * n;
        const double d = dy[i];
        for (size_t j = 0; j < n; ++j) row[j] += d * x[j];
        b_grad[i] += d;
    }
}

void softmax(std::span<double> v) {
    if (v.empty()) return;
    double mx = v[0];
    for (double a : v) mx = std::max(mx, a);
    double sum = 0.0;
    for (double& a : v) {
        a = std::exp(a - mx);
        sum += a;
    }
    for (double& a : v) a /= sum;
}

void tanh_forward(std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
}

void tanh_backward(std::span<const double> y, std::span<const double> dy,
                   std::span<double> dx) {
    for (size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

void sigmoid_forward(std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void adam_step(std::span<double> w, std::span<const double> g,
               std::span<double> m, std::span<double> v, double lr,
               double beta1, double beta2, double eps, double bias1,
               double bias2) {
    for (size_t i = 0; i < w.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace serial

namespace par {

// The OpenMP loops mirror the serial ones exactly; each output element is
// owned by one iteration, so the floating-point order per element is fixed.

void matvec(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y) {
    const int64_t m = static_cast<int64_t>(y.size());
    const size_t n = x.size();
    assert(w.size() == y.size() * n && b.size() == y.size());
#pragma omp parallel for schedule(static) if (m > 64)
    for (int64_t i = 0; i < m; ++i) {
        double acc = b[i];
        const double* row = w.data() + i * n;
        for (size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

void matvec_grad_input(std::span<const double> w, std::span<const double> dy,
                       std::span<double> x_grad) {
    const size_t m = dy.size();
    const int64_t n = static_cast<int64_t>(x_grad.size());
    assert(w.size() == m * x_grad.size());
#pragma omp parallel for schedule(static) if (n > 64)
    for (int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (size_t i = 0; i < m; ++i) acc += w[i * n + j] * dy[i];
        x_grad[j] += acc;
    }
}

void matvec_grad_params(std::span<const double> dy, std::span<const double> x,
                        std::span<double> w_grad, std::span<double> b_grad) {
    const int64_t m = static_cast<int64_t>(dy.size());
    const size_t n = x.size();
    assert(w_grad.size() == dy.size() * n && b_grad.size() == dy.size());
#pragma omp parallel for schedule(static) if (m > 64)
    for (int64_t i = 0; i < m; ++i) {
        double* row = w_grad.data() + i * n;
        const double d = dy[i];
        for (size_t j = 0; j < n; ++j) row[j] += d * x[j];
        b_grad[i] += d;
    }
}

void softmax(std::span<double> v) {
    // max and sum reductions stay serial to keep the accumulation order
    // fixed; only the elementwise exp/divide is parallel.
    if (v.empty()) return;
    double mx = v[0];
    for (double a : v) mx = std::max(mx, a);
    const int64_t n = static_cast<int64_t>(v.size());
#pragma omp parallel for schedule(static) if (n > 256)
    for (int64_t i = 0; i < n; ++i) v[i] = std::exp(v[i] - mx);
    double sum = 0.0;
    for (double a : v) sum += a;
#pragma omp parallel for schedule(static) if (n > 256)
    for (int64_t i = 0; i < n; ++i) v[i] /= sum;
}

void tanh_forward(std::span<const double> x, std::span<double> y) {
    const int64_t n = static_cast<int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 256)
    for (int64_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void tanh_backward(std::span<const double> y, std::span<const double> dy,
                   std::span<double> dx) {
    const int64_t n = static_cast<int64_t>(y.size());
#pragma omp parallel for schedule(static) if (n > 256)
    for (int64_t i = 0; i < n; ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

void sigmoid_forward(std::span<const double> x, std::span<double> y) {
    const int64_t n = static_cast<int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 256)
    for (int64_t i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    const int64_t n = static_cast<int64_t>(x.size());
#pragma omp parallel for schedule(static) if (n > 1024)
    for (int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void adam_step(std::span<double> w, std::span<const double> g,
               std::span<double> m, std::span<double> v, double lr,
               double beta1, double beta2, double eps, double bias1,
               double bias2) {
    const int64_t n = static_cast<int64_t>(w.size());
#pragma omp parallel for schedule(static) if (n > 1024)
    for (int64_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace par

}  // namespace morphtag::kernels
