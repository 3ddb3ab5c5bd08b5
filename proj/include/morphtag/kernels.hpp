#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Dense numeric kernels used by the network. Every kernel exists twice:
// a serial reference under kernels::serial and an OpenMP version under
// kernels::par. The parallel versions split work by output element and keep
// each element's accumulation order serial, so both variants produce
// bit-identical results for any thread count. Production code calls the
// dispatching wrappers at kernels:: scope; tests compare the two variants
// directly and tools/kernel_bench.cpp times them against each other.

namespace morphtag::kernels {

namespace serial {

// y[m] = W[m x n] * x[n] + b[m]
void matvec(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y);

// x_grad[n] += W[m x n]^T * dy[m]
void matvec_grad_input(std::span<const double> w, std::span<const double> dy,
                       std::span<double> x_grad);

// W_grad[m x n] += dy[m] (outer) x[n];  b_grad[m] += dy[m]
void matvec_grad_params(std::span<const double> dy, std::span<const double> x,
                        std::span<double> w_grad, std::span<double> b_grad);

// In-place numerically stable softmax.
void softmax(std::span<double> v);

void tanh_forward(std::span<const double> x, std::span<double> y);

// dx[i] = dy[i] * (1 - y[i]^2), with y the tanh output.
void tanh_backward(std::span<const double> y, std::span<const double> dy,
                   std::span<double> dx);

void sigmoid_forward(std::span<const double> x, std::span<double> y);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// One Adam step over a parameter array with first/second moment state.
void adam_step(std::span<double> w, std::span<const double> g,
               std::span<double> m, std::span<double> v, double lr,
               double beta1, double beta2, double eps, double bias1,
               double bias2);

}  // namespace serial

namespace par {

void matvec(std::span<const double> w, std::span<const double> x,
            std::span<const double> b, std::span<double> y);
void matvec_grad_input(std::span<const double> w, std::span<const double> dy,
                       std::span<double> x_grad);
void matvec_grad_params(std::span<const double> dy, std::span<const double> x,
                        std::span<double> w_grad, std::span<double> b_grad);
void softmax(std::span<double> v);
void tanh_forward(std::span<const double> x, std::span<double> y);
void tanh_backward(std::span<const double> y, std::span<const double> dy,
                   std::span<double> dx);
void sigmoid_forward(std::span<const double> x, std::span<double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void adam_step(std::span<double> w, std::span<const double> g,
               std::span<double> m, std::span<double> v, double lr,
               double beta1, double beta2, double eps, double bias1,
               double bias2);

}  // namespace par

inline void matvec(std::span<const double> w, std::span<const double> x,
                   std::span<const double> b, std::span<double> y) {
    par::matvec(w, x, b, y);
}
inline void matvec_grad_input(std::span<const double> w,
                              std::span<const double> dy,
                              std::span<double> x_grad) {
    par::matvec_grad_input(w, dy, x_grad);
}
inline void matvec_grad_params(std::span<const double> dy,
                               std::span<const double> x,
                               std::span<double> w_grad,
                               std::span<double> b_grad) {
    par::matvec_grad_params(dy, x, w_grad, b_grad);
}
inline void softmax(std::span<double> v) { par::softmax(v); }
inline void tanh_forward(std::span<const double> x, std::span<double> y) {
    par::tanh_forward(x, y);
}
inline void tanh_backward(std::span<const double> y, std::span<const double> dy,
                          std::span<double> dx) {
    par::tanh_backward(y, dy, dx);
}
inline void sigmoid_forward(std::span<const double> x, std::span<double> y) {
    par::sigmoid_forward(x, y);
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    par::axpy(a, x, y);
}
inline void adam_step(std::span<double> w, std::span<const double> g,
                      std::span<double> m, std::span<double> v, double lr,
                      double beta1, double beta2, double eps, double bias1,
                      double bias2) {
    par::adam_step(w, g, m, v, lr, beta1, beta2, eps, bias1, bias2);
}

}  // namespace morphtag::kernels
