#include "mixlab/kernels.hpp"

namespace mixlab::kern {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double s0 = 0.0, s1 = 0.0;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        s0 += x[i] * y[i];
        s1 += x[i + 1] * y[i + 1];
    }
    if (i < n) s0 += x[i] * y[i];
    return s0 + s1;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double a, const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add_scaled2_scalar(double* z, double a, const double* u, double b, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] += a * u[i] + b * v[i];
}

double dot_axpy_scalar(const double* row, const double* x, double s, double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += row[i] * x[i];
        y[i] += s * row[i];
    }
    return acc;
}

} // namespace

const Ops& scalar_ops() {
    static const Ops table = {
        "scalar",
        dot_scalar,
        axpy_scalar,
        axpby_scalar,
        scal_scalar,
        add_scaled2_scalar,
        dot_axpy_scalar,
    };
    return table;
}

} // namespace mixlab::kern
