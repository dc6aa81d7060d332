#pragma once

#include <cstddef>

// Runtime-dispatched arithmetic kernels.
//
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. The active table is chosen once at startup
// from the CPU features and can be overridden with the environment variable
// MIXLAB_KERNELS=scalar|avx2|auto (useful for the equivalence tests).
//
// All pointers may alias only where noted; lengths are in elements.

namespace mixlab::kern {

struct Ops {
    const char* name;

    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);

    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    // y[i] = a*x[i] + b*y[i]
    void (*axpby)(double a, const double* x, double b, double* y, std::size_t n);

    // x[i] *= a
    void (*scal)(double a, double* x, std::size_t n);

    // z[i] += a*u[i] + b*v[i]   (rank-2 row update)
    void (*add_scaled2)(double* z, double a, const double* u, double b, const double* v, std::size_t n);

    // Fused symmetric-row operation: returns dot(row, x) and does y[i] += s*row[i].
    // row, x, y must not alias each other.
    double (*dot_axpy)(const double* row, const double* x, double s, double* y, std::size_t n);
};

// Active kernel table (thread-safe one-time init).
const Ops& ops();

// Always-available reference table.
const Ops& scalar_ops();

// AVX2 table, or nullptr when the binary/CPU does not support it.
const Ops* avx2_ops();

// Force a table by name ("scalar", "avx2", "auto"); returns false if unavailable.
bool select(const char* name);

inline double dot(const double* x, const double* y, std::size_t n) { return ops().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { ops().axpy(a, x, y, n); }
inline void axpby(double a, const double* x, double b, double* y, std::size_t n) { ops().axpby(a, x, b, y, n); }
inline void scal(double a, double* x, std::size_t n) { ops().scal(a, x, n); }
inline void add_scaled2(double* z, double a, const double* u, double b, const double* v, std::size_t n) {
    ops().add_scaled2(z, a, u, b, v, n);
}
inline double dot_axpy(const double* row, const double* x, double s, double* y, std::size_t n) {
    return ops().dot_axpy(row, x, s, y, n);
}

} // namespace mixlab::kern
