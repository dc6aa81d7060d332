#pragma once

#include "mixlab/assembly.hpp"
#include "mixlab/solvers.hpp"

#include <vector>

namespace mixlab {

// Matrices of the dual mixed discretization on one mesh:
//   (sigma, tau) + (tau, grad u) = 0        A y + B^T x = 0
//   (sigma, grad v) = -<f, v>               B y = -f
// with V = RT0C or DRT0 and Q = P1 with homogeneous Dirichlet BC.
struct MixedOperator {
    FeSpace v_space;
    FeSpace q_space;
    Csr a; // V mass
    Csr b; // (psi_v, grad phi_q), dim(Q) x dim(V)
    Csr m; // H1_0 stiffness on Q

    MixedOperator(const Mesh& mesh, FeKind v_kind);
};

// Solution of the dual mixed system for a load f on Q.
struct MixedSolution {
    std::vector<double> sigma; // V coefficients
    std::vector<double> u;     // Q coefficients
    double res_y = 0.0, res_x = 0.0;
};
MixedSolution solve_dual_mixed(const MixedOperator& op, const std::vector<double>& f_load,
                               const SaddleOptions& opts = {});

// Eigenpairs of  B A^-1 B^T x = mu M x  ordered by descending mu.
// u columns are H1_0-orthonormal; sigma columns satisfy A y + B^T x = 0.
struct InfSupSpectrum {
    std::vector<double> mu;  // descending; k smallest requested -> the tail of the spectrum
    DenseMatrix u;           // dim(Q) x m
    DenseMatrix sigma;       // dim(V) x m (empty if not requested)
    std::vector<double> residuals;
    double beta_h = 0.0;     // sqrt(mu_min)
    std::size_t dim_q = 0;
    bool full = false;       // whole spectrum present
};

// k = 0 requests the full spectrum.
InfSupSpectrum infsup_spectrum(const MixedOperator& op, std::size_t k, bool want_sigma = true,
                               const GenEigOptions& opts = {});
InfSupSpectrum infsup_spectrum(const Mesh& mesh, FeKind v_kind, std::size_t k, bool want_sigma = true);

// Least-squares slope of log(y) against log(h); needs at least 3 samples.
double fit_log_slope(const std::vector<double>& h, const std::vector<double>& y);

// ---- spectral space splitting ----

struct Splitting {
    double mu_threshold = 0.5;
    std::size_t n_stable = 0; // modes with mu_i >= threshold (descending prefix)
};

Splitting split(const InfSupSpectrum& spectrum, double mu_threshold);

struct SplitSolution {
    std::vector<double> sigma1, u1; // stable part, V and Q coefficients
    std::vector<double> sigma2, u2; // complementary part
    DenseMatrix a11, b11, a22, b22; // assembled spectral-basis blocks
};

// Assembles and solves the two decoupled saddle systems in the spectral basis.
SplitSolution solve_split(const MixedOperator& op, const InfSupSpectrum& spectrum, const Splitting& sp,
                          const std::vector<double>& f_load);

// ---- representation of the solution in the eigenbasis ----

struct Representation {
    std::vector<double> alpha; // <f, u_i>
    std::vector<double> u_mixed;    // Q coefficients of sum(alpha_i/mu_i u_i)
    std::vector<double> u_galerkin; // Q coefficients of sum(alpha_i u_i)
};
Representation representation(const InfSupSpectrum& spectrum, const std::vector<double>& f_load);

// ---- P1-P0 pairing ----

struct P1P0Result {
    double nu_min = 0.0; // smallest eigenvalue (zeta^2)
    double zeta = 0.0;
    std::vector<double> w; // worst function, Q coefficients, sign-normalized
};
P1P0Result p1p0_infsup(const Mesh& mesh);

// ---- discrete Dirichlet Laplace eigenpairs ----

struct LaplaceEigs {
    std::vector<double> lambda; // ascending
    DenseMatrix w;              // columns, L2-orthonormal
};
LaplaceEigs laplace_eigenpairs(const Mesh& mesh, std::size_t count);

// ---- uniform-stability witness for fixed low modes ----

struct StableWitnessRow {
    double h = 0.0;
    double lambda = 0.0; // largest eigenvalue entering the combination
    double ratio = 0.0;  // (varsigma, grad w) / (||varsigma|| ||grad w||)
    double bound = 0.0;  // (1 - C_pi^2 h^2 lambda) / (C_sigma sqrt(lambda)), fitted constants
};

// modes are 1-based Laplace mode indices; w = sum of those eigenfunctions.
std::vector<StableWitnessRow> stable_subspace_check(const std::vector<const Mesh*>& levels,
                                                    const std::vector<std::size_t>& modes);

} // namespace mixlab
