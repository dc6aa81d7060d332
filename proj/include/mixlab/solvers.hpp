#pragma once

#include "mixlab/dense.hpp"
#include "mixlab/sparse.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mixlab {

// Sparse SPD factorization: reverse Cuthill–McKee reordering followed by an
// envelope (profile) Cholesky. Profile factorizations have no fill outside
// the envelope, so the numeric phase is a sequence of contiguous-segment
// dot products.
class SparseCholesky {
public:
    explicit SparseCholesky(const Csr& spd); // throws naming the offending pivot row

    std::size_t size() const { return n_; }
    std::size_t profile() const { return off_.empty() ? 0 : off_.back(); }

    std::vector<double> solve(const std::vector<double>& rhs) const;
    void solve_inplace(std::vector<double>& b) const;

    // Pieces of the factorization in permuted space, for the generalized
    // eigensolver reduction: M = P^T L L^T P.
    void permute(const std::vector<double>& x, std::vector<double>& xp) const;   // xp = P x
    void unpermute(const std::vector<double>& xp, std::vector<double>& x) const; // x = P^T xp
    void solve_lower_inplace(double* b) const;            // L y = b (permuted space)
    void solve_lower_transposed_inplace(double* b) const; // L^T x = y (permuted space)
    const std::vector<std::size_t>& perm() const { return perm_; }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> perm_, iperm_; // perm_[new] = old
    std::vector<std::size_t> start_;        // first column of each envelope row
    std::vector<std::size_t> off_;          // prefix offsets of envelope rows
    std::vector<double> env_;               // off-diagonal envelope entries
    std::vector<double> diag_;              // Cholesky diagonal
};

std::vector<std::size_t> rcm_ordering(const Csr& pattern);

// ---------------------------------------------------------------- CG

struct IterStats {
    std::size_t iters = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

using LinOp = std::function<void(const double* x, double* y)>;

IterStats pcg(const LinOp& apply_a, const LinOp& apply_minv, const std::vector<double>& b,
              std::vector<double>& x, double rtol, std::size_t maxit);

// ---------------------------------------------------------------- saddle

// [ A  B^T ] [y]   [f]
// [ B   0  ] [x] = [g]
struct SaddleSystem {
    const Csr* A = nullptr; // SPD, n_v x n_v
    const Csr* B = nullptr; // n_q x n_v
    std::vector<double> f;  // n_v
    std::vector<double> g;  // n_q
};

struct SaddleOptions {
    std::size_t dense_max = 5000;     // Schur complement formed densely up to this size
    double rtol = 1e-12;              // iterative path tolerance
    std::size_t max_iters = 60000;
    const Csr* precond = nullptr;     // SPD approximation of S; default B diag(A)^-1 B^T
};

struct SaddleResult {
    std::vector<double> y; // n_v
    std::vector<double> x; // n_q
    double res_y = 0.0;    // relative block residuals
    double res_x = 0.0;
    std::string path;      // "schur-dense" or "schur-pcg"
    std::size_t iters = 0;
};

SaddleResult solve_saddle(const SaddleSystem& sys, const SaddleOptions& opts = {});

// Dense Schur complement S = B A^-1 B^T (A prefactored).
DenseMatrix form_schur_dense(const SparseCholesky& achol, const Csr& b);

// ---------------------------------------------------------------- eigen

struct GenEigOptions {
    std::size_t dense_max = 5000;
    bool want_vectors = true;
    double residual_tol = 1e-9; // per-pair residual bound, relative to ||S||
    std::size_t max_lanczos = 500;
};

struct GenEigResult {
    std::vector<double> values; // ascending
    DenseMatrix vectors;        // columns, M-orthonormal (empty if not requested)
    std::vector<double> residuals;
    std::string path; // "dense" or "lanczos"
};

// S x = mu M x with S given densely.
GenEigResult gen_eig_dense(DenseMatrix s, const Csr& m, EigRange range, std::size_t k,
                           const GenEigOptions& opts = {});

// S x = mu M x with S sparse (densified on the dense path).
GenEigResult gen_eig_sparse(const Csr& s, const Csr& m, EigRange range, std::size_t k,
                            const GenEigOptions& opts = {});

// S = B A^-1 B^T. Dense formation up to opts.dense_max, shift-invert Lanczos
// beyond it.
GenEigResult gen_eig_schur(const Csr& a, const Csr& b, const Csr& m, EigRange range, std::size_t k,
                           const GenEigOptions& opts = {});

} // namespace mixlab
