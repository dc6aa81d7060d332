#pragma once

#include <cstddef>
#include <vector>

namespace mixlab {

// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* row(std::size_t i) { return a_.data() + i * cols_; }
    const double* row(std::size_t i) const { return a_.data() + i * cols_; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    static DenseMatrix identity(std::size_t n);

    std::vector<double> matvec(const std::vector<double>& x) const;
    DenseMatrix transposed() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// Symmetric matrix in packed upper-triangular row-major storage:
// row i holds entries (i,i)..(i,n-1) contiguously. Contiguous rows keep the
// tridiagonalization sweeps on unit stride.
class PackedSym {
public:
    PackedSym() = default;
    explicit PackedSym(std::size_t n) : n_(n), a_(n * (n + 1) / 2, 0.0) {}

    std::size_t size() const { return n_; }

    // j >= i required
    double& at(std::size_t i, std::size_t j) { return a_[off(i) + (j - i)]; }
    double at(std::size_t i, std::size_t j) const { return a_[off(i) + (j - i)]; }

    double& sym(std::size_t i, std::size_t j) { return i <= j ? at(i, j) : at(j, i); }
    double sym(std::size_t i, std::size_t j) const { return i <= j ? at(i, j) : at(j, i); }

    double* row(std::size_t i) { return a_.data() + off(i); } // points at (i,i)
    const double* row(std::size_t i) const { return a_.data() + off(i); }

    std::size_t off(std::size_t i) const { return i * n_ - i * (i - 1) / 2; }

    static PackedSym from_dense(const DenseMatrix& m);
    DenseMatrix to_dense() const;

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

// -------- dense Cholesky (SPD) --------

class DenseCholesky {
public:
    // Throws std::runtime_error naming the pivot row when not SPD.
    explicit DenseCholesky(const DenseMatrix& spd);

    std::vector<double> solve(const std::vector<double>& rhs) const;
    void solve_inplace(std::vector<double>& rhs) const;

    // L^T x = b (used by generalized-eigen back-substitution)
    void solve_transposed_inplace(std::vector<double>& rhs) const;

    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    DenseMatrix l_;
};

// -------- dense LU with partial pivoting (small indefinite systems) --------

class DenseLu {
public:
    explicit DenseLu(DenseMatrix a); // throws on singular pivot
    std::vector<double> solve(const std::vector<double>& rhs) const;

private:
    std::size_t n_ = 0;
    DenseMatrix lu_;
    std::vector<int> piv_;
};

// -------- symmetric eigensolver --------

struct SymEigResult {
    std::vector<double> values;  // ascending
    DenseMatrix vectors;         // columns match values; empty when not requested
};

enum class EigRange { All, Smallest, Largest };

// Householder tridiagonalization; A is overwritten with the reflectors.
// d (size n) gets the diagonal, e (size n-1) the off-diagonal, tau (size n)
// the reflector scalings.
void sym_tridiagonalize(PackedSym& a, std::vector<double>& d, std::vector<double>& e,
                        std::vector<double>& tau);

// Apply the accumulated reflector product Q to a vector in T-space.
void tridiag_apply_q(const PackedSym& a, const std::vector<double>& tau, std::vector<double>& x);

// Implicit QL with shifts on a tridiagonal; z (optional, n x n) accumulates
// rotations (pass identity to obtain eigenvectors of T).
void tridiag_ql(std::vector<double>& d, std::vector<double>& e, DenseMatrix* z);

// k-th smallest eigenvalue (0-based) of the tridiagonal via Sturm bisection.
double tridiag_eigenvalue_k(const std::vector<double>& d, const std::vector<double>& e, std::size_t k);

// Eigenvectors of the tridiagonal by inverse iteration with cluster
// reorthogonalization; values must be ascending.
DenseMatrix tridiag_eigenvectors(const std::vector<double>& d, const std::vector<double>& e,
                                 const std::vector<double>& values);

// Full-matrix drivers. `a` is consumed.
SymEigResult sym_eig(PackedSym a, EigRange range, std::size_t k, bool want_vectors);

} // namespace mixlab
