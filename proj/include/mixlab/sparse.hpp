#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mixlab {

// Compressed sparse row matrix with sorted, unique column indices per row.
struct Csr {
    std::size_t nrows = 0;
    std::size_t ncols = 0;
    std::vector<std::size_t> rowptr; // size nrows+1
    std::vector<std::size_t> col;
    std::vector<double> val;
    bool symmetric = false;

    std::size_t nnz() const { return val.size(); }

    void matvec(const double* x, double* y) const;                 // y = A x
    void matvec_add(const double* x, double* y) const;             // y += A x
    void matvec_transpose(const double* x, double* y) const;       // y = A^T x
    std::vector<double> matvec(const std::vector<double>& x) const;
    std::vector<double> matvec_transpose(const std::vector<double>& x) const;

    double coeff(std::size_t i, std::size_t j) const; // 0 when absent
    std::vector<double> diagonal() const;

    double max_abs() const;

    // coordinate text dump: one "row col value" line per entry
    void dump_coordinate(const std::string& path) const;
};

// Accumulates duplicate entries; conversion sums duplicates in insertion
// order so assembly stays deterministic.
class TripletList {
public:
    void reserve(std::size_t n) { entries_.reserve(n); }
    void add(std::size_t r, std::size_t c, double v) { entries_.push_back({r, c, v}); }
    Csr to_csr(std::size_t nrows, std::size_t ncols) const;

private:
    struct Entry {
        std::size_t r, c;
        double v;
    };
    std::vector<Entry> entries_;
};

Csr csr_transpose(const Csr& a);
Csr csr_matmul(const Csr& a, const Csr& b);
Csr csr_scale_cols(const Csr& a, const std::vector<double>& d); // A * diag(d)
Csr csr_add(const Csr& a, const Csr& b, double alpha = 1.0, double beta = 1.0);
Csr csr_identity(std::size_t n);

// true when ||A - A^T||_max <= tol * ||A||_max
bool csr_is_symmetric(const Csr& a, double tol = 1e-12);

// sets the symmetric flag from the check above
void csr_mark_symmetric(Csr& a, double tol = 1e-12);

} // namespace mixlab
