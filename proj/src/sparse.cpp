#include "mixlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace mixlab {

void Csr::matvec(const double* x, double* y) const {
    for (std::size_t i = 0; i < nrows; ++i) {
        double s = 0.0;
        for (std::size_t k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

void Csr::matvec_add(const double* x, double* y) const {
    for (std::size_t i = 0; i < nrows; ++i) {
        double s = 0.0;
        for (std::size_t k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] += s;
    }
}

void Csr::matvec_transpose(const double* x, double* y) const {
    std::fill(y, y + ncols, 0.0);
    for (std::size_t i = 0; i < nrows; ++i)
        for (std::size_t k = rowptr[i]; k < rowptr[i + 1]; ++k) y[col[k]] += val[k] * x[i];
}

std::vector<double> Csr::matvec(const std::vector<double>& x) const {
    if (x.size() != ncols) throw std::invalid_argument("Csr::matvec: size mismatch");
    std::vector<double> y(nrows);
    matvec(x.data(), y.data());
    return y;
}

std::vector<double> Csr::matvec_transpose(const std::vector<double>& x) const {
    if (x.size() != nrows) throw std::invalid_argument("Csr::matvec_transpose: size mismatch");
    std::vector<double> y(ncols);
    matvec_transpose(x.data(), y.data());
    return y;
}

double Csr::coeff(std::size_t i, std::size_t j) const {
    for (std::size_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
        if (col[k] == j) return val[k];
    return 0.0;
}

std::vector<double> Csr::diagonal() const {
    std::vector<double> d(std::min(nrows, ncols), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = coeff(i, i);
    return d;
}

double Csr::max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
}

void Csr::dump_coordinate(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("dump_coordinate: cannot open " + path);
    for (std::size_t i = 0; i < nrows; ++i)
        for (std::size_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
            std::fprintf(f, "%zu %zu %.17g\n", i, col[k], val[k]);
    std::fclose(f);
}

Csr TripletList::to_csr(std::size_t nrows, std::size_t ncols) const {
    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (entries_[a].r != entries_[b].r) return entries_[a].r < entries_[b].r;
        return entries_[a].c < entries_[b].c;
    });

    Csr m;
    m.nrows = nrows;
    m.ncols = ncols;
    m.col.reserve(entries_.size());
    m.val.reserve(entries_.size());

    std::vector<std::size_t> row_of; // row index per compressed entry
    row_of.reserve(entries_.size());

    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const Entry& en = entries_[order[oi]];
        if (en.r >= nrows || en.c >= ncols) throw std::out_of_range("TripletList: index out of range");
        if (!row_of.empty() && row_of.back() == en.r && m.col.back() == en.c) {
            m.val.back() += en.v;
        } else {
            row_of.push_back(en.r);
            m.col.push_back(en.c);
            m.val.push_back(en.v);
        }
    }

    m.rowptr.assign(nrows + 1, 0);
    for (std::size_t r : row_of) ++m.rowptr[r + 1];
    for (std::size_t i = 0; i < nrows; ++i) m.rowptr[i + 1] += m.rowptr[i];
    return m;
}

Csr csr_transpose(const Csr& a) {
    Csr t;
    t.nrows = a.ncols;
    t.ncols = a.nrows;
    t.rowptr.assign(t.nrows + 1, 0);
    t.col.resize(a.nnz());
    t.val.resize(a.nnz());
    for (std::size_t k = 0; k < a.nnz(); ++k) ++t.rowptr[a.col[k] + 1];
    for (std::size_t i = 0; i < t.nrows; ++i) t.rowptr[i + 1] += t.rowptr[i];
    std::vector<std::size_t> next(t.rowptr.begin(), t.rowptr.end() - 1);
    for (std::size_t i = 0; i < a.nrows; ++i)
        for (std::size_t k = a.rowptr[i]; k < a.rowptr[i + 1]; ++k) {
            const std::size_t pos = next[a.col[k]]++;
            t.col[pos] = i;
            t.val[pos] = a.val[k];
        }
    return t;
}

Csr csr_matmul(const Csr& a, const Csr& b) {
    if (a.ncols != b.nrows) throw std::invalid_argument("csr_matmul: shape mismatch");
    Csr c;
    c.nrows = a.nrows;
    c.ncols = b.ncols;
    c.rowptr.assign(c.nrows + 1, 0);

    std::vector<double> work(b.ncols, 0.0);
    std::vector<std::size_t> marker(b.ncols, static_cast<std::size_t>(-1));
    std::vector<std::size_t> cols;

    for (std::size_t i = 0; i < a.nrows; ++i) {
        cols.clear();
        for (std::size_t ka = a.rowptr[i]; ka < a.rowptr[i + 1]; ++ka) {
            const std::size_t j = a.col[ka];
            const double av = a.val[ka];
            for (std::size_t kb = b.rowptr[j]; kb < b.rowptr[j + 1]; ++kb) {
                const std::size_t cc = b.col[kb];
                if (marker[cc] != i) {
                    marker[cc] = i;
                    work[cc] = 0.0;
                    cols.push_back(cc);
                }
                work[cc] += av * b.val[kb];
            }
        }
        std::sort(cols.begin(), cols.end());
        for (std::size_t cc : cols) {
            c.col.push_back(cc);
            c.val.push_back(work[cc]);
        }
        c.rowptr[i + 1] = c.col.size();
    }
    return c;
}

Csr csr_scale_cols(const Csr& a, const std::vector<double>& d) {
    if (d.size() != a.ncols) throw std::invalid_argument("csr_scale_cols: size mismatch");
    Csr s = a;
    for (std::size_t k = 0; k < s.nnz(); ++k) s.val[k] *= d[s.col[k]];
    return s;
}

Csr csr_add(const Csr& a, const Csr& b, double alpha, double beta) {
    if (a.nrows != b.nrows || a.ncols != b.ncols) throw std::invalid_argument("csr_add: shape mismatch");
    Csr c;
    c.nrows = a.nrows;
    c.ncols = a.ncols;
    c.rowptr.assign(c.nrows + 1, 0);
    for (std::size_t i = 0; i < a.nrows; ++i) {
        std::size_t ka = a.rowptr[i], kb = b.rowptr[i];
        while (ka < a.rowptr[i + 1] || kb < b.rowptr[i + 1]) {
            std::size_t ca = ka < a.rowptr[i + 1] ? a.col[ka] : static_cast<std::size_t>(-1);
            std::size_t cb = kb < b.rowptr[i + 1] ? b.col[kb] : static_cast<std::size_t>(-1);
            if (ca == cb) {
                c.col.push_back(ca);
                c.val.push_back(alpha * a.val[ka] + beta * b.val[kb]);
                ++ka;
                ++kb;
            } else if (ca < cb) {
                c.col.push_back(ca);
                c.val.push_back(alpha * a.val[ka]);
                ++ka;
            } else {
                c.col.push_back(cb);
                c.val.push_back(beta * b.val[kb]);
                ++kb;
            }
        }
        c.rowptr[i + 1] = c.col.size();
    }
    return c;
}

Csr csr_identity(std::size_t n) {
    Csr c;
    c.nrows = c.ncols = n;
    c.rowptr.resize(n + 1);
    c.col.resize(n);
    c.val.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        c.rowptr[i] = i;
        c.col[i] = i;
    }
    c.rowptr[n] = n;
    c.symmetric = true;
    return c;
}

bool csr_is_symmetric(const Csr& a, double tol) {
    if (a.nrows != a.ncols) return false;
    const Csr t = csr_transpose(a);
    const double scale = a.max_abs();
    for (std::size_t i = 0; i < a.nrows; ++i) {
        std::size_t ka = a.rowptr[i], kt = t.rowptr[i];
        while (ka < a.rowptr[i + 1] || kt < t.rowptr[i + 1]) {
            std::size_t ca = ka < a.rowptr[i + 1] ? a.col[ka] : static_cast<std::size_t>(-1);
            std::size_t ct = kt < t.rowptr[i + 1] ? t.col[kt] : static_cast<std::size_t>(-1);
            double diff;
            if (ca == ct) {
                diff = a.val[ka] - t.val[kt];
                ++ka;
                ++kt;
            } else if (ca < ct) {
                diff = a.val[ka];
                ++ka;
            } else {
                diff = t.val[kt];
                ++kt;
            }
            if (std::abs(diff) > tol * std::max(scale, 1e-300)) return false;
        }
    }
    return true;
}

void csr_mark_symmetric(Csr& a, double tol) { a.symmetric = csr_is_symmetric(a, tol); }

} // namespace mixlab
