#include "mixlab/dense.hpp"
#include "mixlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mixlab {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> DenseMatrix::matvec(const std::vector<double>& x) const {
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = kern::dot(row(i), x.data(), cols_);
    return y;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

PackedSym PackedSym::from_dense(const DenseMatrix& m) {
    PackedSym p(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) p.at(i, j) = m(i, j);
    return p;
}

DenseMatrix PackedSym::to_dense() const {
    DenseMatrix m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j) m(i, j) = m(j, i) = at(i, j);
    return m;
}

// ---------------------------------------------------------------- Cholesky

DenseCholesky::DenseCholesky(const DenseMatrix& spd) : n_(spd.rows()), l_(n_, n_) {
    if (spd.rows() != spd.cols()) throw std::invalid_argument("DenseCholesky: matrix not square");
    for (std::size_t i = 0; i < n_; ++i) {
        const double* ai = spd.row(i);
        double* li = l_.row(i);
        for (std::size_t j = 0; j <= i; ++j) {
            double s = ai[j] - kern::dot(li, l_.row(j), j);
            if (j < i) {
                li[j] = s / l_(j, j);
            } else {
                if (s <= 0.0 || !std::isfinite(s))
                    throw std::runtime_error("cholesky: non-positive pivot at row " + std::to_string(i) +
                                             " (value " + std::to_string(s) + ")");
                li[j] = std::sqrt(s);
            }
        }
    }
}

void DenseCholesky::solve_inplace(std::vector<double>& b) const {
    // forward: L y = b
    for (std::size_t i = 0; i < n_; ++i)
        b[i] = (b[i] - kern::dot(l_.row(i), b.data(), i)) / l_(i, i);
    // backward: L^T x = y, running row-axpy form
    for (std::size_t ii = n_; ii-- > 0;) {
        b[ii] /= l_(ii, ii);
        kern::axpy(-b[ii], l_.row(ii), b.data(), ii);
    }
}

std::vector<double> DenseCholesky::solve(const std::vector<double>& rhs) const {
    std::vector<double> x = rhs;
    solve_inplace(x);
    return x;
}

void DenseCholesky::solve_transposed_inplace(std::vector<double>& b) const {
    for (std::size_t ii = n_; ii-- > 0;) {
        b[ii] /= l_(ii, ii);
        kern::axpy(-b[ii], l_.row(ii), b.data(), ii);
    }
}

// ---------------------------------------------------------------- LU

DenseLu::DenseLu(DenseMatrix a) : n_(a.rows()), lu_(std::move(a)), piv_(n_) {
    if (lu_.rows() != lu_.cols()) throw std::invalid_argument("DenseLu: matrix not square");
    std::iota(piv_.begin(), piv_.end(), 0);
    for (std::size_t k = 0; k < n_; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n_; ++i)
            if (std::abs(lu_(i, k)) > best) {
                best = std::abs(lu_(i, k));
                p = i;
            }
        if (best == 0.0) throw std::runtime_error("lu: singular pivot at column " + std::to_string(k));
        if (p != k) {
            std::swap_ranges(lu_.row(k), lu_.row(k) + n_, lu_.row(p));
            std::swap(piv_[k], piv_[p]);
        }
        const double inv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n_; ++i) {
            lu_(i, k) *= inv;
            kern::axpy(-lu_(i, k), lu_.row(k) + k + 1, lu_.row(i) + k + 1, n_ - k - 1);
        }
    }
}

std::vector<double> DenseLu::solve(const std::vector<double>& rhs) const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = rhs[piv_[i]];
    for (std::size_t i = 1; i < n_; ++i) x[i] -= kern::dot(lu_.row(i), x.data(), i);
    for (std::size_t ii = n_; ii-- > 0;) {
        x[ii] = (x[ii] - kern::dot(lu_.row(ii) + ii + 1, x.data() + ii + 1, n_ - ii - 1)) / lu_(ii, ii);
    }
    return x;
}

// ------------------------------------------------- tridiagonalization

void sym_tridiagonalize(PackedSym& a, std::vector<double>& d, std::vector<double>& e,
                        std::vector<double>& tau) {
    const std::size_t n = a.size();
    d.assign(n, 0.0);
    e.assign(n > 0 ? n - 1 : 0, 0.0);
    tau.assign(n, 0.0);
    if (n == 0) return;

    std::vector<double> p(n), w(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        double* vk = a.row(k) + 1; // A(k, k+1..n-1)
        const std::size_t m = n - k - 1;

        double norm2 = kern::dot(vk, vk, m);
        double tail2 = norm2 - vk[0] * vk[0];
        if (tail2 <= 0.0 && tail2 > -1e-300) {
            // row already tridiagonal
            d[k] = a.at(k, k);
            e[k] = vk[0];
            tau[k] = 0.0;
            continue;
        }
        const double sigma = std::sqrt(norm2);
        const double alpha = vk[0] >= 0.0 ? -sigma : sigma;

        // u = v - alpha e1, stored over v
        vk[0] -= alpha;
        const double unorm2 = kern::dot(vk, vk, m);
        const double bt = 2.0 / unorm2;

        // p = bt * A22 * u  (fused packed-upper symv)
        std::fill(p.begin(), p.begin() + m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* rowi = a.row(k + 1 + i); // starts at diagonal (i,i)
            const std::size_t len = m - i - 1;
            p[i] += rowi[0] * vk[i];
            if (len > 0) p[i] += kern::dot_axpy(rowi + 1, vk + i + 1, vk[i], p.data() + i + 1, len);
        }
        kern::scal(bt, p.data(), m);

        // w = p - (bt/2)(u^T p) u
        const double kfac = 0.5 * bt * kern::dot(vk, p.data(), m);
        for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - kfac * vk[i];

        // A22 -= u w^T + w u^T
        for (std::size_t i = 0; i < m; ++i) {
            double* rowi = a.row(k + 1 + i);
            kern::add_scaled2(rowi, -vk[i], w.data() + i, -w[i], vk + i, m - i);
        }

        d[k] = a.at(k, k);
        e[k] = alpha;
        tau[k] = bt;
    }
    if (n >= 2) {
        d[n - 2] = a.at(n - 2, n - 2);
        e[n - 2] = a.at(n - 2, n - 1);
    }
    d[n - 1] = a.at(n - 1, n - 1);
}

void tridiag_apply_q(const PackedSym& a, const std::vector<double>& tau, std::vector<double>& x) {
    const std::size_t n = a.size();
    if (n < 3) return;
    for (std::size_t kk = n - 2; kk-- > 0;) {
        if (tau[kk] == 0.0) continue;
        const double* u = a.row(kk) + 1;
        const std::size_t m = n - kk - 1;
        const double s = tau[kk] * kern::dot(u, x.data() + kk + 1, m);
        kern::axpy(-s, u, x.data() + kk + 1, m);
    }
}

// ------------------------------------------------- tridiagonal QL

namespace {
inline double hypot2(double a, double b) { return std::hypot(a, b); }
}

void tridiag_ql(std::vector<double>& d, std::vector<double>& e, DenseMatrix* z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    std::vector<double> eq(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) eq[i] = e[i];
    eq[n - 1] = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(eq[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (++iter == 60) throw std::runtime_error("tridiag_ql: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * eq[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + eq[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, pp = 0.0;
                bool underflow = false;
                for (std::size_t i1 = m; i1-- > l;) {
                    double f = s * eq[i1];
                    const double b = c * eq[i1];
                    r = hypot2(f, g);
                    eq[i1 + 1] = r;
                    if (r == 0.0) {
                        d[i1 + 1] -= pp;
                        eq[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i1 + 1] - pp;
                    r = (d[i1] - g) * s + 2.0 * c * b;
                    pp = s * r;
                    d[i1 + 1] = g + pp;
                    g = c * r - b;
                    if (z) {
                        const std::size_t nz = z->rows();
                        for (std::size_t k2 = 0; k2 < nz; ++k2) {
                            const double f2 = (*z)(k2, i1 + 1);
                            (*z)(k2, i1 + 1) = s * (*z)(k2, i1) + c * f2;
                            (*z)(k2, i1) = c * (*z)(k2, i1) - s * f2;
                        }
                    }
                }
                if (underflow) continue;
                d[l] -= pp;
                eq[l] = g;
                eq[m] = 0.0;
            }
        } while (m != l);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = 0.0;
}

// ------------------------------------------------- Sturm bisection

namespace {

// number of eigenvalues of T strictly below x
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
    const std::size_t n = d.size();
    std::size_t cnt = 0;
    double q = d[0] - x;
    if (q < 0) ++cnt;
    for (std::size_t i = 1; i < n; ++i) {
        if (q == 0.0) q = std::numeric_limits<double>::min();
        q = d[i] - x - e[i - 1] * e[i - 1] / q;
        if (q < 0) ++cnt;
    }
    return cnt;
}

} // namespace

double tridiag_eigenvalue_k(const std::vector<double>& d, const std::vector<double>& e, std::size_t k) {
    const std::size_t n = d.size();
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    const double span = std::max(hi - lo, 1e-300);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (sturm_count(d, e, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

// ------------------------------------------------- inverse iteration

namespace {

// deterministic LCG start vectors
struct Lcg {
    unsigned long long s;
    double next() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>((s >> 11) & ((1ULL << 52) - 1)) / static_cast<double>(1ULL << 52) - 0.5;
    }
};

// Solve (T - lambda I) x = b with partial pivoting; overwrites x.
void tridiag_shifted_solve(const std::vector<double>& d, const std::vector<double>& e, double lambda,
                           std::vector<double>& x) {
    const std::size_t n = d.size();
    std::vector<double> du(n, 0.0), dm(n, 0.0), dl(n, 0.0), du2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) dm[i] = d[i] - lambda;
    for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = e[i];

    const double tiny = std::numeric_limits<double>::min() * 16;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(dm[i]) >= std::abs(dl[i])) {
            if (std::abs(dm[i]) < tiny) dm[i] = tiny;
            const double mult = dl[i] / dm[i];
            dm[i + 1] -= mult * du[i];
            x[i + 1] -= mult * x[i];
            dl[i] = 0.0;
        } else {
            const double mult = dm[i] / dl[i];
            dm[i] = dl[i];
            const double t = dm[i + 1];
            dm[i + 1] = du[i] - mult * t;
            du2[i] = (i + 2 < n) ? du[i + 1] : 0.0;
            du[i] = t;
            if (i + 2 < n) du[i + 1] = -mult * du2[i];
            const double xb = x[i];
            x[i] = x[i + 1];
            x[i + 1] = xb - mult * x[i];
            dl[i] = mult; // marker only
        }
    }
    if (std::abs(dm[n - 1]) < tiny) dm[n - 1] = tiny;
    x[n - 1] /= dm[n - 1];
    if (n >= 2) {
        const double num = x[n - 2] - du[n - 2] * x[n - 1];
        x[n - 2] = num / (std::abs(dm[n - 2]) < tiny ? tiny : dm[n - 2]);
    }
    for (std::size_t ii = n - 1; ii-- > 1;) {
        const std::size_t i = ii - 1;
        double num = x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2];
        x[i] = num / (std::abs(dm[i]) < tiny ? tiny : dm[i]);
    }
}

void normalize(std::vector<double>& x) {
    const double nrm = std::sqrt(kern::dot(x.data(), x.data(), x.size()));
    if (nrm > 0) kern::scal(1.0 / nrm, x.data(), x.size());
}

} // namespace

DenseMatrix tridiag_eigenvectors(const std::vector<double>& d, const std::vector<double>& e,
                                 const std::vector<double>& values) {
    const std::size_t n = d.size();
    const std::size_t k = values.size();
    DenseMatrix vecs(n, k);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(d[i]) + (i + 1 < n ? std::abs(e[i]) : 0.0));
    const double cluster_tol = std::max(scale, 1.0) * 1e-10;

    std::vector<std::vector<double>> group; // vectors of current cluster
    Lcg rng{0x9e3779b97f4a7c15ULL};

    for (std::size_t j = 0; j < k; ++j) {
        const bool new_cluster = (j == 0) || (std::abs(values[j] - values[j - 1]) > cluster_tol);
        if (new_cluster) group.clear();

        std::vector<double> x(n);
        for (auto& xi : x) xi = rng.next();
        normalize(x);
        for (int pass = 0; pass < 4; ++pass) {
            tridiag_shifted_solve(d, e, values[j], x);
            // orthogonalize against the cluster
            for (const auto& g : group) {
                const double c = kern::dot(g.data(), x.data(), n);
                kern::axpy(-c, g.data(), x.data(), n);
            }
            normalize(x);
        }
        for (std::size_t i = 0; i < n; ++i) vecs(i, j) = x[i];
        group.push_back(std::move(x));
    }
    return vecs;
}

// ------------------------------------------------- drivers

SymEigResult sym_eig(PackedSym a, EigRange range, std::size_t k, bool want_vectors) {
    const std::size_t n = a.size();
    SymEigResult out;
    if (n == 0) return out;
    if (range == EigRange::All) k = n;
    if (k > n) throw std::invalid_argument("sym_eig: k exceeds dimension");

    std::vector<double> d, e, tau;
    sym_tridiagonalize(a, d, e, tau);

    if (range == EigRange::All && want_vectors) {
        DenseMatrix z = DenseMatrix::identity(n);
        std::vector<double> dd = d, ee = e;
        tridiag_ql(dd, ee, &z);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return dd[i] < dd[j]; });
        out.values.resize(n);
        out.vectors = DenseMatrix(n, n);
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) {
            out.values[j] = dd[order[j]];
            for (std::size_t i = 0; i < n; ++i) col[i] = z(i, order[j]);
            tridiag_apply_q(a, tau, col);
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = col[i];
        }
        return out;
    }

    // selected eigenvalues via bisection
    std::vector<std::size_t> idx;
    if (range == EigRange::All) {
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else if (range == EigRange::Smallest) {
        for (std::size_t j = 0; j < k; ++j) idx.push_back(j);
    } else {
        for (std::size_t j = n - k; j < n; ++j) idx.push_back(j);
    }
    out.values.reserve(idx.size());
    for (std::size_t j : idx) out.values.push_back(tridiag_eigenvalue_k(d, e, j));

    if (want_vectors) {
        DenseMatrix tz = tridiag_eigenvectors(d, e, out.values);
        out.vectors = DenseMatrix(n, out.values.size());
        std::vector<double> col(n);
        for (std::size_t j = 0; j < out.values.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = tz(i, j);
            tridiag_apply_q(a, tau, col);
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = col[i];
        }
    }
    return out;
}

} // namespace mixlab
