#include "mixlab/solvers.hpp"
#include "mixlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mixlab {

// ------------------------------------------------------------------ RCM

namespace {

std::vector<std::size_t> bfs_levels(const Csr& a, std::size_t root, std::vector<int>& level) {
    std::vector<std::size_t> order;
    order.reserve(a.nrows);
    std::deque<std::size_t> queue{root};
    level.assign(a.nrows, -1);
    level[root] = 0;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        order.push_back(u);
        for (std::size_t k = a.rowptr[u]; k < a.rowptr[u + 1]; ++k) {
            const std::size_t v = a.col[k];
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return order;
}

std::size_t pseudo_peripheral(const Csr& a, std::size_t seed) {
    std::vector<int> level;
    std::size_t node = seed;
    int ecc = -1;
    for (int pass = 0; pass < 4; ++pass) {
        auto order = bfs_levels(a, node, level);
        const std::size_t far = order.back();
        const int new_ecc = level[far];
        if (new_ecc <= ecc) break;
        ecc = new_ecc;
        node = far;
    }
    return node;
}

} // namespace

std::vector<std::size_t> rcm_ordering(const Csr& a) {
    const std::size_t n = a.nrows;
    std::vector<std::size_t> degree(n);
    for (std::size_t i = 0; i < n; ++i) degree[i] = a.rowptr[i + 1] - a.rowptr[i];

    std::vector<char> visited(n, 0);
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> nbrs;

    for (std::size_t comp_seed = 0; comp_seed < n; ++comp_seed) {
        if (visited[comp_seed]) continue;
        const std::size_t root = pseudo_peripheral(a, comp_seed);
        std::deque<std::size_t> queue{root};
        visited[root] = 1;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            order.push_back(u);
            nbrs.clear();
            for (std::size_t k = a.rowptr[u]; k < a.rowptr[u + 1]; ++k) {
                const std::size_t v = a.col[k];
                if (!visited[v]) {
                    visited[v] = 1;
                    nbrs.push_back(v);
                }
            }
            std::sort(nbrs.begin(), nbrs.end(),
                      [&](std::size_t x, std::size_t y) { return degree[x] != degree[y] ? degree[x] < degree[y] : x < y; });
            for (std::size_t v : nbrs) queue.push_back(v);
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

// ------------------------------------------------------- envelope Cholesky

SparseCholesky::SparseCholesky(const Csr& spd) : n_(spd.nrows) {
    if (spd.nrows != spd.ncols) throw std::invalid_argument("SparseCholesky: matrix not square");
    perm_ = rcm_ordering(spd);
    iperm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) iperm_[perm_[i]] = i;

    // envelope row starts in permuted numbering
    start_.assign(n_, 0);
    for (std::size_t ip = 0; ip < n_; ++ip) {
        const std::size_t i = perm_[ip];
        std::size_t lo = ip;
        for (std::size_t k = spd.rowptr[i]; k < spd.rowptr[i + 1]; ++k) {
            const std::size_t jp = iperm_[spd.col[k]];
            if (jp < lo) lo = jp;
        }
        start_[ip] = lo;
    }
    off_.assign(n_ + 1, 0);
    for (std::size_t ip = 0; ip < n_; ++ip) off_[ip + 1] = off_[ip] + (ip - start_[ip]);
    env_.assign(off_[n_], 0.0);
    diag_.assign(n_, 0.0);

    // scatter permuted entries into the envelope
    for (std::size_t ip = 0; ip < n_; ++ip) {
        const std::size_t i = perm_[ip];
        for (std::size_t k = spd.rowptr[i]; k < spd.rowptr[i + 1]; ++k) {
            const std::size_t jp = iperm_[spd.col[k]];
            if (jp < ip)
                env_[off_[ip] + (jp - start_[ip])] = spd.val[k];
            else if (jp == ip)
                diag_[ip] = spd.val[k];
        }
    }

    // numeric factorization
    for (std::size_t i = 0; i < n_; ++i) {
        double* li = env_.data() + off_[i];
        const std::size_t si = start_[i];
        for (std::size_t j = si; j < i; ++j) {
            const std::size_t sj = start_[j];
            const std::size_t lo = std::max(si, sj);
            const double* lj = env_.data() + off_[j];
            const double s = kern::dot(li + (lo - si), lj + (lo - sj), j - lo);
            li[j - si] = (li[j - si] - s) / diag_[j];
        }
        const double s = kern::dot(li, li, i - si);
        const double piv = diag_[i] - s;
        if (piv <= 0.0 || !std::isfinite(piv))
            throw std::runtime_error("cholesky: non-positive pivot at row " + std::to_string(perm_[i]) +
                                     " (value " + std::to_string(piv) + ")");
        diag_[i] = std::sqrt(piv);
    }
}

void SparseCholesky::permute(const std::vector<double>& x, std::vector<double>& xp) const {
    xp.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) xp[i] = x[perm_[i]];
}

void SparseCholesky::unpermute(const std::vector<double>& xp, std::vector<double>& x) const {
    x.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = xp[i];
}

void SparseCholesky::solve_lower_inplace(double* b) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t si = start_[i];
        b[i] = (b[i] - kern::dot(env_.data() + off_[i], b + si, i - si)) / diag_[i];
    }
}

void SparseCholesky::solve_lower_transposed_inplace(double* b) const {
    for (std::size_t i = n_; i-- > 0;) {
        const std::size_t si = start_[i];
        b[i] /= diag_[i];
        kern::axpy(-b[i], env_.data() + off_[i], b + si, i - si);
    }
}

void SparseCholesky::solve_inplace(std::vector<double>& b) const {
    std::vector<double> t(n_);
    permute(b, t);
    solve_lower_inplace(t.data());
    solve_lower_transposed_inplace(t.data());
    unpermute(t, b);
}

std::vector<double> SparseCholesky::solve(const std::vector<double>& rhs) const {
    std::vector<double> x = rhs;
    solve_inplace(x);
    return x;
}

// ------------------------------------------------------------------ PCG

IterStats pcg(const LinOp& apply_a, const LinOp& apply_minv, const std::vector<double>& b,
              std::vector<double>& x, double rtol, std::size_t maxit) {
    const std::size_t n = b.size();
    if (x.size() != n) x.assign(n, 0.0);
    std::vector<double> r(n), z(n), p(n), ap(n);

    apply_a(x.data(), ap.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    const double bnorm = std::sqrt(kern::dot(b.data(), b.data(), n));
    const double stop = rtol * (bnorm > 0 ? bnorm : 1.0);

    apply_minv(r.data(), z.data());
    p = z;
    double rz = kern::dot(r.data(), z.data(), n);

    IterStats st;
    for (st.iters = 0; st.iters < maxit; ++st.iters) {
        const double rnorm = std::sqrt(kern::dot(r.data(), r.data(), n));
        st.rel_residual = rnorm / (bnorm > 0 ? bnorm : 1.0);
        if (rnorm <= stop) {
            st.converged = true;
            return st;
        }
        apply_a(p.data(), ap.data());
        const double pap = kern::dot(p.data(), ap.data(), n);
        if (pap <= 0.0 || !std::isfinite(pap))
            throw std::runtime_error("pcg: operator not positive definite (p^T A p = " + std::to_string(pap) + ")");
        const double alpha = rz / pap;
        kern::axpy(alpha, p.data(), x.data(), n);
        kern::axpy(-alpha, ap.data(), r.data(), n);
        apply_minv(r.data(), z.data());
        const double rz_new = kern::dot(r.data(), z.data(), n);
        kern::axpby(1.0, z.data(), rz_new / rz, p.data(), n);
        rz = rz_new;
    }
    const double rnorm = std::sqrt(kern::dot(r.data(), r.data(), n));
    st.rel_residual = rnorm / (bnorm > 0 ? bnorm : 1.0);
    st.converged = st.rel_residual <= rtol;
    return st;
}

// ------------------------------------------------------------------ saddle

DenseMatrix form_schur_dense(const SparseCholesky& achol, const Csr& b) {
    const std::size_t nq = b.nrows;
    const std::size_t nv = b.ncols;
    DenseMatrix s(nq, nq);
    std::vector<double> w(nv);
    for (std::size_t q = 0; q < nq; ++q) {
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t k = b.rowptr[q]; k < b.rowptr[q + 1]; ++k) w[b.col[k]] = b.val[k];
        achol.solve_inplace(w);
        b.matvec(w.data(), s.row(q));
    }
    // numerical symmetrization; the exact S is symmetric
    for (std::size_t i = 0; i < nq; ++i)
        for (std::size_t j = i + 1; j < nq; ++j) {
            const double v = 0.5 * (s(i, j) + s(j, i));
            s(i, j) = s(j, i) = v;
        }
    return s;
}

namespace {

Csr default_schur_precond(const Csr& a, const Csr& b) {
    std::vector<double> dinv = a.diagonal();
    for (double& v : dinv) {
        if (v <= 0.0) throw std::runtime_error("schur precond: non-positive diagonal in A");
        v = 1.0 / v;
    }
    const Csr bt = csr_transpose(b);
    return csr_matmul(csr_scale_cols(b, dinv), bt);
}

struct BlockResiduals {
    double res_y, res_x;
};

BlockResiduals saddle_residuals(const SaddleSystem& sys, const std::vector<double>& y,
                                const std::vector<double>& x) {
    const std::size_t nv = sys.A->nrows, nq = sys.B->nrows;
    std::vector<double> ry(nv), tmp(nv), rx(nq);
    sys.A->matvec(y.data(), ry.data());
    sys.B->matvec_transpose(x.data(), tmp.data());
    for (std::size_t i = 0; i < nv; ++i) ry[i] += tmp[i] - sys.f[i];
    sys.B->matvec(y.data(), rx.data());
    for (std::size_t i = 0; i < nq; ++i) rx[i] -= sys.g[i];

    auto nrm = [](const std::vector<double>& v) { return std::sqrt(kern::dot(v.data(), v.data(), v.size())); };
    const double ynorm = nrm(y), xnorm = nrm(x);
    const double scale_y = sys.A->max_abs() * ynorm + sys.B->max_abs() * xnorm + nrm(sys.f) + 1e-300;
    const double scale_x = sys.B->max_abs() * ynorm + nrm(sys.g) + 1e-300;
    return {nrm(ry) / scale_y, nrm(rx) / scale_x};
}

} // namespace

SaddleResult solve_saddle(const SaddleSystem& sys, const SaddleOptions& opts) {
    const Csr& a = *sys.A;
    const Csr& b = *sys.B;
    const std::size_t nv = a.nrows, nq = b.nrows;
    if (b.ncols != nv || sys.f.size() != nv || sys.g.size() != nq)
        throw std::invalid_argument("solve_saddle: inconsistent dimensions");
    if (nv < nq) throw std::runtime_error("inf-sup failure: singular Schur complement (N_V < N_Q)");

    SparseCholesky achol(a);
    SaddleResult out;

    // rhs of the Schur system: B A^-1 f - g
    std::vector<double> ainv_f = achol.solve(sys.f);
    std::vector<double> rhs = b.matvec(ainv_f);
    for (std::size_t i = 0; i < nq; ++i) rhs[i] -= sys.g[i];

    if (nq <= opts.dense_max) {
        out.path = "schur-dense";
        DenseMatrix s = form_schur_dense(achol, b);
        try {
            DenseCholesky schol(s);
            out.x = schol.solve(rhs);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("inf-sup failure: singular Schur complement");
        }
    } else {
        out.path = "schur-pcg";
        Csr p = opts.precond ? *opts.precond : default_schur_precond(a, b);
        SparseCholesky pchol(p);
        std::vector<double> tv(nv);
        LinOp apply_s = [&](const double* xin, double* yout) {
            b.matvec_transpose(xin, tv.data());
            std::vector<double> sv(tv);
            achol.solve_inplace(sv);
            b.matvec(sv.data(), yout);
        };
        LinOp apply_p = [&](const double* xin, double* yout) {
            std::vector<double> t(xin, xin + nq);
            pchol.solve_inplace(t);
            std::copy(t.begin(), t.end(), yout);
        };
        out.x.assign(nq, 0.0);
        IterStats st = pcg(apply_s, apply_p, rhs, out.x, opts.rtol, opts.max_iters);
        out.iters = st.iters;
        if (!st.converged)
            throw std::runtime_error("solve_saddle: pcg stalled at relative residual " +
                                     std::to_string(st.rel_residual));
    }

    // back-substitution: y = A^-1 (f - B^T x)
    std::vector<double> btx(nv);
    b.matvec_transpose(out.x.data(), btx.data());
    out.y.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) out.y[i] = sys.f[i] - btx[i];
    achol.solve_inplace(out.y);

    const BlockResiduals res = saddle_residuals(sys, out.y, out.x);
    out.res_y = res.res_y;
    out.res_x = res.res_x;
    if (out.res_y > 1e-6 || out.res_x > 1e-6)
        throw std::runtime_error("inf-sup failure: singular Schur complement (block residuals " +
                                 std::to_string(out.res_y) + ", " + std::to_string(out.res_x) + ")");
    return out;
}

// ------------------------------------------------------------------ eigen

namespace {

// C = L^-1 (P S P^T) L^-T computed with contiguous row solves; consumes s.
PackedSym reduce_to_standard(DenseMatrix& s, const SparseCholesky& lm) {
    const std::size_t n = s.rows();
    const auto& perm = lm.perm();

    DenseMatrix sp(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double* dst = sp.row(i);
        const double* src = s.row(perm[i]);
        for (std::size_t j = 0; j < n; ++j) dst[j] = src[perm[j]];
    }
    s = DenseMatrix(); // release

    // V = Sp L^-T : row-wise forward solves, in place
    for (std::size_t i = 0; i < n; ++i) lm.solve_lower_inplace(sp.row(i));
    // transpose in place
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) std::swap(sp(i, j), sp(j, i));
    // C = V^T L^-T : row-wise forward solves again
    for (std::size_t i = 0; i < n; ++i) lm.solve_lower_inplace(sp.row(i));

    PackedSym c(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = c.row(i);
        for (std::size_t j = i; j < n; ++j) row[j - i] = 0.5 * (sp(i, j) + sp(j, i));
    }
    return c;
}

} // namespace

GenEigResult gen_eig_dense(DenseMatrix s, const Csr& m, EigRange range, std::size_t k,
                           const GenEigOptions& opts) {
    const std::size_t n = s.rows();
    if (m.nrows != n || m.ncols != n) throw std::invalid_argument("gen_eig_dense: shape mismatch");
    if (range != EigRange::All && k > n) throw std::invalid_argument("gen_eig_dense: k exceeds dimension");

    const double snorm = [&] {
        double mx = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, std::abs(s(i, j)));
        return std::max(mx, 1e-300);
    }();

    // keep a copy for residual checks when vectors are requested
    DenseMatrix s_copy;
    if (opts.want_vectors) s_copy = s;

    SparseCholesky lm(m);
    PackedSym c = reduce_to_standard(s, lm);
    SymEigResult se = sym_eig(std::move(c), range, k, opts.want_vectors);

    GenEigResult out;
    out.path = "dense";
    out.values = std::move(se.values);

    if (opts.want_vectors) {
        const std::size_t kk = out.values.size();
        out.vectors = DenseMatrix(n, kk);
        out.residuals.resize(kk);
        std::vector<double> z(n), x(n), sx(n), mx(n);
        for (std::size_t j = 0; j < kk; ++j) {
            for (std::size_t i = 0; i < n; ++i) z[i] = se.vectors(i, j);
            lm.solve_lower_transposed_inplace(z.data());
            lm.unpermute(z, x);
            for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = x[i];
            // residual ||S x - mu M x|| / ||S||
            sx = s_copy.matvec(x);
            m.matvec(x.data(), mx.data());
            double r2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = sx[i] - out.values[j] * mx[i];
                r2 += r * r;
            }
            out.residuals[j] = std::sqrt(r2) / snorm;
            if (out.residuals[j] > opts.residual_tol)
                throw std::runtime_error("gen_eig: eigenpair residual " + std::to_string(out.residuals[j]) +
                                         " above tolerance for eigenvalue " + std::to_string(out.values[j]));
        }
    }
    return out;
}

GenEigResult gen_eig_sparse(const Csr& s, const Csr& m, EigRange range, std::size_t k,
                            const GenEigOptions& opts) {
    const std::size_t n = s.nrows;
    if (n <= opts.dense_max) {
        DenseMatrix sd(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t kk = s.rowptr[i]; kk < s.rowptr[i + 1]; ++kk) sd(i, s.col[kk]) = s.val[kk];
        return gen_eig_dense(std::move(sd), m, range, k, opts);
    }
    throw std::runtime_error("gen_eig_sparse: dimension " + std::to_string(n) +
                             " above dense threshold; use gen_eig_schur");
}

namespace {

struct Lcg64 {
    unsigned long long s;
    double next() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>((s >> 11) & ((1ULL << 52) - 1)) / static_cast<double>(1ULL << 52) - 0.5;
    }
};

// Shift-invert Lanczos for the k smallest eigenvalues of S x = mu M x,
// S available only through solves (S SPD). Runs in the M inner product on
// Op = S^-1 M; the largest Ritz values are 1/mu.
GenEigResult lanczos_smallest(const LinOp& solve_s, const Csr& m, std::size_t k,
                              const GenEigOptions& opts, double snorm, const LinOp& apply_s) {
    const std::size_t n = m.nrows;
    const std::size_t maxit = std::min(opts.max_lanczos, n);
    std::vector<std::vector<double>> basis; // M-orthonormal Lanczos vectors
    std::vector<double> alpha, beta;

    Lcg64 rng{0xc0ffee123456789ULL};
    std::vector<double> v(n), w(n), mv(n);
    for (auto& vi : v) vi = rng.next();

    auto m_dot = [&](const std::vector<double>& x, const std::vector<double>& y) {
        m.matvec(x.data(), mv.data());
        return kern::dot(mv.data(), y.data(), n);
    };

    const double nv = std::sqrt(m_dot(v, v));
    kern::scal(1.0 / nv, v.data(), n);
    basis.push_back(v);

    // Ritz extraction from the current tridiagonal (alpha, beta)
    auto extract = [&](GenEigResult& out) {
        const std::size_t dim = alpha.size();
        std::vector<double> d = alpha, e = beta;
        e.resize(dim > 0 ? dim - 1 : 0);
        DenseMatrix z = DenseMatrix::identity(dim);
        tridiag_ql(d, e, &z);
        std::vector<std::size_t> order(dim);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return d[p] > d[q]; });
        const std::size_t got = std::min(k, dim);
        out.values.resize(got);
        out.vectors = DenseMatrix(n, got);
        out.residuals.assign(got, 0.0);
        std::vector<double> x(n), sx(n), mx(n);
        for (std::size_t jj = 0; jj < got; ++jj) {
            const std::size_t idx = order[jj]; // jj-th largest theta = jj-th smallest mu
            out.values[jj] = 1.0 / d[idx];     // ascending mu
            std::fill(x.begin(), x.end(), 0.0);
            for (std::size_t i2 = 0; i2 < dim; ++i2) kern::axpy(z(i2, idx), basis[i2].data(), x.data(), n);
            const double xn = std::sqrt(m_dot(x, x));
            kern::scal(1.0 / xn, x.data(), n);
            for (std::size_t i2 = 0; i2 < n; ++i2) out.vectors(i2, jj) = x[i2];
        }
        for (std::size_t jj = 0; jj < got; ++jj) {
            for (std::size_t i2 = 0; i2 < n; ++i2) x[i2] = out.vectors(i2, jj);
            apply_s(x.data(), sx.data());
            m.matvec(x.data(), mx.data());
            double r2 = 0.0;
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                const double r = sx[i2] - out.values[jj] * mx[i2];
                r2 += r * r;
            }
            out.residuals[jj] = std::sqrt(r2) / snorm;
        }
    };

    GenEigResult out;
    out.path = "lanczos";

    for (std::size_t j = 0; j < maxit; ++j) {
        // w = Op v_j = S^-1 M v_j
        m.matvec(basis[j].data(), mv.data());
        solve_s(mv.data(), w.data());

        const double aj = m_dot(w, basis[j]);
        alpha.push_back(aj);
        kern::axpy(-aj, basis[j].data(), w.data(), n);
        if (j > 0) kern::axpy(-beta[j - 1], basis[j - 1].data(), w.data(), n);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) {
                const double c = m_dot(w, q);
                kern::axpy(-c, q.data(), w.data(), n);
            }
        const double bj = std::sqrt(std::max(m_dot(w, w), 0.0));
        const std::size_t dim = alpha.size();

        bool converged = false;
        if (bj < 1e-13 || dim == n) {
            converged = true;
        } else if (dim >= k + 2 && dim % 10 == 0) {
            // residual bound |beta_j * z_last| per wanted Ritz pair
            std::vector<double> d = alpha, e = beta;
            DenseMatrix z = DenseMatrix::identity(dim);
            tridiag_ql(d, e, &z);
            std::vector<std::size_t> order(dim);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return d[p] > d[q]; });
            converged = true;
            for (std::size_t jj = 0; jj < std::min(k, dim); ++jj) {
                const double bound = std::abs(bj * z(dim - 1, order[jj])) / std::max(std::abs(d[order[jj]]), 1e-300);
                if (bound > 1e-12) {
                    converged = false;
                    break;
                }
            }
        }

        if (converged) {
            extract(out);
            const double worst =
                out.residuals.empty() ? 0.0 : *std::max_element(out.residuals.begin(), out.residuals.end());
            if (worst > opts.residual_tol)
                throw std::runtime_error("gen_eig lanczos: Ritz residual " + std::to_string(worst) +
                                         " above tolerance after " + std::to_string(dim) + " iterations");
            return out;
        }

        beta.push_back(bj);
        kern::scal(1.0 / bj, w.data(), n);
        basis.push_back(w);
    }

    extract(out);
    const double worst = out.residuals.empty() ? 1.0 : *std::max_element(out.residuals.begin(), out.residuals.end());
    if (worst > opts.residual_tol)
        throw std::runtime_error("gen_eig lanczos: no convergence after " + std::to_string(alpha.size()) +
                                 " iterations; worst residual " + std::to_string(worst));
    return out;
}

} // namespace

GenEigResult gen_eig_schur(const Csr& a, const Csr& b, const Csr& m, EigRange range, std::size_t k,
                           const GenEigOptions& opts) {
    const std::size_t nq = b.nrows;
    SparseCholesky achol(a);

    if (nq <= opts.dense_max) {
        DenseMatrix s = form_schur_dense(achol, b);
        return gen_eig_dense(std::move(s), m, range, k, opts);
    }

    if (range != EigRange::Smallest)
        throw std::runtime_error("gen_eig_schur: only smallest-k supported above the dense threshold");

    // iterative fallback: shift-invert Lanczos with S-solves by PCG
    Csr p = default_schur_precond(a, b);
    SparseCholesky pchol(p);
    const std::size_t nv = a.nrows;
    std::vector<double> tv(nv);
    LinOp apply_s = [&](const double* xin, double* yout) {
        b.matvec_transpose(xin, tv.data());
        std::vector<double> sv(tv);
        achol.solve_inplace(sv);
        b.matvec(sv.data(), yout);
    };
    LinOp apply_p = [&](const double* xin, double* yout) {
        std::vector<double> t(xin, xin + nq);
        pchol.solve_inplace(t);
        std::copy(t.begin(), t.end(), yout);
    };
    LinOp solve_s = [&](const double* rhs, double* sol) {
        std::vector<double> bb(rhs, rhs + nq), xx(nq, 0.0);
        IterStats st = pcg([&](const double* xi, double* yo) { apply_s(xi, yo); }, apply_p, bb, xx, 1e-13, 200000);
        if (!st.converged)
            throw std::runtime_error("gen_eig lanczos: inner pcg stalled at " + std::to_string(st.rel_residual));
        std::copy(xx.begin(), xx.end(), sol);
    };

    // ||S|| estimate from the preconditioner scale
    double snorm = p.max_abs();
    return lanczos_smallest(solve_s, m, k, opts, std::max(snorm, 1e-300), apply_s);
}

} // namespace mixlab
