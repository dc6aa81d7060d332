#include "mixlab/infsup.hpp"
#include "mixlab/equilibration.hpp"
#include "mixlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mixlab {

MixedOperator::MixedOperator(const Mesh& mesh, FeKind v_kind)
    : v_space(v_kind, mesh), q_space(FeKind::P1C0, mesh), a(mass_rt0(v_space)),
      b(coupling_b(v_space, q_space)), m(stiffness_p1(q_space)) {
    if (v_kind != FeKind::RT0C && v_kind != FeKind::DRT0)
        throw std::invalid_argument("MixedOperator: V must be RT0C or DRT0");
}

MixedSolution solve_dual_mixed(const MixedOperator& op, const std::vector<double>& f_load,
                               const SaddleOptions& opts) {
    SaddleSystem sys;
    sys.A = &op.a;
    sys.B = &op.b;
    sys.f.assign(op.v_space.dof_count(), 0.0);
    sys.g.resize(f_load.size());
    for (std::size_t i = 0; i < f_load.size(); ++i) sys.g[i] = -f_load[i];

    SaddleOptions o = opts;
    if (!o.precond) o.precond = &op.m; // the H1_0 stiffness preconditions the Schur complement
    SaddleResult r = solve_saddle(sys, o);
    return {std::move(r.y), std::move(r.x), r.res_y, r.res_x};
}

InfSupSpectrum infsup_spectrum(const MixedOperator& op, std::size_t k, bool want_sigma,
                               const GenEigOptions& opts) {
    const std::size_t nq = op.q_space.dof_count();
    if (k > nq) throw std::invalid_argument("infsup_spectrum: k exceeds dim(Q_h)");
    const bool full = (k == 0 || k == nq);

    GenEigResult eig = gen_eig_schur(op.a, op.b, op.m, full ? EigRange::All : EigRange::Smallest,
                                     full ? nq : k, opts);

    InfSupSpectrum spectrum;
    spectrum.dim_q = nq;
    spectrum.full = full;
    const std::size_t m = eig.values.size();

    // descending order
    spectrum.mu.assign(eig.values.rbegin(), eig.values.rend());
    spectrum.residuals.assign(eig.residuals.rbegin(), eig.residuals.rend());
    if (opts.want_vectors) {
        spectrum.u = DenseMatrix(nq, m);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < nq; ++i) spectrum.u(i, j) = eig.vectors(i, m - 1 - j);
    }

    const double mu_min = spectrum.mu.empty() ? 0.0 : spectrum.mu.back();
    if (!(mu_min > 1e-12))
        throw std::runtime_error("infsup_spectrum: mu_min " + std::to_string(mu_min) +
                                 " not strictly positive");
    spectrum.beta_h = std::sqrt(mu_min);
    for (double mu : spectrum.mu)
        if (mu > 1.0 + 1e-9)
            throw std::runtime_error("infsup_spectrum: eigenvalue " + std::to_string(mu) + " above 1");

    if (want_sigma && opts.want_vectors) {
        // sigma_i: A y = -B^T x_i
        SparseCholesky achol(op.a);
        const std::size_t nv = op.v_space.dof_count();
        spectrum.sigma = DenseMatrix(nv, m);
        std::vector<double> x(nq), y(nv);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < nq; ++i) x[i] = spectrum.u(i, j);
            op.b.matvec_transpose(x.data(), y.data());
            for (double& v : y) v = -v;
            achol.solve_inplace(y);
            for (std::size_t i = 0; i < nv; ++i) spectrum.sigma(i, j) = y[i];
        }
    }
    return spectrum;
}

InfSupSpectrum infsup_spectrum(const Mesh& mesh, FeKind v_kind, std::size_t k, bool want_sigma) {
    MixedOperator op(mesh, v_kind);
    return infsup_spectrum(op, k, want_sigma);
}

double fit_log_slope(const std::vector<double>& h, const std::vector<double>& y) {
    if (h.size() != y.size() || h.size() < 3)
        throw std::invalid_argument("fit_log_slope: need at least 3 samples");
    const std::size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(h[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Splitting split(const InfSupSpectrum& spectrum, double mu_threshold) {
    if (!(mu_threshold > 0.0 && mu_threshold < 1.0))
        throw std::invalid_argument("split: threshold must lie in (0,1)");
    Splitting sp;
    sp.mu_threshold = mu_threshold;
    sp.n_stable = 0;
    while (sp.n_stable < spectrum.mu.size() && spectrum.mu[sp.n_stable] >= mu_threshold) ++sp.n_stable;
    return sp;
}

namespace {

// dense block X^T K Y from coefficient columns
DenseMatrix sandwich(const DenseMatrix& xcols, const Csr& kmat, const DenseMatrix& ycols,
                     std::size_t x0, std::size_t nx, std::size_t y0, std::size_t ny) {
    DenseMatrix out(nx, ny);
    std::vector<double> col(kmat.ncols), kcol(kmat.nrows);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < kmat.ncols; ++i) col[i] = ycols(i, y0 + j);
        kmat.matvec(col.data(), kcol.data());
        for (std::size_t i = 0; i < nx; ++i) {
            double s = 0.0;
            for (std::size_t r = 0; r < kmat.nrows; ++r) s += xcols(r, x0 + i) * kcol[r];
            out(i, j) = s;
        }
    }
    return out;
}

} // namespace

SplitSolution solve_split(const MixedOperator& op, const InfSupSpectrum& spectrum, const Splitting& sp,
                          const std::vector<double>& f_load) {
    if (!spectrum.full) throw std::invalid_argument("solve_split: full spectrum required");
    if (spectrum.sigma.rows() == 0) throw std::invalid_argument("solve_split: sigma fields required");
    const std::size_t nq = spectrum.dim_q;
    const std::size_t nv = op.v_space.dof_count();
    const std::size_t n1 = sp.n_stable;
    const std::size_t n2 = nq - n1;

    SplitSolution out;
    out.sigma1.assign(nv, 0.0);
    out.sigma2.assign(nv, 0.0);
    out.u1.assign(nq, 0.0);
    out.u2.assign(nq, 0.0);

    auto solve_block = [&](std::size_t base, std::size_t nb, DenseMatrix& a_block, DenseMatrix& b_block,
                           std::vector<double>& sigma_out, std::vector<double>& u_out) {
        if (nb == 0) return;
        a_block = sandwich(spectrum.sigma, op.a, spectrum.sigma, base, nb, base, nb);
        b_block = sandwich(spectrum.u, op.b, spectrum.sigma, base, nb, base, nb);
        // KKT in the spectral basis
        DenseMatrix kkt(2 * nb, 2 * nb);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j) {
                kkt(i, j) = a_block(i, j);
                kkt(i, nb + j) = b_block(j, i);
                kkt(nb + i, j) = b_block(i, j);
            }
        std::vector<double> rhs(2 * nb, 0.0);
        for (std::size_t i = 0; i < nb; ++i) {
            double s = 0.0;
            for (std::size_t q = 0; q < nq; ++q) s += spectrum.u(q, base + i) * f_load[q];
            rhs[nb + i] = -s;
        }
        DenseLu lu(std::move(kkt));
        const std::vector<double> yx = lu.solve(rhs);
        for (std::size_t i = 0; i < nb; ++i) {
            for (std::size_t r = 0; r < nv; ++r) sigma_out[r] += yx[i] * spectrum.sigma(r, base + i);
            for (std::size_t q = 0; q < nq; ++q) u_out[q] += yx[nb + i] * spectrum.u(q, base + i);
        }
    };

    solve_block(0, n1, out.a11, out.b11, out.sigma1, out.u1);
    solve_block(n1, n2, out.a22, out.b22, out.sigma2, out.u2);
    return out;
}

Representation representation(const InfSupSpectrum& spectrum, const std::vector<double>& f_load) {
    if (!spectrum.full) throw std::invalid_argument("representation: full spectrum required");
    const std::size_t nq = spectrum.dim_q;
    Representation rep;
    rep.alpha.assign(nq, 0.0);
    rep.u_mixed.assign(nq, 0.0);
    rep.u_galerkin.assign(nq, 0.0);
    for (std::size_t i = 0; i < spectrum.mu.size(); ++i) {
        double a = 0.0;
        for (std::size_t q = 0; q < nq; ++q) a += spectrum.u(q, i) * f_load[q];
        rep.alpha[i] = a;
        const double am = a / spectrum.mu[i];
        for (std::size_t q = 0; q < nq; ++q) {
            rep.u_mixed[q] += am * spectrum.u(q, i);
            rep.u_galerkin[q] += a * spectrum.u(q, i);
        }
    }
    return rep;
}

P1P0Result p1p0_infsup(const Mesh& mesh) {
    FeSpace q(FeKind::P1C0, mesh);
    const Csr c = coupling_p1_p0(q, mesh);
    std::vector<double> inv_area(mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) inv_area[t] = 1.0 / mesh.tri_area(t);
    const Csr s = csr_matmul(csr_scale_cols(c, inv_area), csr_transpose(c));
    const Csr m1 = mass_p1(q);

    GenEigResult eig = gen_eig_sparse(s, m1, EigRange::Smallest, 1, {});
    P1P0Result out;
    out.nu_min = eig.values[0];
    out.zeta = std::sqrt(std::max(out.nu_min, 0.0));
    out.w.resize(q.dof_count());
    for (std::size_t i = 0; i < q.dof_count(); ++i) out.w[i] = eig.vectors(i, 0);
    // sign convention: largest-magnitude entry positive
    double best = 0.0;
    for (double v : out.w)
        if (std::abs(v) > std::abs(best)) best = v;
    if (best < 0.0)
        for (double& v : out.w) v = -v;
    return out;
}

LaplaceEigs laplace_eigenpairs(const Mesh& mesh, std::size_t count) {
    FeSpace q(FeKind::P1C0, mesh);
    if (count > q.dof_count()) throw std::invalid_argument("laplace_eigenpairs: count exceeds dim(Q_h)");
    const Csr k = stiffness_p1(q);
    const Csr m = mass_p1(q);
    GenEigResult eig = gen_eig_sparse(k, m, EigRange::Smallest, count, {});
    LaplaceEigs out;
    out.lambda = eig.values;
    out.w = std::move(eig.vectors);
    return out;
}

std::vector<StableWitnessRow> stable_subspace_check(const std::vector<const Mesh*>& levels,
                                                    const std::vector<std::size_t>& modes) {
    if (levels.size() < 3) throw std::invalid_argument("stable_subspace_check: need at least 3 levels");
    if (modes.empty()) throw std::invalid_argument("stable_subspace_check: no modes given");
    const std::size_t kmax = *std::max_element(modes.begin(), modes.end());

    struct LevelData {
        double h, lambda, ratio, c_pi, c_sigma;
    };
    std::vector<LevelData> data;

    for (const Mesh* mp : levels) {
        const Mesh& mesh = *mp;
        MixedOperator op(mesh, FeKind::RT0C);
        const FeSpace& q = op.q_space;
        LaplaceEigs le = laplace_eigenpairs(mesh, kmax);

        const std::size_t nq = q.dof_count();
        const double h = mesh.h_max();
        std::vector<double> w(nq, 0.0);
        std::vector<double> varsigma(op.v_space.dof_count(), 0.0);
        double lam_max = 0.0, cpi_level = 0.0, csig_level = 0.0;

        for (std::size_t mode : modes) {
            const std::size_t j = mode - 1;
            const double lam = le.lambda[j];
            lam_max = std::max(lam_max, lam);
            std::vector<double> wk(nq);
            for (std::size_t i = 0; i < nq; ++i) wk[i] = le.w(i, j);
            for (std::size_t i = 0; i < nq; ++i) w[i] += wk[i];

            // g0 = lambda_k Pi0 w_k (elementwise mean of the P1 function)
            const std::vector<double> wk_nodal = expand_p1c0(q, wk);
            std::vector<double> g0(mesh.n_triangles());
            for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
                const auto& tr = mesh.triangles[t];
                g0[t] = lam * (wk_nodal[tr[0]] + wk_nodal[tr[1]] + wk_nodal[tr[2]]) / 3.0;
            }
            DarcySolution ds = darcy_solve(mesh, g0);
            for (std::size_t e = 0; e < varsigma.size(); ++e) varsigma[e] += ds.sigma[e];

            // per-mode constants entering the bound
            const std::vector<double> kw = op.m.matvec(wk);
            const double gradw = std::sqrt(kern::dot(kw.data(), wk.data(), nq));
            double proj_err2 = 0.0; // || w_k - Pi0 w_k ||^2, exact elementwise
            for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
                const auto& tr = mesh.triangles[t];
                const double a = wk_nodal[tr[0]], b = wk_nodal[tr[1]], c = wk_nodal[tr[2]];
                const double mean = (a + b + c) / 3.0;
                const double i2 = mesh.tri_area(t) / 6.0 * (a * a + b * b + c * c + a * b + a * c + b * c);
                proj_err2 += i2 - mesh.tri_area(t) * mean * mean;
            }
            cpi_level = std::max(cpi_level, std::sqrt(std::max(proj_err2, 0.0)) / (h * gradw));
            const std::vector<double> as = op.a.matvec(ds.sigma);
            const double signorm = std::sqrt(kern::dot(as.data(), ds.sigma.data(), as.size()));
            csig_level = std::max(csig_level, signorm / (std::sqrt(lam) * gradw));
        }

        // achieved ratio for the combined w
        std::vector<double> bty(nq);
        op.b.matvec(varsigma.data(), bty.data()); // (varsigma, grad phi_q)
        const double num = kern::dot(bty.data(), w.data(), nq);
        const std::vector<double> as2 = op.a.matvec(varsigma);
        const double den_s = std::sqrt(kern::dot(as2.data(), varsigma.data(), as2.size()));
        const std::vector<double> kw2 = op.m.matvec(w);
        const double den_w = std::sqrt(kern::dot(kw2.data(), w.data(), nq));

        LevelData ld;
        ld.h = h;
        ld.lambda = lam_max;
        ld.ratio = std::abs(num) / (den_s * den_w);
        ld.c_pi = cpi_level;
        ld.c_sigma = csig_level;
        data.push_back(ld);
    }

    double c_pi = 0.0, c_sigma = 0.0;
    for (const auto& d : data) {
        c_pi = std::max(c_pi, d.c_pi);
        c_sigma = std::max(c_sigma, d.c_sigma);
    }
    std::vector<StableWitnessRow> rows;
    for (const auto& d : data) {
        StableWitnessRow r;
        r.h = d.h;
        r.lambda = d.lambda;
        r.ratio = d.ratio;
        r.bound = (1.0 - c_pi * c_pi * d.h * d.h * d.lambda) / (c_sigma * std::sqrt(d.lambda));
        rows.push_back(r);
    }
    return rows;
}

} // namespace mixlab
