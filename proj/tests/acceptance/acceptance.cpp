// Acceptance suite: every release criterion as an executable check, one
// PASS/FAIL line each. Exits nonzero when any criterion fails.

#include "mixlab/equilibration.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/infsup.hpp"
#include "mixlab/kernels.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

using namespace mixlab;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run(int id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, ok, what, detail);
    } catch (const std::exception& ex) {
        report(id, false, what, std::string("exception: ") + ex.what());
    }
}

double wall_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// reference eigenvalue tails (mu_{N-3}, mu_{N-2}, mu_{N-1}, mu_N) per level
const double kCrossedTable[5][4] = {
    {0.66666667, 0.5, 0.5, 0.22222222},
    {0.16521696, 0.15643855, 0.15643855, 0.06604647},
    {0.04880971, 0.04191655, 0.04191655, 0.01698587},
    {0.01268672, 0.01065182, 0.01065182, 0.00427448},
    {0.00320245, 0.00267372, 0.00267372, 0.00107035},
};
const std::size_t kCrossedN[5] = {2, 4, 8, 16, 32};

const double kRightTable[5][4] = {
    {0.44698968, 0.41649077, 0.23888594, 0.23720409},
    {0.14099494, 0.14089618, 0.06715927, 0.06707865},
    {0.03714468, 0.03714446, 0.01720941, 0.01720741},
    {0.00938762, 0.00938762, 0.00432346, 0.00432341},
    {0.00235165, 0.00235165, 0.00108154, 0.00108154},
};
const std::size_t kRightN[5] = {4, 8, 16, 32, 64};

struct TableRun {
    std::vector<double> h, mu_min;
    double max_err = 0.0;
    double seconds = 0.0;
};

TableRun run_table(const std::size_t* ns, const double table[5][4], Mesh (*gen)(std::size_t)) {
    TableRun out;
    const double t0 = wall_seconds();
    GenEigOptions opts;
    opts.want_vectors = false;
    for (int lvl = 0; lvl < 5; ++lvl) {
        const Mesh mesh = gen(ns[lvl]);
        MixedOperator op(mesh, FeKind::RT0C);
        const InfSupSpectrum s = infsup_spectrum(op, 4, false, opts);
        for (int j = 0; j < 4; ++j) out.max_err = std::max(out.max_err, std::abs(s.mu[j] - table[lvl][j]));
        out.h.push_back(1.0 / double(ns[lvl]));
        out.mu_min.push_back(s.mu.back());
    }
    out.seconds = wall_seconds() - t0;
    return out;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double h1_norm(const Csr& k, const Csr& m1, const std::vector<double>& v) {
    std::vector<double> t(v.size());
    k.matvec(v.data(), t.data());
    double s = kern::dot(t.data(), v.data(), v.size());
    m1.matvec(v.data(), t.data());
    s += kern::dot(t.data(), v.data(), v.size());
    return std::sqrt(std::abs(s));
}

} // namespace

int main() {
    TableRun crossed, right;

    run(1, "inf-sup eigenvalue table, crossed meshes", [&] {
        crossed = run_table(kCrossedN, kCrossedTable, gen_crossed);
        const bool ok = crossed.max_err <= 1e-6 && crossed.seconds < 120.0;
        return std::make_pair(ok, fmt("max |mu - table| = %.3g, %.1f s", crossed.max_err, crossed.seconds));
    });

    run(2, "inf-sup eigenvalue table, right meshes", [&] {
        right = run_table(kRightN, kRightTable, gen_right);
        const bool ok = right.max_err <= 1e-6;
        return std::make_pair(ok, fmt("max |mu - table| = %.3g, %.1f s", right.max_err, right.seconds));
    });

    run(3, "decay law beta_h = O(h) on both structured families", [&] {
        std::vector<double> bc, br;
        for (double m : crossed.mu_min) bc.push_back(std::sqrt(m));
        for (double m : right.mu_min) br.push_back(std::sqrt(m));
        const double sc = fit_log_slope(crossed.h, bc);
        const double sr = fit_log_slope(right.h, br);
        const bool ok = sc >= 0.9 && sc <= 1.1 && sr >= 0.9 && sr <= 1.1;
        return std::make_pair(ok, fmt("slopes %.3f (crossed), %.3f (right)", sc, sr));
    });

    run(4, "positivity and solvability on every mesh, including imports", [&] {
        double worst_res = 0.0, min_mu = 1e300;
        std::vector<Mesh> meshes;
        meshes.push_back(gen_crossed(4));
        meshes.push_back(gen_right(4));
        meshes.push_back(gen_lshape(2));
        for (std::uint64_t lvl = 0; lvl < 4; ++lvl) {
            const Mesh fresh = oracle::make_unstructured_square(4 << lvl, 1000 + lvl);
            const std::string path = "acceptance_unstructured_L" + std::to_string(lvl) + ".json";
            write_internal_json(fresh, path);
            meshes.push_back(import_mesh(path, MeshFormat::InternalJson));
            std::remove(path.c_str());
        }
        GenEigOptions opts;
        opts.want_vectors = false;
        for (const Mesh& mesh : meshes) {
            MixedOperator op(mesh, FeKind::RT0C);
            const InfSupSpectrum s = infsup_spectrum(op, 1, false, opts);
            min_mu = std::min(min_mu, s.mu.back());
            const auto f = load_vector(op.q_space, Load::analytic([](double x, double y) {
                return std::sin(2.0 * x) - y;
            }));
            const MixedSolution sol = solve_dual_mixed(op, f);
            worst_res = std::max({worst_res, sol.res_y, sol.res_x});
        }
        const bool ok = min_mu > 0.0 && worst_res <= 1e-9;
        return std::make_pair(ok, fmt("min mu = %.3g, worst saddle residual = %.2g", min_mu, worst_res));
    });

    run(5, "galerkin equivalence of the discontinuous pair", [&] {
        double worst_u = 0.0, worst_sig = 0.0;
        const Mesh meshes[3] = {gen_crossed(4), gen_right(6), oracle::make_unstructured_square(5, 77)};
        for (const Mesh& mesh : meshes) {
            MixedOperator op(mesh, FeKind::DRT0);
            const auto f = load_vector(op.q_space, Load::analytic([](double x, double y) {
                return std::cos(x) + x * y;
            }));
            const MixedSolution mix = solve_dual_mixed(op, f);
            SparseCholesky mchol(op.m);
            const auto ug = mchol.solve(f);

            FeSpace p1(FeKind::P1C, mesh);
            const Csr kf = stiffness_p1(p1);
            const Csr mf = mass_p1(p1);
            std::vector<double> d = expand_p1c0(op.q_space, mix.u);
            const auto ugn = expand_p1c0(op.q_space, ug);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= ugn[i];
            worst_u = std::max(worst_u, h1_norm(kf, mf, d));

            // || sigma_h + grad u_G ||_0 (both fields elementwise affine)
            double err2 = 0.0;
            const auto& rule = QuadratureRule::triangle_deg2();
            for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
                const Vec2 g = p1_gradient(mesh, ugn, t);
                const auto& tr = mesh.triangles[t];
                for (const auto& nd : rule.nodes) {
                    const double x = nd.l0 * mesh.vertices[tr[0]][0] + nd.l1 * mesh.vertices[tr[1]][0] +
                                     nd.l2 * mesh.vertices[tr[2]][0];
                    const double y = nd.l0 * mesh.vertices[tr[0]][1] + nd.l1 * mesh.vertices[tr[1]][1] +
                                     nd.l2 * mesh.vertices[tr[2]][1];
                    Vec2 sh{0, 0};
                    for (int le = 0; le < 3; ++le) {
                        const Vec2 eta = rt0_local(mesh, t, le, x, y);
                        sh[0] += mix.sigma[3 * t + le] * eta[0];
                        sh[1] += mix.sigma[3 * t + le] * eta[1];
                    }
                    err2 += nd.w * mesh.tri_area(t) *
                            ((sh[0] + g[0]) * (sh[0] + g[0]) + (sh[1] + g[1]) * (sh[1] + g[1]));
                }
            }
            worst_sig = std::max(worst_sig, std::sqrt(err2));
        }
        const bool ok = worst_u <= 1e-9 && worst_sig <= 1e-9;
        return std::make_pair(ok, fmt("max ||u_h - u_G||_H1 = %.2g, max ||sigma_h + grad u_G||_0 = %.2g",
                                      worst_u, worst_sig));
    });

    run(6, "spectral splitting reassembles the full solution", [&] {
        double worst = 0.0;
        for (auto maker : {+[] { return gen_crossed(4); }, +[] { return gen_right(6); }}) {
            const Mesh mesh = maker();
            MixedOperator op(mesh, FeKind::RT0C);
            const InfSupSpectrum s = infsup_spectrum(op, 0, true);
            const double pi = 3.14159265358979323846;
            const std::vector<double> loads[3] = {
                load_vector(op.q_space, Load::analytic([pi](double x, double y) {
                    return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
                })),
                load_vector(op.q_space, Load::dirac(0.5, 0.5)),
                [&] {
                    oracle::Rng rng(9);
                    std::vector<double> f(op.q_space.dof_count());
                    for (auto& v : f) v = rng.symmetric();
                    return f;
                }(),
            };
            FeSpace p1(FeKind::P1C0, mesh);
            const Csr m1 = mass_p1(p1);
            for (double mu_t : {0.3, 0.5, 0.7})
                for (const auto& f : loads) {
                    const SplitSolution ss = solve_split(op, s, split(s, mu_t), f);
                    const MixedSolution direct = solve_dual_mixed(op, f);
                    std::vector<double> du(direct.u.size()), ds(direct.sigma.size());
                    for (std::size_t i = 0; i < du.size(); ++i) du[i] = ss.u1[i] + ss.u2[i] - direct.u[i];
                    for (std::size_t i = 0; i < ds.size(); ++i)
                        ds[i] = ss.sigma1[i] + ss.sigma2[i] - direct.sigma[i];
                    const double uh1 = h1_norm(op.m, m1, du);
                    std::vector<double> ta(ds.size());
                    op.a.matvec(ds.data(), ta.data());
                    const double sl2 = std::sqrt(std::abs(kern::dot(ta.data(), ds.data(), ds.size())));
                    worst = std::max(worst, sl2 + uh1);
                }
        }
        return std::make_pair(worst <= 1e-8, fmt("max ||sigma gap||_0 + ||u gap||_H1 = %.2g", worst));
    });

    run(7, "eigenbasis representation of both solutions", [&] {
        double worst = 0.0;
        for (auto maker : {+[] { return gen_crossed(4); }, +[] { return gen_right(6); }}) {
            const Mesh mesh = maker();
            MixedOperator op(mesh, FeKind::RT0C);
            const InfSupSpectrum s = infsup_spectrum(op, 0, false);
            SparseCholesky mchol(op.m);
            FeSpace p1(FeKind::P1C0, mesh);
            const Csr m1 = mass_p1(p1);
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                oracle::Rng rng(seed);
                std::vector<double> f(op.q_space.dof_count());
                for (auto& v : f) v = rng.symmetric();
                const Representation rep = representation(s, f);
                const MixedSolution direct = solve_dual_mixed(op, f);
                const auto ug = mchol.solve(f);
                std::vector<double> d1(f.size()), d2(f.size());
                for (std::size_t i = 0; i < f.size(); ++i) {
                    d1[i] = rep.u_mixed[i] - direct.u[i];
                    d2[i] = rep.u_galerkin[i] - ug[i];
                }
                worst = std::max({worst, h1_norm(op.m, m1, d1), h1_norm(op.m, m1, d2)});
            }
        }
        return std::make_pair(worst <= 1e-8, fmt("max H1 reconstruction gap = %.2g", worst));
    });

    run(8, "p1-p0 eigenvalue table on the right meshes", [&] {
        const double table[6] = {0.66666667, 0.33333333, 0.11409783, 0.03137791, 0.00803861, 0.00202209};
        double max_err = 0.0;
        for (int k = 0; k < 6; ++k) {
            const P1P0Result r = p1p0_infsup(gen_right(std::size_t(2) << k));
            max_err = std::max(max_err, std::abs(r.nu_min - table[k]));
        }
        return std::make_pair(max_err <= 1e-6, fmt("max |nu - table| = %.3g", max_err));
    });

    run(9, "smooth convergence rates on crossed meshes", [&] {
        const double t0 = wall_seconds();
        ConvergenceConfig cfg;
        cfg.case_name = "smooth-square";
        cfg.base_n = 4;
        cfg.levels = 5;
        const ConvergenceResult r = convergence_study(cfg);
        const double dt = wall_seconds() - t0;
        const bool ok = std::abs(r.rate_sigma - 1.0) <= 0.15 && std::abs(r.rate_l2 - 2.0) <= 0.15 &&
                        std::abs(r.rate_h1 - 1.0) <= 0.15 && dt < 300.0;
        return std::make_pair(ok, fmt("rates sigma %.2f, L2 %.2f", r.rate_sigma, r.rate_l2) +
                                      fmt(", H1 %.2f; %.0f s", r.rate_h1, dt));
    });

    run(10, "singular convergence rates on the l-shaped domain", [&] {
        // mirrors the reference table's setup: irregular meshes, where the
        // smallest eigenvalue stagnates instead of decaying like h^2
        ConvergenceConfig cfg;
        cfg.case_name = "lshape-singular";
        for (std::uint64_t lvl = 0; lvl < 5; ++lvl) {
            const Mesh fresh = oracle::make_unstructured_lshape(4u << lvl, 1100 + 11 * lvl);
            const std::string path = "acceptance_lshape_L" + std::to_string(lvl) + ".json";
            write_internal_json(fresh, path);
            cfg.mesh_files.push_back(path);
        }
        const ConvergenceResult r = convergence_study(cfg);
        for (const std::string& path : cfg.mesh_files) std::remove(path.c_str());
        const bool ok = std::abs(r.rate_sigma - 2.0 / 3.0) <= 0.1 && std::abs(r.rate_h1 - 2.0 / 3.0) <= 0.1 &&
                        r.rate_l2 >= 1.3 && r.rate_l2 <= 1.7;
        return std::make_pair(ok, fmt("rates sigma %.3f, L2 %.2f", r.rate_sigma, r.rate_l2) +
                                      fmt(", H1 %.3f", r.rate_h1));
    });

    run(11, "equilibration identities on randomized data", [&] {
        double div_err = 0.0, jump = 0.0, fortin = 0.0;
        std::uint64_t seed = 5000;
        int count = 0;
        for (int round = 0; round < 4 && count < 20; ++round) {
            std::vector<Mesh> meshes;
            meshes.push_back(gen_crossed(3 + round));
            meshes.push_back(gen_right(4 + round));
            meshes.push_back(gen_lshape(1 + round));
            meshes.push_back(oracle::make_unstructured_square(4 + round, 31 * round + 7));
            meshes.push_back(uniform_refine(oracle::make_unstructured_square(3, 91 + round)));
            for (const Mesh& mesh : meshes) {
                if (count >= 20) break;
                ++count;
                oracle::Rng rng(++seed);
                std::vector<double> g0(mesh.n_triangles());
                for (auto& v : g0) v = rng.symmetric();
                FeSpace q(FeKind::P1C0, mesh);
                SparseCholesky kchol(stiffness_p1(q));
                const auto uq = kchol.solve(load_vector(q, Load::p0_coeffs(g0)));
                const EquilibratedFlux fl = reconstruct(mesh, expand_p1c0(q, uq), g0);
                div_err = std::max(div_err, fl.max_div_err);
                jump = std::max(jump, fl.max_jump);
                fortin = std::max(fortin, fl.fortin_residual);
            }
        }
        const bool ok = count == 20 && div_err <= 1e-10 && jump <= 1e-10 && fortin <= 1e-9;
        return std::make_pair(ok, fmt("20 instances: max div err %.2g, max jump %.2g", div_err, jump) +
                                      fmt(", max fortin %.2g", fortin));
    });

    run(12, "oracle equivalence: assembly and eigenvalues", [&] {
        double mat_err = 0.0;
        const Mesh meshes[4] = {gen_right(2), gen_crossed(2), oracle::make_irregular_octagon(),
                                oracle::make_unstructured_square(3, 321)};
        for (const Mesh& mesh : meshes) {
            if (mesh.n_triangles() > 32) return std::make_pair(false, std::string("mesh too large"));
            FeSpace rt(FeKind::RT0C, mesh);
            FeSpace drt(FeKind::DRT0, mesh);
            FeSpace q(FeKind::P1C0, mesh);
            auto diff = [&](const Csr& got, const oracle::DenseMatrix& want) {
                double scale = got.max_abs(), d = 0.0;
                for (std::size_t i = 0; i < want.rows(); ++i)
                    for (std::size_t j = 0; j < want.cols(); ++j)
                        d = std::max(d, std::abs(got.coeff(i, j) - want(i, j)));
                return d / std::max(scale, 1.0);
            };
            mat_err = std::max({mat_err, diff(mass_rt0(rt), oracle::dense_mass_rt0c(mesh)),
                                diff(mass_rt0(drt), oracle::dense_mass_drt0(mesh)),
                                diff(coupling_b(rt, q), oracle::dense_coupling_b_rt0c(mesh)),
                                diff(stiffness_p1(q), oracle::dense_stiffness_p1c0(mesh)),
                                diff(mass_p1(q), oracle::dense_mass_p1c0(mesh)),
                                diff(div_rt0_p0(rt, mesh), oracle::dense_div_rt0_p0(mesh)),
                                diff(coupling_p1_p0(q, mesh), oracle::dense_coupling_p1_p0(mesh))});
        }

        // eigenvalues against the whitened singular values (independent route)
        double eig_err = 0.0;
        for (const Mesh& mesh : meshes) {
            MixedOperator op(mesh, FeKind::RT0C);
            const std::size_t nq = op.q_space.dof_count(), nv = op.v_space.dof_count();
            if (nq + nv > 300) continue;
            GenEigResult eig = gen_eig_schur(op.a, op.b, op.m, EigRange::All, nq, {});
            oracle::DenseMatrix ad(nv, nv), md(nq, nq), bd(nq, nv);
            for (std::size_t i = 0; i < nv; ++i)
                for (std::size_t k = op.a.rowptr[i]; k < op.a.rowptr[i + 1]; ++k)
                    ad(i, op.a.col[k]) = op.a.val[k];
            for (std::size_t i = 0; i < nq; ++i)
                for (std::size_t k = op.m.rowptr[i]; k < op.m.rowptr[i + 1]; ++k)
                    md(i, op.m.col[k]) = op.m.val[k];
            for (std::size_t i = 0; i < nq; ++i)
                for (std::size_t k = op.b.rowptr[i]; k < op.b.rowptr[i + 1]; ++k)
                    bd(i, op.b.col[k]) = op.b.val[k];
            const oracle::DenseMatrix mi = oracle::inv_sqrt_spd(md);
            const oracle::DenseMatrix ai = oracle::inv_sqrt_spd(ad);
            oracle::DenseMatrix g(nq, nv);
            for (std::size_t i = 0; i < nq; ++i)
                for (std::size_t j = 0; j < nv; ++j) {
                    double s = 0;
                    for (std::size_t p = 0; p < nq; ++p)
                        for (std::size_t r2 = 0; r2 < nv; ++r2) s += mi(i, p) * bd(p, r2) * ai(r2, j);
                    g(i, j) = s;
                }
            const std::vector<double> sv = oracle::jacobi_singular_values(g);
            for (std::size_t i = 0; i < nq; ++i)
                eig_err = std::max(eig_err, std::abs(std::sqrt(eig.values[nq - 1 - i]) - sv[i]));
        }
        const bool ok = mat_err <= 1e-12 && eig_err <= 1e-9;
        return std::make_pair(ok, fmt("max matrix deviation %.2g, max sqrt(mu) vs sv %.2g", mat_err, eig_err));
    });

    run(13, "excluded reproductions covered by qualitative checks", [&] {
        // The published unstructured-mesh eigenvalue columns and the finest
        // (million-DOF) convergence rows are out of desk-scale reach; they
        // are replaced by criteria 4, 11, 12 plus this slow-decay check on
        // our own irregular meshes.
        std::vector<double> hs, mus;
        GenEigOptions opts;
        opts.want_vectors = false;
        for (std::uint64_t lvl = 0; lvl < 4; ++lvl) {
            const std::size_t n = 4 << lvl;
            const Mesh mesh = oracle::make_unstructured_square(n, 4242 + 17 * lvl);
            MixedOperator op(mesh, FeKind::RT0C);
            const InfSupSpectrum s = infsup_spectrum(op, 1, false, opts);
            hs.push_back(1.0 / double(n));
            mus.push_back(s.mu.back());
        }
        const double slope = fit_log_slope(hs, mus);
        bool positive = true;
        for (double m : mus) positive = positive && m > 0.0;
        const bool ok = positive && slope < 1.5; // visibly slower than the structured h^2 law
        return std::make_pair(ok, fmt("mu_min decay exponent %.2f (structured: 2.0), all positive", slope));
    });

    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
