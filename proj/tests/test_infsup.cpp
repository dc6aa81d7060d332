#include "doctest.h"

#include "mixlab/experiments.hpp"
#include "mixlab/infsup.hpp"
#include "mixlab/kernels.hpp"
#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

using namespace mixlab;

namespace {

std::vector<double> random_load(const FeSpace& q, std::uint64_t seed) {
    oracle::Rng rng(seed);
    std::vector<double> f(q.dof_count());
    for (auto& v : f) v = rng.symmetric();
    return f;
}

double mu_min_of(const Mesh& mesh, FeKind kind) {
    GenEigOptions o;
    o.want_vectors = false;
    MixedOperator op(mesh, kind);
    InfSupSpectrum s = infsup_spectrum(op, std::min<std::size_t>(4, op.q_space.dof_count()), false, o);
    return s.mu.back();
}

} // namespace

TEST_CASE("crossed n=2: the four smallest eigenvalues match the known values") {
    const InfSupSpectrum s = infsup_spectrum(gen_crossed(2), FeKind::RT0C, 4);
    REQUIRE(s.mu.size() == 4); // descending tail of the spectrum
    CHECK(s.mu[0] == doctest::Approx(0.66666667).epsilon(1e-6));
    CHECK(s.mu[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.mu[2] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(s.mu[3] == doctest::Approx(0.22222222).epsilon(1e-6));
    CHECK(s.beta_h == doctest::Approx(std::sqrt(0.22222222)).epsilon(1e-6));
    CHECK(s.dim_q == 5);
}

TEST_CASE("right n=4: smallest eigenvalue") {
    const InfSupSpectrum s = infsup_spectrum(gen_right(4), FeKind::RT0C, 1);
    CHECK(s.mu.back() == doctest::Approx(0.23720409).epsilon(1e-6));
}

TEST_CASE("full spectrum invariants on a crossed mesh") {
    const Mesh mesh = gen_crossed(3);
    MixedOperator op(mesh, FeKind::RT0C);
    const InfSupSpectrum s = infsup_spectrum(op, 0, true);
    const std::size_t n = s.dim_q;
    REQUIRE(s.full);
    REQUIRE(s.mu.size() == n);

    // descending order, inside (0, 1]
    for (std::size_t i = 1; i < n; ++i) CHECK(s.mu[i - 1] >= s.mu[i] - 1e-12);
    CHECK(s.mu.front() <= 1.0 + 1e-9);
    CHECK(s.mu.back() > 1e-12);

    // H1_0-orthonormal eigenfunctions
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> xi(n), mx(n);
        for (std::size_t k = 0; k < n; ++k) xi[k] = s.u(k, i);
        op.m.matvec(xi.data(), mx.data());
        for (std::size_t j = 0; j < n; ++j) {
            double g = 0;
            for (std::size_t k = 0; k < n; ++k) g += mx[k] * s.u(k, j);
            CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-9);
        }
    }

    // companion fields: orthogonal with (sigma_i, sigma_j) = mu_i delta_ij,
    // and each pair satisfies both block equations
    const std::size_t nv = op.v_space.dof_count();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> yi(nv), ay(nv), btx(nv), xi(n);
        for (std::size_t k = 0; k < nv; ++k) yi[k] = s.sigma(k, i);
        for (std::size_t k = 0; k < n; ++k) xi[k] = s.u(k, i);
        op.a.matvec(yi.data(), ay.data());
        op.b.matvec_transpose(xi.data(), btx.data());
        for (std::size_t k = 0; k < nv; ++k) CHECK(std::abs(ay[k] + btx[k]) <= 1e-9);

        // second block: B y_i = -mu_i M x_i
        std::vector<double> by(n), mx(n);
        op.b.matvec(yi.data(), by.data());
        op.m.matvec(xi.data(), mx.data());
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(by[k] + s.mu[i] * mx[k]) <= 1e-9);

        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> yj(nv);
            for (std::size_t k = 0; k < nv; ++k) yj[k] = s.sigma(k, j);
            const double g = kern::dot(ay.data(), yj.data(), nv);
            CHECK(std::abs(g - (i == j ? s.mu[i] : 0.0)) <= 1e-9);
        }
    }

    // the largest eigenfunction does not change sign
    std::vector<double> u1(n);
    for (std::size_t k = 0; k < n; ++k) u1[k] = s.u(k, 0);
    const auto nodal = expand_p1c0(op.q_space, u1);
    double mn = 0, mx2 = 0, amax = 0;
    for (double v : nodal) {
        mn = std::min(mn, v);
        mx2 = std::max(mx2, v);
        amax = std::max(amax, std::abs(v));
    }
    CHECK(mn * mx2 >= -1e-9 * amax * amax);
}

TEST_CASE("drt0 pair is uniformly stable") {
    double prev = 0;
    std::size_t level = 0;
    for (std::size_t n : {2u, 4u, 8u}) {
        const double mu = mu_min_of(gen_crossed(n), FeKind::DRT0);
        CHECK(mu > 0.5); // far from zero: stable pair
        if (level > 0) CHECK(mu >= prev * 0.9);
        prev = mu;
        ++level;
    }
}

TEST_CASE("decay of the inf-sup constant: slope 1 for rt0c, flat for drt0") {
    std::vector<double> hs, betas, betas_drt;
    for (std::size_t n : {2u, 4u, 8u, 16u}) {
        const Mesh mesh = gen_crossed(n);
        hs.push_back(1.0 / double(n));
        betas.push_back(std::sqrt(mu_min_of(mesh, FeKind::RT0C)));
        betas_drt.push_back(std::sqrt(mu_min_of(mesh, FeKind::DRT0)));
    }
    CHECK(fit_log_slope(hs, betas) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::abs(fit_log_slope(hs, betas_drt)) <= 0.1);
    CHECK_THROWS_AS(fit_log_slope({1.0, 0.5}, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("splitting: identity, block diagonality, threshold edge cases") {
    const Mesh mesh = gen_crossed(3);
    MixedOperator op(mesh, FeKind::RT0C);
    const InfSupSpectrum s = infsup_spectrum(op, 0, true);
    const std::size_t nq = s.dim_q;

    const std::vector<double> loads[3] = {
        load_vector(op.q_space, Load::analytic([](double x, double y) {
            const double pi = 3.14159265358979323846;
            return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
        })),
        load_vector(op.q_space, Load::dirac(0.5, 0.5)),
        random_load(op.q_space, 2024),
    };

    for (double mu_t : {0.3, 0.5, 0.7}) {
        const Splitting sp = split(s, mu_t);
        for (const auto& f : loads) {
            const SplitSolution ss = solve_split(op, s, sp, f);
            const MixedSolution direct = solve_dual_mixed(op, f);

            // sigma1 + sigma2 = sigma_h and u1 + u2 = u_h
            double du2 = 0, nds = 0;
            std::vector<double> usum(nq);
            for (std::size_t i = 0; i < nq; ++i) usum[i] = ss.u1[i] + ss.u2[i] - direct.u[i];
            std::vector<double> mu2(nq);
            op.m.matvec(usum.data(), mu2.data());
            du2 = std::sqrt(std::abs(kern::dot(mu2.data(), usum.data(), nq)));

            const std::size_t nv = op.v_space.dof_count();
            std::vector<double> ssum(nv);
            for (std::size_t i = 0; i < nv; ++i) ssum[i] = ss.sigma1[i] + ss.sigma2[i] - direct.sigma[i];
            std::vector<double> as(nv);
            op.a.matvec(ssum.data(), as.data());
            nds = std::sqrt(std::abs(kern::dot(as.data(), ssum.data(), nv)));

            CHECK(du2 + nds <= 1e-8);
        }

        // assembled spectral blocks are diagonal with entries mu_i (A) and -mu_i (B)
        const SplitSolution ss = solve_split(op, s, sp, loads[0]);
        auto check_block = [&](const DenseMatrix& a_blk, const DenseMatrix& b_blk, std::size_t base) {
            for (std::size_t i = 0; i < a_blk.rows(); ++i)
                for (std::size_t j = 0; j < a_blk.cols(); ++j) {
                    const double want = (i == j) ? s.mu[base + i] : 0.0;
                    CHECK(std::abs(a_blk(i, j) - want) <= 1e-9);
                    CHECK(std::abs(b_blk(i, j) + want) <= 1e-9);
                }
        };
        check_block(ss.a11, ss.b11, 0);
        check_block(ss.a22, ss.b22, sp.n_stable);
    }

    // a threshold below every eigenvalue leaves the second block empty
    const Splitting all_stable = split(s, 1e-6 + 0.0);
    CHECK(all_stable.n_stable == nq);
    const SplitSolution ss = solve_split(op, s, all_stable, loads[2]);
    const MixedSolution direct = solve_dual_mixed(op, loads[2]);
    for (std::size_t i = 0; i < nq; ++i) {
        CHECK(ss.u2[i] == 0.0);
        CHECK(ss.u1[i] == doctest::Approx(direct.u[i]).epsilon(1e-8).scale(1.0));
    }
    CHECK_THROWS_AS(split(s, 1.5), std::invalid_argument);
}

TEST_CASE("representation reproduces both the mixed and the galerkin solution") {
    const Mesh mesh = gen_right(4);
    MixedOperator op(mesh, FeKind::RT0C);
    const InfSupSpectrum s = infsup_spectrum(op, 0, false);
    SparseCholesky mchol(op.m);

    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const auto f = random_load(op.q_space, seed);
        const Representation rep = representation(s, f);
        const MixedSolution direct = solve_dual_mixed(op, f);
        const auto ug = mchol.solve(f);

        const std::size_t nq = s.dim_q;
        std::vector<double> d1(nq), d2(nq), t(nq);
        for (std::size_t i = 0; i < nq; ++i) {
            d1[i] = rep.u_mixed[i] - direct.u[i];
            d2[i] = rep.u_galerkin[i] - ug[i];
        }
        op.m.matvec(d1.data(), t.data());
        CHECK(std::sqrt(std::abs(kern::dot(t.data(), d1.data(), nq))) <= 1e-8);
        op.m.matvec(d2.data(), t.data());
        CHECK(std::sqrt(std::abs(kern::dot(t.data(), d2.data(), nq))) <= 1e-8);
    }

    SUBCASE("zero load gives zero coefficients") {
        const Representation rep = representation(s, std::vector<double>(s.dim_q, 0.0));
        for (double a : rep.alpha) CHECK(a == 0.0);
        for (double v : rep.u_mixed) CHECK(v == 0.0);
    }
}

TEST_CASE("alpha coefficients localize by load smoothness") {
    const Mesh mesh = gen_crossed(6);
    MixedOperator op(mesh, FeKind::RT0C);
    const InfSupSpectrum s = infsup_spectrum(op, 0, false);
    const std::size_t n = s.dim_q;
    const std::size_t half = n / 2;

    auto max_abs_range = [](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
        double m = 0;
        for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    };

    // smooth load: coefficients concentrate on the low (stable) end
    const double pi = 3.14159265358979323846;
    const auto fs = load_vector(op.q_space, Load::analytic([pi](double x, double y) {
        return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
    }));
    const Representation smooth = representation(s, fs);
    CHECK(max_abs_range(smooth.alpha, half, n) < 0.01 * max_abs_range(smooth.alpha, 0, n));

    // dirac load: visible coefficients in the upper end of the spectrum
    const auto fd = load_vector(op.q_space, Load::dirac(0.5, 0.5));
    const Representation rough = representation(s, fd);
    CHECK(max_abs_range(rough.alpha, half, n) > 0.1 * max_abs_range(rough.alpha, 0, n));
}

TEST_CASE("p1-p0 pairing: known right-mesh values and decay") {
    CHECK(p1p0_infsup(gen_right(2)).nu_min == doctest::Approx(0.66666667).epsilon(1e-6));
    CHECK(p1p0_infsup(gen_right(8)).nu_min == doctest::Approx(0.11409783).epsilon(1e-6));

    std::vector<double> hs, nus;
    for (std::size_t n : {8u, 16u, 32u}) {
        hs.push_back(1.0 / double(n));
        nus.push_back(p1p0_infsup(gen_right(n)).nu_min);
    }
    CHECK(fit_log_slope(hs, nus) == doctest::Approx(2.0).epsilon(0.15));

    // worst function: sign normalization puts the peak positive
    const P1P0Result r = p1p0_infsup(gen_right(8));
    double best = 0;
    for (double v : r.w)
        if (std::abs(v) > std::abs(best)) best = v;
    CHECK(best > 0.0);
}

TEST_CASE("laplace eigenpairs") {
    const Mesh mesh = gen_crossed(32);
    const LaplaceEigs le = laplace_eigenpairs(mesh, 3);
    const double pi = 3.14159265358979323846;
    CHECK(le.lambda[0] == doctest::Approx(2 * pi * pi).epsilon(0.02)); // converges from above
    CHECK(le.lambda[0] >= 2 * pi * pi - 1e-9);
    CHECK(le.lambda[0] < le.lambda[1]);

    // orthogonality in both inner products
    FeSpace q(FeKind::P1C0, mesh);
    const Csr k = stiffness_p1(q);
    const Csr m1 = mass_p1(q);
    const std::size_t nq = q.dof_count();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            std::vector<double> wi(nq), wj(nq), t(nq);
            for (std::size_t kk = 0; kk < nq; ++kk) {
                wi[kk] = le.w(kk, i);
                wj[kk] = le.w(kk, j);
            }
            k.matvec(wi.data(), t.data());
            CHECK(std::abs(kern::dot(t.data(), wj.data(), nq)) <= 1e-9 * le.lambda[i]);
            m1.matvec(wi.data(), t.data());
            CHECK(std::abs(kern::dot(t.data(), wj.data(), nq)) <= 1e-9);
        }
}

TEST_CASE("stable low modes keep a uniform witness ratio; the worst mode does not") {
    const Mesh m1 = gen_crossed(4), m2 = gen_crossed(8), m3 = gen_crossed(16);
    const std::vector<const Mesh*> levels = {&m1, &m2, &m3};

    SUBCASE("first mode") {
        const auto rows = stable_subspace_check(levels, {1});
        REQUIRE(rows.size() == 3);
        double lo = rows[0].ratio, hi = rows[0].ratio;
        for (const auto& r : rows) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
            CHECK(r.ratio > 0.0);
        }
        CHECK((hi - lo) / hi < 0.2); // varies < 20% across levels
    }
    SUBCASE("combination of two modes stays bounded below") {
        const auto rows = stable_subspace_check(levels, {1, 2});
        for (const auto& r : rows) CHECK(r.ratio > 0.1);
    }
    SUBCASE("the worst eigenfunction ratio collapses like beta_h") {
        // contrast case: the witness of the last inf-sup eigenpair achieves
        // exactly sqrt(mu_min), which decays with the mesh
        for (const Mesh* mp : levels) {
            MixedOperator op(*mp, FeKind::RT0C);
            const InfSupSpectrum s = infsup_spectrum(op, 1, true);
            const std::size_t nq = s.dim_q, nv = op.v_space.dof_count();
            std::vector<double> x(nq), y(nv), by(nq), ay(nv);
            for (std::size_t i = 0; i < nq; ++i) x[i] = s.u(i, 0);
            for (std::size_t i = 0; i < nv; ++i) y[i] = s.sigma(i, 0);
            op.b.matvec(y.data(), by.data());
            op.a.matvec(y.data(), ay.data());
            const double num = std::abs(kern::dot(by.data(), x.data(), nq));
            const double den = std::sqrt(kern::dot(ay.data(), y.data(), nv)); // ||grad u|| = 1
            CHECK(num / den == doctest::Approx(s.beta_h).epsilon(1e-7));
        }
    }
}

TEST_CASE("galerkin equivalence for drt0: u_h = u_G and sigma_h = -grad u_G") {
    for (auto maker : {+[] { return gen_crossed(3); }, +[] { return gen_right(4); },
                       +[] { return oracle::make_unstructured_square(4, 8); }}) {
        const Mesh mesh = maker();
        MixedOperator op(mesh, FeKind::DRT0);
        const auto f = load_vector(op.q_space, Load::analytic([](double x, double y) {
            return std::sin(2 * x) + y;
        }));
        const MixedSolution mix = solve_dual_mixed(op, f);
        SparseCholesky mchol(op.m);
        const auto ug = mchol.solve(f);

        // H1 distance between u_h and u_G
        const std::size_t nq = op.q_space.dof_count();
        std::vector<double> d(nq), t(nq);
        for (std::size_t i = 0; i < nq; ++i) d[i] = mix.u[i] - ug[i];
        op.m.matvec(d.data(), t.data());
        CHECK(std::sqrt(std::abs(kern::dot(t.data(), d.data(), nq))) <= 1e-9);

        // sigma_h + grad u_G = 0 elementwise
        const auto ug_nodal = expand_p1c0(op.q_space, ug);
        for (std::size_t tt = 0; tt < mesh.n_triangles(); ++tt) {
            const Vec2 g = p1_gradient(mesh, ug_nodal, tt);
            const auto c = mesh.tri_centroid(tt);
            Vec2 sh{0, 0};
            for (int le = 0; le < 3; ++le) {
                const Vec2 eta = rt0_local(mesh, tt, le, c[0], c[1]);
                sh[0] += mix.sigma[3 * tt + le] * eta[0];
                sh[1] += mix.sigma[3 * tt + le] * eta[1];
            }
            CHECK(std::abs(sh[0] + g[0]) <= 1e-9);
            CHECK(std::abs(sh[1] + g[1]) <= 1e-9);
        }
    }
}
