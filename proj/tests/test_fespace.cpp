#include "doctest.h"

#include "mixlab/assembly.hpp"
#include "mixlab/fespace.hpp"
#include "mixlab/solvers.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace mixlab;

namespace {

// single reference triangle (0,0)-(1,0)-(0,1)
Mesh reference_triangle() {
    return make_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, DomainTag::Imported);
}

double factorial(int k) { return k <= 1 ? 1.0 : k * factorial(k - 1); }

// integral of x^p y^q over the reference triangle
double monomial_integral(int p, int q) { return factorial(p) * factorial(q) / factorial(p + q + 2); }

} // namespace

TEST_CASE("quadrature rules: weights sum to 1 and match stated degrees") {
    const Mesh ref = reference_triangle();
    for (const QuadratureRule* rule : {&QuadratureRule::triangle_deg2(), &QuadratureRule::triangle_deg5()}) {
        double wsum = 0;
        for (const auto& nd : rule->nodes) wsum += nd.w;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int p = 0; p <= rule->degree; ++p)
            for (int q = 0; p + q <= rule->degree; ++q) {
                double integral = 0;
                for (const auto& nd : rule->nodes) {
                    const double x = nd.l1, y = nd.l2; // reference coordinates
                    integral += 0.5 * nd.w * std::pow(x, p) * std::pow(y, q);
                }
                CHECK(integral == doctest::Approx(monomial_integral(p, q)).epsilon(1e-13));
            }
    }
    // edge rules integrate polynomials on [0,1]
    for (const EdgeQuadrature* eq : {&EdgeQuadrature::gauss2(), &EdgeQuadrature::gauss5()}) {
        double wsum = 0;
        for (const auto& nd : eq->nodes) wsum += nd[1];
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    }
    for (int p = 0; p <= 9; ++p) {
        double integral = 0;
        for (const auto& nd : EdgeQuadrature::gauss5().nodes) integral += nd[1] * std::pow(nd[0], p);
        CHECK(integral == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
}

TEST_CASE("dof counts per kind") {
    const Mesh m = gen_crossed(2);
    CHECK(FeSpace(FeKind::P1C, m).dof_count() == 13);
    CHECK(FeSpace(FeKind::P1C0, m).dof_count() == 5); // interior vertices only
    CHECK(FeSpace(FeKind::P0, m).dof_count() == 16);
    CHECK(FeSpace(FeKind::RT0C, m).dof_count() == m.n_edges());
    CHECK(FeSpace(FeKind::DRT0, m).dof_count() == 48);
}

TEST_CASE("p1 hats: kronecker property and partition of unity") {
    const Mesh m = oracle::make_unstructured_square(3, 7);
    FeSpace p1(FeKind::P1C, m);
    for (std::size_t t = 0; t < m.n_triangles(); ++t) {
        for (int i = 0; i < 3; ++i) {
            const auto& vi = m.vertices[m.triangles[t][i]];
            const BasisValues bv = eval_basis(p1, t, vi[0], vi[1]);
            for (int j = 0; j < 3; ++j) CHECK(bv.scalar[j] == doctest::Approx(i == j ? 1.0 : 0.0));
        }
        const auto c = m.tri_centroid(t);
        const BasisValues bv = eval_basis(p1, t, c[0], c[1]);
        CHECK(bv.scalar[0] + bv.scalar[1] + bv.scalar[2] == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_WITH_AS(eval_basis(p1, 0, 17.0, 17.0), doctest::Contains("outside"), std::runtime_error);
}

TEST_CASE("rt0c basis: unit flux across its edge, zero across the others") {
    for (std::uint64_t seed : {1ull, 5ull, 9ull}) {
        const Mesh m = oracle::make_unstructured_square(2, seed);
        FeSpace rt(FeKind::RT0C, m);
        const auto& eq = EdgeQuadrature::gauss5();
        // flux of every basis function across every edge
        std::vector<double> coeffs(m.n_edges(), 0.0);
        for (std::size_t e = 0; e < m.n_edges(); ++e) {
            coeffs.assign(m.n_edges(), 0.0);
            coeffs[e] = 1.0;
            for (std::size_t e2 = 0; e2 < m.n_edges(); ++e2) {
                const auto& a = m.vertices[m.edges[e2][0]];
                const auto& b = m.vertices[m.edges[e2][1]];
                const auto n = m.edge_normal(e2);
                const double len = m.edge_length(e2);
                // evaluate from an adjacent triangle (the trace is single-valued)
                const std::size_t t =
                    m.edge_tris[e2][0] != Mesh::npos ? m.edge_tris[e2][0] : m.edge_tris[e2][1];
                double flux = 0;
                for (const auto& nd : eq.nodes) {
                    const double x = a[0] + nd[0] * (b[0] - a[0]);
                    const double y = a[1] + nd[0] * (b[1] - a[1]);
                    const Vec2 v = rt0c_value(m, coeffs, t, x, y);
                    flux += nd[1] * (v[0] * n[0] + v[1] * n[1]);
                }
                flux *= len;
                CHECK(flux == doctest::Approx(e == e2 ? 1.0 : 0.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rt0 divergence is the signed inverse area") {
    const Mesh m = gen_right(2);
    for (std::size_t e = 0; e < m.n_edges(); ++e) {
        std::vector<double> coeffs(m.n_edges(), 0.0);
        coeffs[e] = 1.0;
        const auto& et = m.edge_tris[e];
        if (et[0] != Mesh::npos) // plus side: div = +1/|T|
            CHECK(rt0c_div(m, coeffs, et[0]) == doctest::Approx(1.0 / m.tri_area(et[0])).epsilon(1e-13));
        if (et[1] != Mesh::npos) // minus side: div = -1/|T|
            CHECK(rt0c_div(m, coeffs, et[1]) == doctest::Approx(-1.0 / m.tri_area(et[1])).epsilon(1e-13));
    }
}

TEST_CASE("rt0 interpolation") {
    SUBCASE("constant fields are reproduced exactly") {
        const Mesh m = oracle::make_unstructured_square(3, 4);
        FeSpace rt(FeKind::RT0C, m);
        const auto coeffs = interpolate_rt0(rt, [](double, double) -> Vec2 { return {1.0, 0.0}; });
        for (std::size_t t = 0; t < m.n_triangles(); ++t) {
            const auto c = m.tri_centroid(t);
            for (const auto& pt : {std::array<double, 2>{c[0], c[1]},
                                   std::array<double, 2>{0.7 * c[0] + 0.3 * m.vertices[m.triangles[t][0]][0],
                                                         0.7 * c[1] + 0.3 * m.vertices[m.triangles[t][0]][1]}}) {
                const Vec2 v = rt0c_value(m, coeffs, t, pt[0], pt[1]);
                CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(v[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("divergence-free fields interpolate to divergence-free") {
        const Mesh m = oracle::make_unstructured_square(3, 11);
        FeSpace rt(FeKind::RT0C, m);
        // (f(y), g(x)) is solenoidal; the interpolant's divergence is the P0
        // projection of the exact (zero) divergence. Polynomial components
        // keep the edge-flux quadrature exact.
        const auto sol = interpolate_rt0(rt, [](double x, double y) -> Vec2 {
            return {y * y * y - 2.0 * y + 1.0, x * x * x * x + 0.5 * x};
        });
        for (std::size_t t = 0; t < m.n_triangles(); ++t) CHECK(std::abs(rt0c_div(m, sol, t)) <= 1e-12);
    }
    SUBCASE("gradient fields interpolate at first order") {
        auto field = [](double x, double y) -> Vec2 {
            const double pi = 3.14159265358979323846;
            return {pi * std::cos(pi * x) * std::sin(2 * pi * y), 2 * pi * std::sin(pi * x) * std::cos(2 * pi * y)};
        };
        double prev_err = 0;
        std::vector<double> errs;
        for (std::size_t n : {8u, 16u, 32u}) {
            const Mesh m = gen_crossed(n);
            FeSpace rt(FeKind::RT0C, m);
            const auto coeffs = interpolate_rt0(rt, field);
            // L2 error by the degree-5 rule
            const auto& rule = QuadratureRule::triangle_deg5();
            double err2 = 0;
            for (std::size_t t = 0; t < m.n_triangles(); ++t) {
                const auto& tr = m.triangles[t];
                const auto& p0 = m.vertices[tr[0]];
                const auto& p1 = m.vertices[tr[1]];
                const auto& p2 = m.vertices[tr[2]];
                for (const auto& nd : rule.nodes) {
                    const double x = nd.l0 * p0[0] + nd.l1 * p1[0] + nd.l2 * p2[0];
                    const double y = nd.l0 * p0[1] + nd.l1 * p1[1] + nd.l2 * p2[1];
                    const Vec2 ex = field(x, y);
                    const Vec2 ap = rt0c_value(m, coeffs, t, x, y);
                    err2 += nd.w * m.tri_area(t) * ((ex[0] - ap[0]) * (ex[0] - ap[0]) + (ex[1] - ap[1]) * (ex[1] - ap[1]));
                }
            }
            errs.push_back(std::sqrt(err2));
            if (prev_err > 0) {
                const double rate = std::log2(prev_err / errs.back());
                CHECK(rate == doctest::Approx(1.0).epsilon(0.15));
            }
            prev_err = errs.back();
        }
    }
}

TEST_CASE("p0 projection") {
    SUBCASE("constants and the reference-triangle mean of x") {
        const Mesh ref = reference_triangle();
        const auto c = l2_project_p0(ref, [](double, double) { return 4.5; });
        CHECK(c[0] == doctest::Approx(4.5).epsilon(1e-14));
        const auto px = l2_project_p0(ref, [](double x, double) { return x; });
        CHECK(px[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("projection error law err <= C h ||grad f||") {
        const double pi = 3.14159265358979323846;
        auto f = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
        auto fgrad2 = [pi](double x, double y) {
            const double gx = pi * std::cos(pi * x) * std::sin(pi * y);
            const double gy = pi * std::sin(pi * x) * std::cos(pi * y);
            return gx * gx + gy * gy;
        };
        std::vector<double> hs, errs;
        for (std::size_t n : {4u, 8u, 16u, 32u}) {
            const Mesh m = gen_right(n);
            const auto p = l2_project_p0(m, f, QuadratureRule::triangle_deg5());
            const auto& rule = QuadratureRule::triangle_deg5();
            double err2 = 0, grad2 = 0;
            for (std::size_t t = 0; t < m.n_triangles(); ++t) {
                const auto& tr = m.triangles[t];
                const auto& p0 = m.vertices[tr[0]];
                const auto& p1v = m.vertices[tr[1]];
                const auto& p2 = m.vertices[tr[2]];
                for (const auto& nd : rule.nodes) {
                    const double x = nd.l0 * p0[0] + nd.l1 * p1v[0] + nd.l2 * p2[0];
                    const double y = nd.l0 * p0[1] + nd.l1 * p1v[1] + nd.l2 * p2[1];
                    err2 += nd.w * m.tri_area(t) * (f(x, y) - p[t]) * (f(x, y) - p[t]);
                    grad2 += nd.w * m.tri_area(t) * fgrad2(x, y);
                }
            }
            hs.push_back(m.h_max());
            errs.push_back(std::sqrt(err2) / std::sqrt(grad2));
        }
        // the ratio err/(h ||grad f||) = fitted C stays bounded and stable
        std::vector<double> cs;
        for (std::size_t i = 0; i < hs.size(); ++i) cs.push_back(errs[i] / hs[i]);
        for (double c : cs) {
            CHECK(c > 0.01);
            CHECK(c < 1.0);
        }
        CHECK(*std::max_element(cs.begin(), cs.end()) / *std::min_element(cs.begin(), cs.end()) < 1.5);
    }
}

TEST_CASE("gradients of p1 hats lie in the drt0 span") {
    const Mesh m = oracle::make_unstructured_square(2, 31);
    FeSpace drt(FeKind::DRT0, m);
    FeSpace q(FeKind::P1C0, m);
    const Csr a = mass_rt0(drt);
    const Csr b = coupling_b(drt, q);
    SparseCholesky achol(a);
    // projection of grad phi_q onto DRT0: coefficients z = A^-1 (b row q);
    // zero residual means ||grad phi_q||^2 = z^T A z
    FeSpace p1(FeKind::P1C0, m);
    const Csr k = stiffness_p1(p1);
    for (std::size_t qd = 0; qd < q.dof_count(); ++qd) {
        std::vector<double> rhs(drt.dof_count(), 0.0);
        for (std::size_t kk = b.rowptr[qd]; kk < b.rowptr[qd + 1]; ++kk) rhs[b.col[kk]] = b.val[kk];
        const auto z = achol.solve(rhs);
        double zaz = 0;
        for (std::size_t i = 0; i < z.size(); ++i) zaz += z[i] * rhs[i];
        // zero projection residual: ||grad phi||^2 (stiffness diagonal)
        // equals the energy of the projection
        const double norm2 = k.coeff(qd, qd);
        CHECK(std::abs(zaz - norm2) <= 1e-12 * std::max(1.0, norm2));
    }
}
