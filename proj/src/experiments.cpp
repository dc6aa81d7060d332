#include "mixlab/experiments.hpp"
#include "mixlab/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mixlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const ExactSolution& smooth_square_solution() {
    static const ExactSolution s = [] {
        ExactSolution e;
        e.name = "smooth-square";
        e.u = [](double x, double y) { return std::sin(kPi * x) * std::sin(2.0 * kPi * y); };
        e.grad = [](double x, double y) -> Vec2 {
            return {kPi * std::cos(kPi * x) * std::sin(2.0 * kPi * y),
                    2.0 * kPi * std::sin(kPi * x) * std::cos(2.0 * kPi * y)};
        };
        e.f = [](double x, double y) {
            return 5.0 * kPi * kPi * std::sin(kPi * x) * std::sin(2.0 * kPi * y);
        };
        e.zero_boundary = true;
        return e;
    }();
    return s;
}

const ExactSolution& lshape_singular_solution() {
    static const ExactSolution s = [] {
        ExactSolution e;
        e.name = "lshape-singular";
        auto polar = [](double x, double y) {
            double th = std::atan2(y, x);
            if (th < 0.0) th += 2.0 * kPi; // theta in [0, 3pi/2] on the L-shape
            return std::pair<double, double>(std::hypot(x, y), th);
        };
        e.u = [polar](double x, double y) {
            const auto [r, th] = polar(x, y);
            return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * th / 3.0);
        };
        e.grad = [polar](double x, double y) -> Vec2 {
            const auto [r, th] = polar(x, y);
            if (r < 1e-300) return {0.0, 0.0}; // gradient is singular at the corner
            const double a = 2.0 / 3.0;
            const double dr = a * std::pow(r, a - 1.0) * std::sin(a * th);
            const double dt = a * std::pow(r, a - 1.0) * std::cos(a * th);
            const double c = std::cos(th), sn = std::sin(th);
            return {dr * c - dt * sn, dr * sn + dt * c};
        };
        e.f = nullptr; // harmonic
        e.zero_boundary = false;
        return e;
    }();
    return s;
}

double laplace_fd_residual(const ExactSolution& s, double lo, double hi, int npoints, unsigned seed) {
    unsigned long long state = seed * 2654435761ULL + 1;
    auto rnd = [&]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>((state >> 11) & ((1ULL << 52) - 1)) / static_cast<double>(1ULL << 52);
    };
    const double eps = 1e-5 * (hi - lo);
    double worst = 0.0;
    for (int k = 0; k < npoints; ++k) {
        const double x = lo + (0.05 + 0.9 * rnd()) * (hi - lo);
        const double y = lo + (0.05 + 0.9 * rnd()) * (hi - lo);
        const double lap = (s.u(x + eps, y) + s.u(x - eps, y) + s.u(x, y + eps) + s.u(x, y - eps) -
                            4.0 * s.u(x, y)) /
                           (eps * eps);
        const double f = s.f_at(x, y);
        const double denom = std::max({std::abs(f), std::abs(lap), 1e-8});
        worst = std::max(worst, std::abs(-lap - f) / denom);
    }
    return worst;
}

// ------------------------------------------------------------ case drivers

namespace {

// boundary nodal interpolant of the exact trace (zero at interior vertices)
std::vector<double> boundary_lift(const Mesh& mesh, const ExactSolution* bc) {
    std::vector<double> lift(mesh.n_vertices(), 0.0);
    if (!bc || bc->zero_boundary) return lift;
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.boundary_vertex[v]) lift[v] = bc->u(mesh.vertices[v][0], mesh.vertices[v][1]);
    return lift;
}

} // namespace

std::vector<double> solve_galerkin(const Mesh& mesh, const Load& load, const ExactSolution* bc) {
    FeSpace q(FeKind::P1C0, mesh);
    const Csr k = stiffness_p1(q);
    std::vector<double> rhs = load_vector(q, load);

    const std::vector<double> lift = boundary_lift(mesh, bc);
    bool lifted = false;
    for (double v : lift)
        if (v != 0.0) lifted = true;
    if (lifted) {
        // rhs -= K_full * lift restricted to interior rows
        FeSpace p1(FeKind::P1C, mesh);
        const Csr kf = stiffness_p1(p1);
        const std::vector<double> klift = kf.matvec(lift);
        for (std::size_t d = 0; d < q.dof_count(); ++d) rhs[d] -= klift[q.dof_vertex(d)];
    }

    SparseCholesky chol(k);
    std::vector<double> uq = chol.solve(rhs);
    std::vector<double> nodal = expand_p1c0(q, uq);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) nodal[v] += lift[v];
    return nodal;
}

CaseSolution solve_poisson_case(const Mesh& mesh, FeKind v_kind, const Load& load,
                                const ExactSolution* bc, bool with_galerkin,
                                const SaddleOptions& opts) {
    MixedOperator op(mesh, v_kind);
    const std::size_t nv = op.v_space.dof_count();
    const std::size_t nq = op.q_space.dof_count();

    SaddleSystem sys;
    sys.A = &op.a;
    sys.B = &op.b;
    sys.f.assign(nv, 0.0);
    std::vector<double> f_load = load_vector(op.q_space, load);
    sys.g.resize(nq);
    for (std::size_t i = 0; i < nq; ++i) sys.g[i] = -f_load[i];

    const std::vector<double> lift = boundary_lift(mesh, bc);
    bool lifted = false;
    for (double v : lift)
        if (v != 0.0) lifted = true;
    if (lifted) {
        // first block gains -(tau, grad u_lift)
        FeSpace p1(FeKind::P1C, mesh);
        const Csr bf = coupling_b(op.v_space, p1);
        std::vector<double> blift(nv);
        bf.matvec_transpose(lift.data(), blift.data());
        for (std::size_t i = 0; i < nv; ++i) sys.f[i] -= blift[i];
    }

    SaddleOptions o = opts;
    if (!o.precond) o.precond = &op.m;
    SaddleResult r = solve_saddle(sys, o);

    CaseSolution out;
    out.v_kind = v_kind;
    out.sigma = std::move(r.y);
    out.u_nodal = expand_p1c0(op.q_space, r.x);
    for (std::size_t v = 0; v < mesh.n_vertices(); ++v) out.u_nodal[v] += lift[v];
    out.res_y = r.res_y;
    out.res_x = r.res_x;
    if (with_galerkin) out.u_galerkin_nodal = solve_galerkin(mesh, load, bc);
    return out;
}

// ------------------------------------------------------------ error norms

SigmaEval make_rt0c_eval(const Mesh& mesh, const std::vector<double>& coeffs) {
    return [&mesh, coeffs](std::size_t t, double x, double y) { return rt0c_value(mesh, coeffs, t, x, y); };
}

SigmaEval make_drt0_eval(const Mesh& mesh, const std::vector<double>& coeffs) {
    return [&mesh, coeffs](std::size_t t, double x, double y) -> Vec2 {
        Vec2 v{0.0, 0.0};
        for (int le = 0; le < 3; ++le) {
            const Vec2 eta = rt0_local(mesh, t, le, x, y);
            const double c = coeffs[3 * t + static_cast<std::size_t>(le)];
            v[0] += c * eta[0];
            v[1] += c * eta[1];
        }
        return v;
    };
}

ErrorNorms error_norms(const Mesh& mesh, const SigmaEval& sigma_h, const std::vector<double>& u_nodal,
                       const ExactSolution& exact) {
    const auto& rule = QuadratureRule::triangle_deg5();
    ErrorNorms out;
    double se = 0.0, ue = 0.0, ge = 0.0;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const auto& p0 = mesh.vertices[tr[0]];
        const auto& p1 = mesh.vertices[tr[1]];
        const auto& p2 = mesh.vertices[tr[2]];
        const double area = mesh.tri_area(t);
        const Vec2 gh = p1_gradient(mesh, u_nodal, t);
        for (const auto& nd : rule.nodes) {
            const double x = nd.l0 * p0[0] + nd.l1 * p1[0] + nd.l2 * p2[0];
            const double y = nd.l0 * p0[1] + nd.l1 * p1[1] + nd.l2 * p2[1];
            const double w = nd.w * area;
            const Vec2 gex = exact.grad(x, y);
            const Vec2 sh = sigma_h(t, x, y);
            // sigma = -grad u
            const double dx = -gex[0] - sh[0], dy = -gex[1] - sh[1];
            se += w * (dx * dx + dy * dy);
            const double du = exact.u(x, y) -
                              (nd.l0 * u_nodal[tr[0]] + nd.l1 * u_nodal[tr[1]] + nd.l2 * u_nodal[tr[2]]);
            ue += w * du * du;
            const double gx = gex[0] - gh[0], gy = gex[1] - gh[1];
            ge += w * (gx * gx + gy * gy);
        }
    }
    out.sigma_err = std::sqrt(se);
    out.u_l2 = std::sqrt(ue);
    out.u_h1 = std::sqrt(ge);
    return out;
}

// ------------------------------------------------------------ convergence

Mesh make_family_mesh(MeshFamily fam, std::size_t n) {
    switch (fam) {
        case MeshFamily::Crossed:
            return gen_crossed(n);
        case MeshFamily::Right:
            return gen_right(n);
        case MeshFamily::Lshape:
            return gen_lshape(n);
    }
    throw std::invalid_argument("make_family_mesh: unknown family");
}

ConvergenceResult convergence_study(const ConvergenceConfig& cfg) {
    const bool smooth = (cfg.case_name == "smooth-square");
    if (!smooth && cfg.case_name != "lshape-singular")
        throw std::invalid_argument("convergence_study: unknown case " + cfg.case_name);
    const ExactSolution& exact = smooth ? smooth_square_solution() : lshape_singular_solution();
    const MeshFamily fam = smooth ? MeshFamily::Crossed : MeshFamily::Lshape;

    std::vector<Mesh> level_meshes;
    for (const Mesh& m : cfg.meshes) level_meshes.push_back(m);
    for (const std::string& path : cfg.mesh_files)
        level_meshes.push_back(import_mesh(path, MeshFormat::InternalJson));
    const bool explicit_meshes = !level_meshes.empty();
    const std::size_t nlevels = explicit_meshes ? level_meshes.size() : cfg.levels;

    ConvergenceResult res;
    std::vector<double> hs, es, el, eg;

    std::size_t n = cfg.base_n;
    for (std::size_t lvl = 0; lvl < nlevels; ++lvl, n *= 2) {
        const Mesh mesh = explicit_meshes ? std::move(level_meshes[lvl]) : make_family_mesh(fam, n);
        const Load load = exact.f ? Load::analytic(exact.f) : Load::analytic([](double, double) { return 0.0; });
        const ExactSolution* bc = exact.zero_boundary ? nullptr : &exact;
        CaseSolution sol = solve_poisson_case(mesh, cfg.v_kind, load, bc, false);

        const SigmaEval ev = (cfg.v_kind == FeKind::RT0C) ? make_rt0c_eval(mesh, sol.sigma)
                                                          : make_drt0_eval(mesh, sol.sigma);
        const ErrorNorms e = error_norms(mesh, ev, sol.u_nodal, exact);

        ConvergenceRow row;
        row.dofs = ((cfg.v_kind == FeKind::RT0C) ? mesh.n_edges() : 3 * mesh.n_triangles()) + mesh.n_vertices();
        row.h = explicit_meshes ? mesh.h_max() : 1.0 / static_cast<double>(n);
        row.sigma_err = e.sigma_err;
        row.u_l2_err = e.u_l2;
        row.u_h1_err = e.u_h1;
        if (!res.rows.empty()) {
            const ConvergenceRow& prev = res.rows.back();
            const double lh = std::log(prev.h / row.h);
            row.sigma_rate = std::log(prev.sigma_err / row.sigma_err) / lh;
            row.u_l2_rate = std::log(prev.u_l2_err / row.u_l2_err) / lh;
            row.u_h1_rate = std::log(prev.u_h1_err / row.u_h1_err) / lh;
            row.has_rates = true;
        }
        res.rows.push_back(row);
        hs.push_back(row.h);
        es.push_back(e.sigma_err);
        el.push_back(e.u_l2);
        eg.push_back(e.u_h1);
    }

    const std::size_t nfit = std::min<std::size_t>(3, hs.size());
    if (nfit >= 3) {
        std::vector<double> h3(hs.end() - nfit, hs.end());
        auto tail = [&](const std::vector<double>& v) { return std::vector<double>(v.end() - nfit, v.end()); };
        res.rate_sigma = fit_log_slope(h3, tail(es));
        res.rate_l2 = fit_log_slope(h3, tail(el));
        res.rate_h1 = fit_log_slope(h3, tail(eg));
    }
    return res;
}

// ------------------------------------------------------------ demo

double oscillation_index(const Mesh& mesh, const std::vector<double>& u_nodal,
                         const std::vector<double>& u_galerkin_nodal) {
    FeSpace p1(FeKind::P1C, mesh);
    const Csr k = stiffness_p1(p1);
    const Csr m = mass_p1(p1);
    const std::size_t n = mesh.n_vertices();
    std::vector<double> d(n), kg(n), mg(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = u_nodal[i] - u_galerkin_nodal[i];
    auto h1norm2 = [&](const std::vector<double>& v) {
        k.matvec(v.data(), kg.data());
        m.matvec(v.data(), mg.data());
        return kern::dot(kg.data(), v.data(), n) + kern::dot(mg.data(), v.data(), n);
    };
    const double nd = std::sqrt(h1norm2(d));
    const double ng = std::sqrt(h1norm2(u_galerkin_nodal));
    return nd / std::max(ng, 1e-300);
}

std::vector<DemoRow> spurious_demo(MeshFamily fam, std::size_t base_n, std::size_t levels,
                                   const Load& load, FeKind v_kind) {
    std::vector<DemoRow> rows;
    std::size_t n = base_n;
    for (std::size_t lvl = 0; lvl < levels; ++lvl, n *= 2) {
        const Mesh mesh = make_family_mesh(fam, n);
        CaseSolution sol = solve_poisson_case(mesh, v_kind, load, nullptr, true);
        DemoRow row;
        row.level = lvl + 1;
        row.h = 1.0 / static_cast<double>(n);
        row.dofs = ((v_kind == FeKind::RT0C) ? mesh.n_edges() : 3 * mesh.n_triangles()) + mesh.n_vertices();
        row.osc_index = oscillation_index(mesh, sol.u_nodal, sol.u_galerkin_nodal);
        rows.push_back(row);
    }
    return rows;
}

} // namespace mixlab
