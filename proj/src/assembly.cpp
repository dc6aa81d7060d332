#include "mixlab/assembly.hpp"

#include <stdexcept>

namespace mixlab {

namespace {

struct QuadPoint {
    double x, y, w; // physical coordinates, weight scaled by |T|
};

// physical quadrature points of the default degree-2 rule on triangle t
std::array<QuadPoint, 3> quad_points(const Mesh& mesh, std::size_t t) {
    const auto& r = QuadratureRule::triangle_deg2();
    const auto& tr = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tr[0]];
    const auto& p1 = mesh.vertices[tr[1]];
    const auto& p2 = mesh.vertices[tr[2]];
    const double area = mesh.tri_area(t);
    std::array<QuadPoint, 3> out;
    for (int k = 0; k < 3; ++k) {
        const auto& nd = r.nodes[k];
        out[k] = {nd.l0 * p0[0] + nd.l1 * p1[0] + nd.l2 * p2[0],
                  nd.l0 * p0[1] + nd.l1 * p1[1] + nd.l2 * p2[1], nd.w * area};
    }
    return out;
}

void require_kind(const FeSpace& s, std::initializer_list<FeKind> kinds, const char* where) {
    for (FeKind k : kinds)
        if (s.kind() == k) return;
    throw std::invalid_argument(std::string(where) + ": unsupported space kind");
}

void require_same_mesh(const FeSpace& a, const FeSpace& b, const char* where) {
    if (&a.mesh() != &b.mesh()) throw std::invalid_argument(std::string(where) + ": spaces on different meshes");
}

} // namespace

Csr mass_rt0(const FeSpace& v_space) {
    require_kind(v_space, {FeKind::RT0C, FeKind::DRT0}, "mass_rt0");
    const Mesh& mesh = v_space.mesh();
    TripletList trip;
    trip.reserve(9 * mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto qp = quad_points(mesh, t);
        // local basis values at the three quadrature points
        Vec2 psi[3][3];
        for (int k = 0; k < 3; ++k) {
            const BasisValues bv = eval_basis(v_space, t, qp[k].x, qp[k].y);
            for (int i = 0; i < 3; ++i) psi[k][i] = bv.vec[i];
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double v = 0.0;
                for (int k = 0; k < 3; ++k)
                    v += qp[k].w * (psi[k][i][0] * psi[k][j][0] + psi[k][i][1] * psi[k][j][1]);
                trip.add(v_space.cell_dof(t, i), v_space.cell_dof(t, j), v);
            }
    }
    Csr m = trip.to_csr(v_space.dof_count(), v_space.dof_count());
    csr_mark_symmetric(m);
    return m;
}

Csr coupling_b(const FeSpace& v_space, const FeSpace& q_space) {
    require_kind(v_space, {FeKind::RT0C, FeKind::DRT0}, "coupling_b");
    require_kind(q_space, {FeKind::P1C0, FeKind::P1C}, "coupling_b");
    require_same_mesh(v_space, q_space, "coupling_b");
    const Mesh& mesh = v_space.mesh();
    TripletList trip;
    trip.reserve(9 * mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto qp = quad_points(mesh, t);
        const auto grads = p1_gradients(mesh, t);
        Vec2 psi[3][3];
        for (int k = 0; k < 3; ++k) {
            const BasisValues bv = eval_basis(v_space, t, qp[k].x, qp[k].y);
            for (int i = 0; i < 3; ++i) psi[k][i] = bv.vec[i];
        }
        for (int q = 0; q < 3; ++q) {
            const std::size_t qd = q_space.cell_dof(t, q);
            if (qd == Mesh::npos) continue;
            for (int v = 0; v < 3; ++v) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k)
                    s += qp[k].w * (psi[k][v][0] * grads[q][0] + psi[k][v][1] * grads[q][1]);
                trip.add(qd, v_space.cell_dof(t, v), s);
            }
        }
    }
    return trip.to_csr(q_space.dof_count(), v_space.dof_count());
}

Csr stiffness_p1(const FeSpace& q_space) {
    require_kind(q_space, {FeKind::P1C0, FeKind::P1C}, "stiffness_p1");
    const Mesh& mesh = q_space.mesh();
    TripletList trip;
    trip.reserve(9 * mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto grads = p1_gradients(mesh, t);
        const double area = mesh.tri_area(t);
        for (int i = 0; i < 3; ++i) {
            const std::size_t di = q_space.cell_dof(t, i);
            if (di == Mesh::npos) continue;
            for (int j = 0; j < 3; ++j) {
                const std::size_t dj = q_space.cell_dof(t, j);
                if (dj == Mesh::npos) continue;
                trip.add(di, dj, area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]));
            }
        }
    }
    Csr m = trip.to_csr(q_space.dof_count(), q_space.dof_count());
    csr_mark_symmetric(m);
    return m;
}

Csr mass_p1(const FeSpace& q_space) {
    require_kind(q_space, {FeKind::P1C0, FeKind::P1C}, "mass_p1");
    const Mesh& mesh = q_space.mesh();
    TripletList trip;
    trip.reserve(9 * mesh.n_triangles());
    const auto& r = QuadratureRule::triangle_deg2();
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const double area = mesh.tri_area(t);
        for (int i = 0; i < 3; ++i) {
            const std::size_t di = q_space.cell_dof(t, i);
            if (di == Mesh::npos) continue;
            for (int j = 0; j < 3; ++j) {
                const std::size_t dj = q_space.cell_dof(t, j);
                if (dj == Mesh::npos) continue;
                double v = 0.0;
                for (const auto& nd : r.nodes) {
                    const double li = (i == 0 ? nd.l0 : i == 1 ? nd.l1 : nd.l2);
                    const double lj = (j == 0 ? nd.l0 : j == 1 ? nd.l1 : nd.l2);
                    v += nd.w * li * lj;
                }
                trip.add(di, dj, area * v);
            }
        }
    }
    Csr m = trip.to_csr(q_space.dof_count(), q_space.dof_count());
    csr_mark_symmetric(m);
    return m;
}

Csr mass_p0(const Mesh& mesh) {
    TripletList trip;
    trip.reserve(mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) trip.add(t, t, mesh.tri_area(t));
    Csr m = trip.to_csr(mesh.n_triangles(), mesh.n_triangles());
    m.symmetric = true;
    return m;
}

Csr div_rt0_p0(const FeSpace& rt0c, const Mesh& mesh) {
    require_kind(rt0c, {FeKind::RT0C}, "div_rt0_p0");
    TripletList trip;
    trip.reserve(3 * mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t)
        for (int le = 0; le < 3; ++le) {
            const auto& te = mesh.tri_edges[t][le];
            // (div psi_E, chi_T) = sign * (1/|T|) * |T|
            trip.add(t, te.edge, static_cast<double>(te.sign));
        }
    return trip.to_csr(mesh.n_triangles(), mesh.n_edges());
}

Csr coupling_p1_p0(const FeSpace& q_space, const Mesh& mesh) {
    require_kind(q_space, {FeKind::P1C0, FeKind::P1C}, "coupling_p1_p0");
    TripletList trip;
    trip.reserve(3 * mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const double third = mesh.tri_area(t) / 3.0;
        for (int i = 0; i < 3; ++i) {
            const std::size_t di = q_space.cell_dof(t, i);
            if (di == Mesh::npos) continue;
            trip.add(di, t, third);
        }
    }
    return trip.to_csr(q_space.dof_count(), mesh.n_triangles());
}

std::vector<double> load_vector(const FeSpace& space, const Load& load) {
    const Mesh& mesh = space.mesh();
    std::vector<double> out(space.dof_count(), 0.0);

    if (load.kind == Load::Kind::DiracApprox) {
        const std::size_t t0 = mesh.locate(load.point[0], load.point[1]); // throws if outside
        const double inv_area = 1.0 / mesh.tri_area(t0);
        if (space.kind() == FeKind::P0) {
            out[t0] = 1.0; // (1/|T|, chi_T) = 1
        } else {
            require_kind(space, {FeKind::P1C0, FeKind::P1C}, "load_vector");
            for (int i = 0; i < 3; ++i) {
                const std::size_t d = space.cell_dof(t0, i);
                if (d != Mesh::npos) out[d] += inv_area * mesh.tri_area(t0) / 3.0;
            }
        }
        return out;
    }

    auto value_at = [&](std::size_t t, double x, double y) -> double {
        if (load.kind == Load::Kind::Analytic) return load.fn(x, y);
        return load.p0[t];
    };

    if (load.kind == Load::Kind::P0Coeffs && load.p0.size() != mesh.n_triangles())
        throw std::invalid_argument("load_vector: p0 coefficient size mismatch");

    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto qp = quad_points(mesh, t);
        if (space.kind() == FeKind::P0) {
            double s = 0.0;
            for (const auto& p : qp) s += p.w * value_at(t, p.x, p.y);
            out[t] += s;
        } else {
            require_kind(space, {FeKind::P1C0, FeKind::P1C}, "load_vector");
            const auto& r = QuadratureRule::triangle_deg2();
            for (int i = 0; i < 3; ++i) {
                const std::size_t d = space.cell_dof(t, i);
                if (d == Mesh::npos) continue;
                double s = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const auto& nd = r.nodes[k];
                    const double li = (i == 0 ? nd.l0 : i == 1 ? nd.l1 : nd.l2);
                    s += qp[k].w * li * value_at(t, qp[k].x, qp[k].y);
                }
                out[d] += s;
            }
        }
    }
    return out;
}

} // namespace mixlab
