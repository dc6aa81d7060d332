#include "mixlab/fespace.hpp"

#include <cmath>
#include <stdexcept>

namespace mixlab {

FeSpace::FeSpace(FeKind kind, const Mesh& mesh) : kind_(kind), mesh_(&mesh) {
    switch (kind) {
        case FeKind::P1C:
            dof_count_ = mesh.n_vertices();
            break;
        case FeKind::P1C0: {
            vertex_dof_.assign(mesh.n_vertices(), Mesh::npos);
            for (std::size_t v = 0; v < mesh.n_vertices(); ++v)
                if (!mesh.boundary_vertex[v]) {
                    vertex_dof_[v] = dof_vertex_.size();
                    dof_vertex_.push_back(v);
                }
            dof_count_ = dof_vertex_.size();
            break;
        }
        case FeKind::P0:
            dof_count_ = mesh.n_triangles();
            break;
        case FeKind::RT0C:
            dof_count_ = mesh.n_edges();
            break;
        case FeKind::DRT0:
            dof_count_ = 3 * mesh.n_triangles();
            break;
    }
}

std::size_t FeSpace::cell_dof(std::size_t t, int local) const {
    switch (kind_) {
        case FeKind::P1C:
            return mesh_->triangles[t][local];
        case FeKind::P1C0:
            return vertex_dof_[mesh_->triangles[t][local]];
        case FeKind::P0:
            return t;
        case FeKind::RT0C:
            return mesh_->tri_edges[t][local].edge;
        case FeKind::DRT0:
            return 3 * t + static_cast<std::size_t>(local);
    }
    return Mesh::npos;
}

std::array<double, 3> barycentric(const Mesh& mesh, std::size_t t, double x, double y) {
    const auto& tr = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tr[0]];
    const auto& p1 = mesh.vertices[tr[1]];
    const auto& p2 = mesh.vertices[tr[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    const double l1 = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det;
    const double l2 = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det;
    return {1.0 - l1 - l2, l1, l2};
}

std::array<Vec2, 3> p1_gradients(const Mesh& mesh, std::size_t t) {
    const auto& tr = mesh.triangles[t];
    const auto& p0 = mesh.vertices[tr[0]];
    const auto& p1 = mesh.vertices[tr[1]];
    const auto& p2 = mesh.vertices[tr[2]];
    const double a2 = 2.0 * mesh.tri_area(t);
    return {Vec2{(p1[1] - p2[1]) / a2, (p2[0] - p1[0]) / a2},
            Vec2{(p2[1] - p0[1]) / a2, (p0[0] - p2[0]) / a2},
            Vec2{(p0[1] - p1[1]) / a2, (p1[0] - p0[0]) / a2}};
}

Vec2 rt0_local(const Mesh& mesh, std::size_t t, int le, double x, double y) {
    const auto& p = mesh.vertices[mesh.triangles[t][le]]; // vertex opposite local edge le
    const double f = 1.0 / (2.0 * mesh.tri_area(t));
    return {f * (x - p[0]), f * (y - p[1])};
}

BasisValues eval_basis(const FeSpace& space, std::size_t t, double x, double y) {
    const Mesh& mesh = space.mesh();
    const auto l = barycentric(mesh, t, x, y);
    const double tol = 1e-12;
    if (l[0] < -tol || l[1] < -tol || l[2] < -tol)
        throw std::runtime_error("eval_basis: point outside triangle " + std::to_string(t));

    BasisValues out;
    switch (space.kind()) {
        case FeKind::P1C:
        case FeKind::P1C0:
            out.scalar = {l[0], l[1], l[2]};
            out.count = 3;
            break;
        case FeKind::P0:
            out.scalar = {1.0, 0.0, 0.0};
            out.count = 1;
            break;
        case FeKind::DRT0:
            for (int le = 0; le < 3; ++le) out.vec[le] = rt0_local(mesh, t, le, x, y);
            out.count = 3;
            break;
        case FeKind::RT0C:
            for (int le = 0; le < 3; ++le) {
                const Vec2 eta = rt0_local(mesh, t, le, x, y);
                const double s = mesh.tri_edges[t][le].sign;
                out.vec[le] = {s * eta[0], s * eta[1]};
            }
            out.count = 3;
            break;
    }
    return out;
}

Vec2 rt0c_value(const Mesh& mesh, const std::vector<double>& coeffs, std::size_t t, double x, double y) {
    Vec2 v{0.0, 0.0};
    for (int le = 0; le < 3; ++le) {
        const auto& te = mesh.tri_edges[t][le];
        const Vec2 eta = rt0_local(mesh, t, le, x, y);
        const double c = coeffs[te.edge] * te.sign;
        v[0] += c * eta[0];
        v[1] += c * eta[1];
    }
    return v;
}

double rt0c_div(const Mesh& mesh, const std::vector<double>& coeffs, std::size_t t) {
    double s = 0.0;
    for (int le = 0; le < 3; ++le) {
        const auto& te = mesh.tri_edges[t][le];
        s += coeffs[te.edge] * te.sign;
    }
    return s / mesh.tri_area(t);
}

double p1_value(const Mesh& mesh, const std::vector<double>& nodal, std::size_t t, double x, double y) {
    const auto l = barycentric(mesh, t, x, y);
    const auto& tr = mesh.triangles[t];
    return l[0] * nodal[tr[0]] + l[1] * nodal[tr[1]] + l[2] * nodal[tr[2]];
}

Vec2 p1_gradient(const Mesh& mesh, const std::vector<double>& nodal, std::size_t t) {
    const auto g = p1_gradients(mesh, t);
    const auto& tr = mesh.triangles[t];
    return {g[0][0] * nodal[tr[0]] + g[1][0] * nodal[tr[1]] + g[2][0] * nodal[tr[2]],
            g[0][1] * nodal[tr[0]] + g[1][1] * nodal[tr[1]] + g[2][1] * nodal[tr[2]]};
}

std::vector<double> interpolate_rt0(const FeSpace& rt0c, const VectorField& field) {
    if (rt0c.kind() != FeKind::RT0C) throw std::invalid_argument("interpolate_rt0: RT0C space required");
    const Mesh& mesh = rt0c.mesh();
    const auto& q = EdgeQuadrature::gauss5();
    std::vector<double> coeffs(mesh.n_edges(), 0.0);
    for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
        const auto& a = mesh.vertices[mesh.edges[e][0]];
        const auto& b = mesh.vertices[mesh.edges[e][1]];
        const auto n = mesh.edge_normal(e);
        const double len = mesh.edge_length(e);
        double flux = 0.0;
        for (const auto& node : q.nodes) {
            const double x = a[0] + node[0] * (b[0] - a[0]);
            const double y = a[1] + node[0] * (b[1] - a[1]);
            const Vec2 v = field(x, y);
            flux += node[1] * (v[0] * n[0] + v[1] * n[1]);
        }
        coeffs[e] = flux * len;
    }
    return coeffs;
}

std::vector<double> l2_project_p0(const Mesh& mesh, const ScalarField& f, const QuadratureRule& rule) {
    std::vector<double> out(mesh.n_triangles(), 0.0);
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tr = mesh.triangles[t];
        const auto& p0 = mesh.vertices[tr[0]];
        const auto& p1 = mesh.vertices[tr[1]];
        const auto& p2 = mesh.vertices[tr[2]];
        double mean = 0.0;
        for (const auto& node : rule.nodes) {
            const double x = node.l0 * p0[0] + node.l1 * p1[0] + node.l2 * p2[0];
            const double y = node.l0 * p0[1] + node.l1 * p1[1] + node.l2 * p2[1];
            mean += node.w * f(x, y);
        }
        out[t] = mean;
    }
    return out;
}

std::vector<double> expand_p1c0(const FeSpace& space, const std::vector<double>& coeffs) {
    if (space.kind() != FeKind::P1C0) throw std::invalid_argument("expand_p1c0: P1C0 space required");
    std::vector<double> nodal(space.mesh().n_vertices(), 0.0);
    for (std::size_t d = 0; d < space.dof_count(); ++d) nodal[space.dof_vertex(d)] = coeffs[d];
    return nodal;
}

} // namespace mixlab
