#pragma once

#include "mixlab/mesh.hpp"
#include "mixlab/quadrature.hpp"

#include <array>
#include <functional>
#include <vector>

namespace mixlab {

// Element kinds:
//   P1C   continuous piecewise linears, one DOF per vertex
//   P1C0  P1C with homogeneous Dirichlet DOFs eliminated
//   P0    piecewise constants, one DOF per triangle
//   RT0C  H(div)-conforming lowest-order Raviart-Thomas, one DOF per edge;
//         the DOF is the flux across the edge in the global normal direction
//   DRT0  discontinuous RT0, three DOFs per triangle (outward edge fluxes)
enum class FeKind { P1C, P1C0, P0, RT0C, DRT0 };

using Vec2 = std::array<double, 2>;
using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<Vec2(double, double)>;

// Immutable after construction; basis evaluation is pure and reentrant.
class FeSpace {
public:
    FeSpace(FeKind kind, const Mesh& mesh);

    FeKind kind() const { return kind_; }
    const Mesh& mesh() const { return *mesh_; }
    std::size_t dof_count() const { return dof_count_; }

    std::size_t dofs_per_cell() const { return kind_ == FeKind::P0 ? 1 : 3; }

    // Global DOF for a local shape function on triangle t; Mesh::npos for
    // eliminated Dirichlet DOFs of P1C0.
    std::size_t cell_dof(std::size_t t, int local) const;

    // P1C0 only: dof index of a vertex (npos on the boundary) and back.
    std::size_t vertex_dof(std::size_t v) const { return vertex_dof_[v]; }
    std::size_t dof_vertex(std::size_t d) const { return dof_vertex_[d]; }

private:
    FeKind kind_;
    const Mesh* mesh_;
    std::size_t dof_count_ = 0;
    std::vector<std::size_t> vertex_dof_, dof_vertex_;
};

// Barycentric coordinates of (x,y) in triangle t.
std::array<double, 3> barycentric(const Mesh& mesh, std::size_t t, double x, double y);

// Gradients of the three hat functions on triangle t (constant).
std::array<Vec2, 3> p1_gradients(const Mesh& mesh, std::size_t t);

// Local RT0 function with unit outward flux across local edge le and zero
// flux across the other two: eta(x) = (x - P_le) / (2|T|), div = 1/|T|.
Vec2 rt0_local(const Mesh& mesh, std::size_t t, int le, double x, double y);

// Values of all local shape functions at a point (throws when the point is
// outside the triangle). Scalar kinds fill `scalar`, vector kinds `vec`.
struct BasisValues {
    std::array<double, 3> scalar{};
    std::array<Vec2, 3> vec{};
    int count = 0;
};
BasisValues eval_basis(const FeSpace& space, std::size_t t, double x, double y);

// Piecewise value of an RT0C field from its coefficient vector.
Vec2 rt0c_value(const Mesh& mesh, const std::vector<double>& coeffs, std::size_t t, double x, double y);
double rt0c_div(const Mesh& mesh, const std::vector<double>& coeffs, std::size_t t);

// Value and gradient of a P1 field given nodal values over all vertices.
double p1_value(const Mesh& mesh, const std::vector<double>& nodal, std::size_t t, double x, double y);
Vec2 p1_gradient(const Mesh& mesh, const std::vector<double>& nodal, std::size_t t);

// Edge-flux interpolation onto RT0C: coefficient = integral of field . n_E.
std::vector<double> interpolate_rt0(const FeSpace& rt0c, const VectorField& field);

// L2 projection onto P0 (per-element means by quadrature).
std::vector<double> l2_project_p0(const Mesh& mesh, const ScalarField& f,
                                  const QuadratureRule& rule = QuadratureRule::triangle_deg2());

// Expand a P1C0 coefficient vector to nodal values over all vertices
// (zero on the boundary).
std::vector<double> expand_p1c0(const FeSpace& space, const std::vector<double>& coeffs);

} // namespace mixlab
