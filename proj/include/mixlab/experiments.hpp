#pragma once

#include "mixlab/infsup.hpp"

#include <optional>
#include <string>

namespace mixlab {

// Closed-form solution with -laplace(u) = f and Dirichlet trace u.
struct ExactSolution {
    std::string name;
    ScalarField u;
    VectorField grad;
    ScalarField f;             // forcing; identically zero when null
    bool zero_boundary = true; // trace vanishes on the mesh boundary

    double f_at(double x, double y) const { return f ? f(x, y) : 0.0; }
};

// u = sin(pi x) sin(2 pi y) on the unit square.
const ExactSolution& smooth_square_solution();

// u = rho^(2/3) sin(2 theta / 3), harmonic on the L-shaped domain with the
// reentrant corner at the origin; theta in [0, 3 pi/2] from the positive
// x-axis.
const ExactSolution& lshape_singular_solution();

// Max relative residual of -laplace(u) - f by second-order central
// differences at deterministic sample points inside [lo,hi]^2.
double laplace_fd_residual(const ExactSolution& s, double lo, double hi, int npoints, unsigned seed);

// ---- one Poisson case on one mesh ----

struct CaseSolution {
    FeKind v_kind = FeKind::RT0C;
    std::vector<double> sigma;            // V coefficients
    std::vector<double> u_nodal;          // all vertices (lifted boundary values included)
    std::vector<double> u_galerkin_nodal; // same layout; empty if not requested
    double res_y = 0.0, res_x = 0.0;
};

// Solves the dual mixed system; bc (when given) supplies nonhomogeneous
// Dirichlet data by nodal interpolation eliminated to the right-hand side.
CaseSolution solve_poisson_case(const Mesh& mesh, FeKind v_kind, const Load& load,
                                const ExactSolution* bc, bool with_galerkin,
                                const SaddleOptions& opts = {});

// Galerkin solve (grad u, grad v) = <f, v> with optional lifted trace.
std::vector<double> solve_galerkin(const Mesh& mesh, const Load& load, const ExactSolution* bc);

// ---- error norms (elevated quadrature) ----

using SigmaEval = std::function<Vec2(std::size_t t, double x, double y)>;
SigmaEval make_rt0c_eval(const Mesh& mesh, const std::vector<double>& coeffs);
SigmaEval make_drt0_eval(const Mesh& mesh, const std::vector<double>& coeffs);

struct ErrorNorms {
    double sigma_err = 0.0; // ||sigma - sigma_h||_0, sigma = -grad u
    double u_l2 = 0.0;
    double u_h1 = 0.0; // ||grad(u - u_h)||_0
};
ErrorNorms error_norms(const Mesh& mesh, const SigmaEval& sigma_h, const std::vector<double>& u_nodal,
                       const ExactSolution& exact);

// ---- convergence studies ----

enum class MeshFamily { Crossed, Right, Lshape };
Mesh make_family_mesh(MeshFamily fam, std::size_t n);

struct ConvergenceConfig {
    std::string case_name = "smooth-square"; // or "lshape-singular"
    FeKind v_kind = FeKind::RT0C;
    std::size_t base_n = 4;
    std::size_t levels = 4;
    // Explicit level meshes override the generated family (either in-memory
    // or imported from internal_json files). The singular reference rates
    // are reproduced on irregular meshes; the structured L-shape family
    // stalls in the energy norm of u while the flux still converges.
    std::vector<Mesh> meshes;
    std::vector<std::string> mesh_files;
};

struct ConvergenceRow {
    std::size_t dofs = 0;
    double h = 0.0;
    double sigma_err = 0.0, u_l2_err = 0.0, u_h1_err = 0.0;
    double sigma_rate = 0.0, u_l2_rate = 0.0, u_h1_rate = 0.0;
    bool has_rates = false;
};

struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double rate_sigma = 0.0, rate_l2 = 0.0, rate_h1 = 0.0; // slopes over the last 3 rows
};

ConvergenceResult convergence_study(const ConvergenceConfig& cfg);

// ---- spurious-mode demonstration ----

struct DemoRow {
    std::size_t level = 0;
    double h = 0.0;
    std::size_t dofs = 0;
    double osc_index = 0.0; // ||u_h - u_G||_H1 / ||u_G||_H1
};

std::vector<DemoRow> spurious_demo(MeshFamily fam, std::size_t base_n, std::size_t levels,
                                   const Load& load, FeKind v_kind);

// oscillation index of one solved case
double oscillation_index(const Mesh& mesh, const std::vector<double>& u_nodal,
                         const std::vector<double>& u_galerkin_nodal);

} // namespace mixlab
