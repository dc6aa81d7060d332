#pragma once

#include "mixlab/assembly.hpp"
#include "mixlab/solvers.hpp"

#include <functional>
#include <vector>

namespace mixlab {

// Triangle fan around a vertex, cyclically ordered counter-clockwise.
// Interior vertices close the fan (edges.size() == tris.size(), the last
// edge connects back to tris[0]); boundary vertices form an open chain
// (edges.size() == tris.size() - 1) starting and ending at boundary edges.
struct Patch {
    std::size_t vertex = 0;
    bool interior = true;
    std::vector<std::size_t> tris;
    std::vector<std::size_t> edges; // edges[i] connects tris[i] -> tris[i+1]
    // open chains only: the boundary edges through the vertex where the
    // walk starts and ends
    std::size_t start_edge = Mesh::npos;
    std::size_t end_edge = Mesh::npos;
};

std::vector<Patch> build_patches(const Mesh& mesh);

// H(div)-conforming flux rebuilt from a P1 Galerkin gradient by the
// patch-wise coefficient recursion.
struct EquilibratedFlux {
    std::vector<double> coeffs;     // RT0C edge coefficients of sigma
    std::vector<double> div_values; // elementwise div sigma
    std::vector<double> g0;        // the P0 datum
    double max_div_err = 0.0;      // max_T |div sigma + g0|
    double max_jump = 0.0;         // worst normal-trace mismatch before averaging
    double fortin_residual = 0.0;  // max_q |(grad u_h - sigma, grad phi_q)|
    double max_patch_closure = 0.0;
};

// u_nodal: nodal values over all vertices (zero on the boundary); g0: P0
// coefficients with (grad u_h, grad v) = (g0, v) for all v in Q_h; checked,
// rejected when violated.
EquilibratedFlux reconstruct(const Mesh& mesh, const std::vector<double>& u_nodal,
                             const std::vector<double>& g0);

// ---- global equilibrated (Darcy) solve ----

struct DarcyOptions {
    bool zero_normal_flux = false; // constrain sigma.n = 0 on the boundary
    SaddleOptions saddle;
};

struct DarcySolution {
    std::vector<double> sigma; // RT0C coefficients
    std::vector<double> p;     // P0, zero-mean gauge in the constrained case
    double res_y = 0.0, res_x = 0.0;
    double max_div_err = 0.0; // max_T |div sigma + g0|
};

//   (sigma, tau) + (div tau, p) = 0        for all tau
//   (div sigma, q) = -(g0, q)              for all q in P0
DarcySolution darcy_solve(const Mesh& mesh, const std::vector<double>& g0, const DarcyOptions& opts = {});

// ---- Fortin-constant growth law ----

struct FortinRow {
    double h = 0.0;
    double c_pi = 0.0; // max over loads of ||sigma_h|| / ||grad u_h||
    double rho = 0.0;  // inverse-inequality constant on Q_h
    double zeta = 0.0; // P1-P0 inf-sup constant
    double h_rho_over_zeta = 0.0;
};

using P0LoadProvider = std::function<std::vector<double>(const Mesh&)>;

std::vector<FortinRow> fortin_constant(const std::vector<const Mesh*>& levels,
                                       const std::vector<P0LoadProvider>& loads);

} // namespace mixlab
