#pragma once

#include "mixlab/fespace.hpp"
#include "mixlab/sparse.hpp"

#include <vector>

namespace mixlab {

// Source term descriptor for load vectors.
struct Load {
    enum class Kind { Analytic, P0Coeffs, DiracApprox };
    Kind kind = Kind::Analytic;
    ScalarField fn;
    std::vector<double> p0;
    Vec2 point{0.0, 0.0};

    static Load analytic(ScalarField f) {
        Load l;
        l.kind = Kind::Analytic;
        l.fn = std::move(f);
        return l;
    }
    static Load p0_coeffs(std::vector<double> c) {
        Load l;
        l.kind = Kind::P0Coeffs;
        l.p0 = std::move(c);
        return l;
    }
    // unit-mass indicator of the triangle containing the point
    static Load dirac(double x, double y) {
        Load l;
        l.kind = Kind::DiracApprox;
        l.point = {x, y};
        return l;
    }
};

// L2 mass matrix of an RT0 space (RT0C or DRT0); SPD.
Csr mass_rt0(const FeSpace& v_space);

// B(q,v) = (psi_v, grad phi_q); shape dim(Q) x dim(V).
Csr coupling_b(const FeSpace& v_space, const FeSpace& q_space);

// H1_0 stiffness (grad, grad) on P1C0 (or P1C).
Csr stiffness_p1(const FeSpace& q_space);

// L2 mass matrices.
Csr mass_p1(const FeSpace& q_space);
Csr mass_p0(const Mesh& mesh); // diagonal of triangle areas

// (div psi_E, chi_T); shape n_tri x n_edges, entries are the signs.
Csr div_rt0_p0(const FeSpace& rt0c, const Mesh& mesh);

// C(q,T) = (chi_T, phi_q); shape dim(Q) x n_tri.
Csr coupling_p1_p0(const FeSpace& q_space, const Mesh& mesh);

// Load vector over a scalar space (P1C0, P1C or P0).
std::vector<double> load_vector(const FeSpace& space, const Load& load);

} // namespace mixlab
