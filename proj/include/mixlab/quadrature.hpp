#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mixlab {

// Symmetric quadrature on the reference triangle, barycentric coordinates,
// weights normalized to sum to 1 (multiply by the physical area).
struct QuadratureRule {
    struct Node {
        double l0, l1, l2, w;
    };
    std::vector<Node> nodes;
    int degree = 0;

    static const QuadratureRule& triangle_deg2(); // 3-point interior rule
    static const QuadratureRule& triangle_deg5(); // 7-point rule
};

// Gauss-Legendre on [0,1], weights summing to 1.
struct EdgeQuadrature {
    std::vector<std::array<double, 2>> nodes; // (t, w)
    static const EdgeQuadrature& gauss2();
    static const EdgeQuadrature& gauss5();
};

} // namespace mixlab
