#include "mixlab/quadrature.hpp"

#include <cmath>

namespace mixlab {

const QuadratureRule& QuadratureRule::triangle_deg2() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.degree = 2;
        const double a = 2.0 / 3.0, b = 1.0 / 6.0, w = 1.0 / 3.0;
        r.nodes = {{a, b, b, w}, {b, a, b, w}, {b, b, a, w}};
        return r;
    }();
    return rule;
}

const QuadratureRule& QuadratureRule::triangle_deg5() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.degree = 5;
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
        const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
        r.nodes = {
            {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0},
            {1.0 - 2.0 * a1, a1, a1, w1},
            {a1, 1.0 - 2.0 * a1, a1, w1},
            {a1, a1, 1.0 - 2.0 * a1, w1},
            {1.0 - 2.0 * a2, a2, a2, w2},
            {a2, 1.0 - 2.0 * a2, a2, w2},
            {a2, a2, 1.0 - 2.0 * a2, w2},
        };
        return r;
    }();
    return rule;
}

const EdgeQuadrature& EdgeQuadrature::gauss2() {
    static const EdgeQuadrature q = [] {
        EdgeQuadrature e;
        const double d = 0.5 / std::sqrt(3.0);
        e.nodes = {{0.5 - d, 0.5}, {0.5 + d, 0.5}};
        return e;
    }();
    return q;
}

const EdgeQuadrature& EdgeQuadrature::gauss5() {
    static const EdgeQuadrature q = [] {
        EdgeQuadrature e;
        // 5-point Gauss-Legendre mapped from [-1,1] to [0,1]
        const double x1 = 0.0;
        const double x2 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double x3 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double w1 = 128.0 / 225.0;
        const double w2 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
        const double w3 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
        e.nodes = {{0.5 * (1.0 + x1), 0.5 * w1}, {0.5 * (1.0 - x2), 0.5 * w2}, {0.5 * (1.0 + x2), 0.5 * w2},
                   {0.5 * (1.0 - x3), 0.5 * w3}, {0.5 * (1.0 + x3), 0.5 * w3}};
        return e;
    }();
    return q;
}

} // namespace mixlab
