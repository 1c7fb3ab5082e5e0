#pragma once

#include <stdexcept>

#include "nsdg/types.hpp"

namespace nsdg {

struct UnsupportedDegreeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Quadrature rule on a reference domain: the unit interval [0,1]
// (nodes is m x 1) or the unit right triangle {x,y >= 0, x+y <= 1}
// (nodes is m x 2). All weights are positive and sum to the measure
// of the reference domain.
struct QuadratureRule {
  MatX nodes;
  VecX weights;
  int exactness_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

// Left Gauss-Radau rule on [0,1]: first node pinned at 0, exact for
// polynomials of degree <= 2m-2.
QuadratureRule gauss_radau_left(int m);

// Gauss-Legendre rule on [0,1], exact for degree <= 2m-1.
QuadratureRule gauss_legendre(int m);

// Rule on the reference triangle exact at least for the requested total
// degree (conical product of Gauss and Gauss-Jacobi rules).
QuadratureRule triangle_rule(int degree);

// Affine image of a 1D rule on [a,b]; weights scale by (b-a).
QuadratureRule map_to_interval(const QuadratureRule& rule, double a, double b);

} // namespace nsdg
