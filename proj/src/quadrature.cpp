#include "nsdg/quadrature.hpp"

#include <cmath>

namespace nsdg {

namespace {

// Golub-Welsch: nodes/weights of a Gauss rule from the three-term
// recurrence of the orthonormal polynomials. diag/offdiag define the
// symmetric tridiagonal Jacobi matrix, mu0 is the total mass of the
// weight function. Nodes come back sorted.
void golub_welsch(const VecX& diag, const VecX& offdiag, double mu0,
                  VecX& nodes, VecX& weights) {
  const int m = static_cast<int>(diag.size());
  MatX J = MatX::Zero(m, m);
  for (int i = 0; i < m; ++i) J(i, i) = diag(i);
  for (int i = 0; i + 1 < m; ++i) {
    J(i, i + 1) = offdiag(i);
    J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(J);
  nodes = es.eigenvalues();
  weights.resize(m);
  for (int i = 0; i < m; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
}

// Gauss-Legendre on [-1,1].
void legendre_rule(int m, VecX& nodes, VecX& weights) {
  VecX diag = VecX::Zero(m), offdiag(m > 1 ? m - 1 : 0);
  for (int n = 1; n < m; ++n)
    offdiag(n - 1) = n / std::sqrt(4.0 * n * n - 1.0);
  golub_welsch(diag, offdiag, 2.0, nodes, weights);
}

// Gauss-Jacobi on [-1,1] with weight (1-x)^alpha (1+x)^beta for
// (alpha,beta) in {(1,0),(0,1)}; the recurrence coefficients simplify to
//   a_n = -+ 1/((2n+1)(2n+3)),  b_n = sqrt(n(n+1))/(2n+1),  mu0 = 2.
void jacobi10_rule(int m, double sign_alpha, VecX& nodes, VecX& weights) {
  VecX diag(m), offdiag(m > 1 ? m - 1 : 0);
  for (int n = 0; n < m; ++n)
    diag(n) = -sign_alpha / ((2.0 * n + 1.0) * (2.0 * n + 3.0));
  for (int n = 1; n < m; ++n)
    offdiag(n - 1) = std::sqrt(n * (n + 1.0)) / (2.0 * n + 1.0);
  golub_welsch(diag, offdiag, 2.0, nodes, weights);
}

} // namespace

QuadratureRule gauss_legendre(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: need m >= 1");
  VecX x, w;
  legendre_rule(m, x, w);
  QuadratureRule rule;
  rule.nodes.resize(m, 1);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule.nodes(i, 0) = 0.5 * (x(i) + 1.0);
    rule.weights(i) = 0.5 * w(i);
  }
  // Symmetrize about 1/2 to remove eigensolver round-off.
  for (int i = 0; i < m / 2; ++i) {
    const int j = m - 1 - i;
    const double s = 0.5 * (rule.nodes(i, 0) + 1.0 - rule.nodes(j, 0));
    rule.nodes(i, 0) = s;
    rule.nodes(j, 0) = 1.0 - s;
    const double ww = 0.5 * (rule.weights(i) + rule.weights(j));
    rule.weights(i) = rule.weights(j) = ww;
  }
  if (m % 2 == 1) rule.nodes(m / 2, 0) = 0.5;
  rule.exactness_degree = 2 * m - 1;
  return rule;
}

QuadratureRule gauss_radau_left(int m) {
  if (m < 1) throw std::invalid_argument("gauss_radau_left: need m >= 1");
  QuadratureRule rule;
  rule.nodes.resize(m, 1);
  rule.weights.resize(m);
  rule.exactness_degree = 2 * m - 2;
  if (m == 1) {
    rule.nodes(0, 0) = 0.0;
    rule.weights(0) = 1.0;
    return rule;
  }
  // Free nodes are the roots of the Jacobi polynomial P_{m-1}^{(0,1)}
  // (orthogonal w.r.t. (1+x) on [-1,1]), mapped to [0,1].
  VecX x, w;
  jacobi10_rule(m - 1, -1.0, x, w);
  rule.nodes(0, 0) = 0.0;
  for (int i = 0; i < m - 1; ++i) rule.nodes(i + 1, 0) = 0.5 * (x(i) + 1.0);

  // Weights by integrating the Lagrange basis exactly with Gauss-Legendre.
  QuadratureRule gl = gauss_legendre(m);
  rule.weights.setZero();
  for (int q = 0; q < m; ++q) {
    const double t = gl.nodes(q, 0);
    for (int j = 0; j < m; ++j) {
      double lj = 1.0;
      for (int i = 0; i < m; ++i) {
        if (i == j) continue;
        lj *= (t - rule.nodes(i, 0)) / (rule.nodes(j, 0) - rule.nodes(i, 0));
      }
      rule.weights(j) += gl.weights(q) * lj;
    }
  }
  return rule;
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  constexpr int kMaxDegree = 20;
  if (degree > kMaxDegree)
    throw UnsupportedDegreeError("triangle_rule: degree above supported maximum");
  const int m = std::max(1, (degree + 2) / 2); // ceil((degree+1)/2)

  // Collapsed (Duffy) coordinates: x = u(1-y); the Jacobian (1-y) is
  // absorbed into a Gauss-Jacobi rule in y, so total degree 2m-1 is exact.
  QuadratureRule gl = gauss_legendre(m);
  VecX yj, wj;
  jacobi10_rule(m, +1.0, yj, wj); // weight (1-x) on [-1,1]

  QuadratureRule rule;
  rule.nodes.resize(m * m, 2);
  rule.weights.resize(m * m);
  int idx = 0;
  for (int j = 0; j < m; ++j) {
    const double y = 0.5 * (yj(j) + 1.0);
    const double wy = 0.25 * wj(j);
    for (int i = 0; i < m; ++i, ++idx) {
      rule.nodes(idx, 0) = gl.nodes(i, 0) * (1.0 - y);
      rule.nodes(idx, 1) = y;
      rule.weights(idx) = gl.weights(i) * wy;
    }
  }
  rule.exactness_degree = 2 * m - 1;
  return rule;
}

QuadratureRule map_to_interval(const QuadratureRule& rule, double a, double b) {
  QuadratureRule out = rule;
  for (int i = 0; i < rule.size(); ++i)
    out.nodes(i, 0) = a + (b - a) * rule.nodes(i, 0);
  out.weights *= (b - a);
  return out;
}

} // namespace nsdg
