#pragma once

#include <functional>
#include <vector>

#include "nsdg/quadrature.hpp"
#include "nsdg/types.hpp"

namespace nsdg {

// Partition 0 = t_0 < ... < t_N = T with one polynomial degree in time.
struct TimeGrid {
  std::vector<double> breaks;
  int degree = 0; // ell

  int num_slabs() const { return static_cast<int>(breaks.size()) - 1; }
  double tau(int n) const { return breaks[n] - breaks[n - 1]; } // n in 1..N
  double final_time() const { return breaks.back(); }
  // eta = max_{n>=2} tau_n / tau_{n-1}
  double step_ratio() const;
};

TimeGrid uniform_time_grid(double T, int num_slabs, int degree);

// Lagrange basis at the left Gauss-Radau nodes of one slab I_n, together
// with the derivative matrix and endpoint evaluation vectors. Slab-local
// polynomials are stored as nodal values at these Radau nodes.
struct SlabBasis {
  int slab = 0; // 1-based
  double t_left = 0.0, t_right = 1.0, tau = 1.0;
  VecX nodes;       // Radau nodes in I_n, nodes(0) = t_left
  VecX weights;     // Radau weights, sum = tau
  MatX deriv;       // D(i,j) = l_j'(s_i)
  VecX left_value;  // e(j) = l_j(t_left)  (= delta_{j0})
  VecX right_value; // r(j) = l_j(t_right^-)

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  // l_j(t) for all j (barycentric; exact at the nodes)
  VecX lagrange_values(double t) const;
  double eval_nodal(const VecX& nodal, double t) const;

private:
  VecX bary_; // barycentric weights
  friend SlabBasis slab_basis(const TimeGrid&, int);
};

SlabBasis slab_basis(const TimeGrid& grid, int n);

// Nodal values of the Gauss-Radau interpolant I_tau^R of a sample provider
// (in the Lagrange representation this is just evaluation at the nodes).
VecX radau_interpolate(const SlabBasis& basis, const std::function<double(double)>& f);

// Nodal values of the projection P_tau of f on the slab: matches f at the
// right endpoint and is L2-orthogonal to P_{ell-1}; for ell = 0 only the
// endpoint condition applies. Integrals use an (ell+4)-point Gauss rule.
VecX ptau_project(const SlabBasis& basis, const std::function<double(double)>& f);

// Transfer matrix E of the polynomial continuation from the previous slab
// onto the target slab's nodal basis: E(i,j) = l_j^{prev}(s_i^{target}).
MatX tilde_transfer(const SlabBasis& prev, const SlabBasis& target);

VecX tilde_extend(const SlabBasis& prev, const SlabBasis& target, const VecX& prev_nodal);

} // namespace nsdg
