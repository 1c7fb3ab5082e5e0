#include "nsdg/timedisc.hpp"

#include <cmath>
#include <stdexcept>

namespace nsdg {

double TimeGrid::step_ratio() const {
  double eta = 0.0;
  for (int n = 2; n <= num_slabs(); ++n) eta = std::max(eta, tau(n) / tau(n - 1));
  return eta;
}

TimeGrid uniform_time_grid(double T, int num_slabs, int degree) {
  if (T <= 0.0 || num_slabs < 1 || degree < 0)
    throw std::invalid_argument("uniform_time_grid: bad parameters");
  TimeGrid grid;
  grid.degree = degree;
  grid.breaks.resize(num_slabs + 1);
  for (int n = 0; n <= num_slabs; ++n) grid.breaks[n] = T * double(n) / num_slabs;
  return grid;
}

SlabBasis slab_basis(const TimeGrid& grid, int n) {
  if (n < 1 || n > grid.num_slabs())
    throw std::out_of_range("slab_basis: slab index out of range");
  SlabBasis b;
  b.slab = n;
  b.t_left = grid.breaks[n - 1];
  b.t_right = grid.breaks[n];
  b.tau = b.t_right - b.t_left;
  const int m = grid.degree + 1;

  const QuadratureRule radau = gauss_radau_left(m);
  b.nodes.resize(m);
  b.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    b.nodes(i) = b.t_left + b.tau * radau.nodes(i, 0);
    b.weights(i) = b.tau * radau.weights(i);
  }
  b.nodes(0) = b.t_left; // exact

  b.bary_.resize(m);
  for (int j = 0; j < m; ++j) {
    double w = 1.0;
    for (int i = 0; i < m; ++i)
      if (i != j) w *= (b.nodes(j) - b.nodes(i));
    b.bary_(j) = 1.0 / w;
  }

  b.deriv.resize(m, m);
  for (int i = 0; i < m; ++i) {
    double diag = 0.0;
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      b.deriv(i, j) = (b.bary_(j) / b.bary_(i)) / (b.nodes(i) - b.nodes(j));
      diag -= b.deriv(i, j);
    }
    b.deriv(i, i) = diag; // rows annihilate constants
  }

  b.left_value = VecX::Zero(m);
  b.left_value(0) = 1.0;
  b.right_value = b.lagrange_values(b.t_right);
  return b;
}

VecX SlabBasis::lagrange_values(double t) const {
  const int m = num_nodes();
  VecX vals = VecX::Zero(m);
  for (int i = 0; i < m; ++i)
    if (t == nodes(i)) {
      vals(i) = 1.0;
      return vals;
    }
  double prod = 1.0;
  for (int i = 0; i < m; ++i) prod *= (t - nodes(i));
  for (int j = 0; j < m; ++j) vals(j) = prod * bary_(j) / (t - nodes(j));
  return vals;
}

double SlabBasis::eval_nodal(const VecX& nodal, double t) const {
  return lagrange_values(t).dot(nodal);
}

VecX radau_interpolate(const SlabBasis& basis, const std::function<double(double)>& f) {
  const int m = basis.num_nodes();
  VecX nodal(m);
  for (int i = 0; i < m; ++i) nodal(i) = f(basis.nodes(i));
  return nodal;
}

VecX ptau_project(const SlabBasis& basis, const std::function<double(double)>& f) {
  const int ell = basis.num_nodes() - 1;
  // Legendre expansion on the slab: L_i(t_right) = 1 and ||L_i||^2 = tau/(2i+1).
  const QuadratureRule gl = map_to_interval(gauss_legendre(ell + 4), basis.t_left, basis.t_right);
  auto legendre = [&](int i, double t) {
    const double x = 2.0 * (t - basis.t_left) / basis.tau - 1.0;
    double p0 = 1.0, p1 = x;
    if (i == 0) return p0;
    for (int k = 2; k <= i; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return p1;
  };
  VecX coeff = VecX::Zero(ell + 1);
  for (int i = 0; i < ell; ++i) {
    double integral = 0.0;
    for (int q = 0; q < gl.size(); ++q)
      integral += gl.weights(q) * f(gl.nodes(q, 0)) * legendre(i, gl.nodes(q, 0));
    coeff(i) = (2.0 * i + 1.0) / basis.tau * integral;
  }
  double partial = 0.0;
  for (int i = 0; i < ell; ++i) partial += coeff(i);
  coeff(ell) = f(basis.t_right) - partial;

  VecX nodal(ell + 1);
  for (int j = 0; j <= ell; ++j) {
    double v = 0.0;
    for (int i = 0; i <= ell; ++i) v += coeff(i) * legendre(i, basis.nodes(j));
    nodal(j) = v;
  }
  return nodal;
}

MatX tilde_transfer(const SlabBasis& prev, const SlabBasis& target) {
  const int m = prev.num_nodes();
  MatX E(m, m);
  for (int i = 0; i < m; ++i) E.row(i) = prev.lagrange_values(target.nodes(i)).transpose();
  return E;
}

VecX tilde_extend(const SlabBasis& prev, const SlabBasis& target, const VecX& prev_nodal) {
  return tilde_transfer(prev, target) * prev_nodal;
}

} // namespace nsdg
