#pragma once

#include <functional>
#include <vector>

#include "nsdg/spaces.hpp"
#include "nsdg/timedisc.hpp"
#include "nsdg/types.hpp"

namespace nsdg {

// Time-independent spatial matrices: velocity mass M, interior-penalty
// diffusion A (penalty sigma, over interior and Dirichlet facets), and the
// divergence coupling B with entries -(div phi_v, chi_q).
struct SpatialOperators {
  SpMat M, A, B;
  VecX mean; // pressure mean functional m
  double nu = 1.0;
  double sigma = 10.0;
};

SpatialOperators assemble_spatial(const VelocitySpace& vs, const PressureSpace& ps,
                                  double nu, double sigma);

// Linearized convection at one time node: volume transport, interior-facet
// upwind term, and gamma-penalty with gamma_F = max{c_S, max |w.n_F|}.
struct ConvectionSnapshot {
  SpMat C;
  VecX gamma;             // per facet (c_S on boundary facets, unused there)
  double max_abs_div = 0; // of the transport field at the volume points
};

// Reusable assembler with a frozen sparsity pattern; assemble() only
// rewrites values, which is what the fixed-point loop needs.
class ConvectionOperator {
public:
  ConvectionOperator(const VelocitySpace& vs, double c_S);
  void assemble(const VecX& w);
  const SpMat& matrix() const { return C_; }
  const VecX& gamma() const { return gamma_; }
  double max_abs_div() const { return max_abs_div_; }
  double safeguard() const { return c_S_; }

private:
  void walk(const VecX& w, const std::function<void(int, int, double)>& emit, bool values);

  const VelocitySpace& vs_;
  double c_S_;
  SpMat C_;
  std::vector<long> slots_;
  VecX gamma_;
  double max_abs_div_ = 0;
  bool warned_ = false;
};

ConvectionSnapshot assemble_convection(const VelocitySpace& vs, const VecX& w, double c_S);

// Just the gamma weights of a transport field (a cheap subset of
// assemble_convection, used when re-evaluating error norms).
VecX facet_gamma(const VelocitySpace& vs, const VecX& w, double c_S);

// Load vector of a spatial field against the velocity basis.
VecX assemble_load(const VelocitySpace& vs, const SpatialField& f);

// Interior-penalty Dirichlet right-hand side nu * (-(g, grad(v) n) + sigma
// h_F^{-1} (g, v)) over boundary facets.
VecX assemble_boundary_ip_rhs(const VelocitySpace& vs, const SpatialField& g,
                              double nu, double sigma);

// Facet normal moments of the Dirichlet datum, ordered as
// VelocitySpace::boundary_dofs (the strong lift of g . n).
VecX boundary_lift_values(const VelocitySpace& vs, const SpatialField& g);

struct SlabProblem {
  VectorField forcing;
  VectorField dirichlet; // empty for homogeneous data
  VecX prev_end;         // velocity coefficients at t_{n-1}^-
};

// One slab's linear system over nodal blocks [u_0..u_l | p_0..p_l |
// lambda_0..lambda_l] with constrained boundary-normal dofs eliminated.
// The velocity-velocity coupling is G (x) M + diag(w) (x) (nu A) +
// blockdiag(w_i C_i) with G = diag(w) D + e e^T; pressure and zero-mean
// multiplier blocks couple within one time node.
struct SlabSystem {
  SpMat matrix;
  VecX rhs;
  int nv = 0, nq = 0, nodes = 0;
  std::vector<char> constrained; // velocity block flags (node-major)
  VecX constrained_values;

  int size() const { return nodes * (nv + nq + 1); }
  int u_index(int node, int dof) const { return node * nv + dof; }
  int p_index(int node, int dof) const { return nodes * nv + node * nq + dof; }
  int lambda_index(int node) const { return nodes * (nv + nq) + node; }
};

SlabSystem build_slab_system(const SpatialOperators& ops, const VelocitySpace& vs,
                             const PressureSpace& ps, const SlabBasis& basis,
                             const std::vector<ConvectionSnapshot>& convection,
                             const SlabProblem& problem);

} // namespace nsdg
