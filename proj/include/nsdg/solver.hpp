#pragma once

#include "nsdg/assembly.hpp"
#include "nsdg/linear_solver.hpp"
#include "nsdg/timedisc.hpp"

namespace nsdg {

enum class Scheme { fully_implicit, semi_implicit };

struct SolverConfig {
  double fixed_point_tol = 1e-8;
  int max_fixed_point_iters = 100;
  double linear_solver_tol = 1e-12;
  Scheme scheme = Scheme::fully_implicit;
  double c_s = 1e-8;
  double sigma = 10.0;
};

struct Problem {
  VectorField forcing;
  VectorField dirichlet; // empty for the homogeneous problem
  SpatialField initial;
  double nu = 1.0;
};

// Slab-wise velocity and pressure nodal coefficients. Row i of a slab
// matrix holds the coefficients at Radau node i.
struct Trajectory {
  TimeGrid grid;
  Scheme scheme = Scheme::fully_implicit;
  double c_s = 1e-8;
  double sigma = 10.0;
  std::vector<MatX> velocity;
  std::vector<MatX> pressure;
  // gamma weights the scheme ran with: per slab, (ell+1) x num_facets
  std::vector<MatX> gamma;
  std::vector<int> fp_iters;
  std::vector<VecX> end_velocity;       // u(t_n^-)
  double max_div_residual = 0.0;        // max ||B u_i|| / (1 + ||u_i||_M)

  int total_fp_iters() const;
  // velocity coefficients at time t inside slab n (1-based)
  VecX velocity_at(const SlabBasis& basis, int n, double t) const;
};

Trajectory run_fully_implicit(const VelocitySpace& vs, const PressureSpace& ps,
                              const TimeGrid& grid, const Problem& problem,
                              const SolverConfig& config);

Trajectory run_semi_implicit(const VelocitySpace& vs, const PressureSpace& ps,
                             const TimeGrid& grid, const Problem& problem,
                             const SolverConfig& config);

struct SlabSolution {
  MatX u, p;
};

// Single linearized (Oseen-like) solve on one slab with the given slab
// transport polynomial (nodal rows).
SlabSolution solve_linearized_slab(const SpatialOperators& ops, const VelocitySpace& vs,
                                   const PressureSpace& ps, const SlabBasis& basis,
                                   const MatX& w_nodal, const SlabProblem& problem,
                                   const SolverConfig& config);

VecX linear_solve(const SlabSystem& system, double tol = 1e-12);

// Transport nodal field the scheme used on slab n (the solution itself for
// the fully implicit scheme, the extension of the previous slab for the
// semi-implicit one). Needed to reproduce the gamma weights.
MatX transport_nodal(const Trajectory& traj, int n);

} // namespace nsdg
