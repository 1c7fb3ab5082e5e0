#pragma once

#include <vector>

#include "nsdg/manufactured.hpp"
#include "nsdg/solver.hpp"

namespace nsdg {

// Error quantities of one run: the L-infinity-in-time L2 velocity error,
// the nu-weighted broken-H1 (A-norm) time integral, the gamma-weighted
// jump term, their combination err_u, the final-time pressure L2 error,
// and the largest divergence norm over all Radau nodes.
struct ErrorReport {
  double linf_l2_velocity = 0.0;
  double a_norm_sq_weighted = 0.0;
  double gamma_jump_sq = 0.0;
  double err_u = 0.0;
  double pressure_l2_final = 0.0;
  double max_divergence = 0.0;
  double velocity_scale = 0.0; // max sampled L2 norm of the discrete velocity
  std::vector<double> slab_linf;
  std::vector<double> slab_a_sq;
  std::vector<double> slab_gamma_sq;
};

ErrorReport error_energy(const VelocitySpace& vs, const PressureSpace& ps,
                         const Trajectory& traj, const ManufacturedCase& exact);

double error_pressure_final(const PressureSpace& ps, const Trajectory& traj,
                            const ManufacturedCase& exact);

double divergence_norm(const VelocitySpace& vs, const Trajectory& traj);

// rate_i = log(e_i/e_{i+1}) / log(s_i/s_{i+1})
std::vector<double> convergence_rates(const std::vector<double>& errors,
                                      const std::vector<double>& sizes);

// Spatial L2 distance between a coefficient field and a reference field at
// a fixed time (exposed for tests and trajectory comparisons).
double velocity_l2_error(const VelocitySpace& vs, const VecX& coeffs,
                         const SpatialField& reference);

// max over sample times of the L2 distance between the velocity parts of
// two trajectories on the same discretization
double trajectory_linf_l2_distance(const VelocitySpace& vs, const Trajectory& a,
                                   const Trajectory& b);

} // namespace nsdg
