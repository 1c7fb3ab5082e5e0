#pragma once

#include <functional>
#include <string>

#include "nsdg/types.hpp"

namespace nsdg {

// Closed-form exact solution bundle: velocity, its gradient, pressure, the
// momentum-residual forcing f = du/dt - nu lap(u) + (grad u) u + grad p,
// the initial datum, and the Dirichlet trace.
struct ManufacturedCase {
  std::string name;
  double nu = 1.0;
  VectorField velocity;
  std::function<Mat2(const Vec2&, double)> velocity_gradient;
  ScalarField pressure;
  VectorField forcing;
  SpatialField initial;
  bool homogeneous_boundary = false; // u == 0 on the whole boundary for all t
};

// Cases sol1 (trigonometric, zero boundary), sol2 (linear in space,
// cos(2 pi t) in time), sol3 (bilinear in space-time); sol2 and sol3 share
// the trigonometric pressure and need Dirichlet data.
ManufacturedCase manufactured_case(const std::string& name, double nu);

// Max over random sample points of |f_closed - f_fd| with f_fd computed by
// centered finite differences on velocity and pressure. Guards the
// hand-derived forcing against transcription errors.
double verify_forcing(const ManufacturedCase& c, int samples);

} // namespace nsdg
