#include "nsdg/manufactured.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace nsdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sol1: u = curl(cos(t)/(4 pi) * Cx^2 Cy^2) with Cx = cos(pi(x-1/2)),
// so both components vanish on the boundary of the unit square.
struct Sol1 {
  static void trig(const Vec2& p, double& Cx, double& Sx, double& Cy, double& Sy) {
    Cx = std::cos(kPi * (p.x() - 0.5));
    Sx = std::sin(kPi * (p.x() - 0.5));
    Cy = std::cos(kPi * (p.y() - 0.5));
    Sy = std::sin(kPi * (p.y() - 0.5));
  }
  static Vec2 u(const Vec2& p, double t) {
    double Cx, Sx, Cy, Sy;
    trig(p, Cx, Sx, Cy, Sy);
    const double c = std::cos(t);
    return {-0.5 * c * Cx * Cx * Cy * Sy, 0.5 * c * Cy * Cy * Cx * Sx};
  }
  static Mat2 grad(const Vec2& p, double t) {
    double Cx, Sx, Cy, Sy;
    trig(p, Cx, Sx, Cy, Sy);
    const double c = std::cos(t);
    Mat2 g;
    g(0, 0) = kPi * c * Cx * Sx * Cy * Sy;
    g(0, 1) = -0.5 * kPi * c * Cx * Cx * (Cy * Cy - Sy * Sy);
    g(1, 0) = 0.5 * kPi * c * Cy * Cy * (Cx * Cx - Sx * Sx);
    g(1, 1) = -kPi * c * Cx * Sx * Cy * Sy;
    return g;
  }
  static Vec2 laplacian(const Vec2& p, double t) {
    double Cx, Sx, Cy, Sy;
    trig(p, Cx, Sx, Cy, Sy);
    const double c = std::cos(t);
    const double pi2 = kPi * kPi;
    return {pi2 * c * (Cx * Cx - Sx * Sx) * Cy * Sy + 2.0 * pi2 * c * Cx * Cx * Cy * Sy,
            -pi2 * c * (Cy * Cy - Sy * Sy) * Cx * Sx - 2.0 * pi2 * c * Cy * Cy * Cx * Sx};
  }
  static Vec2 dt(const Vec2& p, double t) {
    double Cx, Sx, Cy, Sy;
    trig(p, Cx, Sx, Cy, Sy);
    const double s = std::sin(t);
    return {0.5 * s * Cx * Cx * Cy * Sy, -0.5 * s * Cy * Cy * Cx * Sx};
  }
};

double trig_pressure(const Vec2& p, double amplitude) {
  return amplitude *
         (std::sin(kPi * (p.x() - 0.5)) - std::sin(kPi * (p.y() - 0.5)));
}

Vec2 trig_pressure_grad(const Vec2& p, double amplitude) {
  return {amplitude * kPi * std::cos(kPi * (p.x() - 0.5)),
          -amplitude * kPi * std::cos(kPi * (p.y() - 0.5))};
}

} // namespace

ManufacturedCase manufactured_case(const std::string& name, double nu) {
  if (nu <= 0.0) throw std::invalid_argument("manufactured_case: nu must be positive");
  ManufacturedCase c;
  c.name = name;
  c.nu = nu;

  if (name == "sol1") {
    c.homogeneous_boundary = true;
    c.velocity = [](const Vec2& p, double t) { return Sol1::u(p, t); };
    c.velocity_gradient = [](const Vec2& p, double t) { return Sol1::grad(p, t); };
    c.pressure = [](const Vec2& p, double t) { return trig_pressure(p, std::cos(t)); };
    c.forcing = [nu](const Vec2& p, double t) {
      const Vec2 u = Sol1::u(p, t);
      const Mat2 g = Sol1::grad(p, t);
      return Vec2(Sol1::dt(p, t) - nu * Sol1::laplacian(p, t) + g * u +
                  trig_pressure_grad(p, std::cos(t)));
    };
  } else if (name == "sol2") {
    c.homogeneous_boundary = false;
    c.velocity = [](const Vec2& p, double t) {
      const double a = std::cos(2.0 * kPi * t);
      return Vec2(a * p.y(), a * p.x());
    };
    c.velocity_gradient = [](const Vec2&, double t) {
      const double a = std::cos(2.0 * kPi * t);
      Mat2 g;
      g << 0.0, a, a, 0.0;
      return g;
    };
    c.pressure = [](const Vec2& p, double t) {
      return trig_pressure(p, std::cos(2.0 * kPi * t));
    };
    c.forcing = [](const Vec2& p, double t) {
      const double a = std::cos(2.0 * kPi * t);
      const double da = -2.0 * kPi * std::sin(2.0 * kPi * t);
      // laplacian vanishes; (grad u) u = a^2 (x, y)
      return Vec2(da * p.y() + a * a * p.x() + trig_pressure_grad(p, a).x(),
                  da * p.x() + a * a * p.y() + trig_pressure_grad(p, a).y());
    };
  } else if (name == "sol3") {
    c.homogeneous_boundary = false;
    c.velocity = [](const Vec2& p, double t) { return Vec2(p.y() * t, p.x() * t); };
    c.velocity_gradient = [](const Vec2&, double t) {
      Mat2 g;
      g << 0.0, t, t, 0.0;
      return g;
    };
    c.pressure = [](const Vec2& p, double t) {
      return trig_pressure(p, std::cos(2.0 * kPi * t));
    };
    c.forcing = [](const Vec2& p, double t) {
      const double a = std::cos(2.0 * kPi * t);
      return Vec2(p.y() + t * t * p.x() + trig_pressure_grad(p, a).x(),
                  p.x() + t * t * p.y() + trig_pressure_grad(p, a).y());
    };
  } else {
    throw std::invalid_argument("manufactured_case: unknown case '" + name + "'");
  }
  c.initial = [vel = c.velocity](const Vec2& p) { return vel(p, 0.0); };
  return c;
}

double verify_forcing(const ManufacturedCase& c, int samples) {
  if (samples < 1) throw std::invalid_argument("verify_forcing: need samples >= 1");
  std::mt19937 rng(20240717u);
  std::uniform_real_distribution<double> coord(0.05, 0.95);
  std::uniform_real_distribution<double> time(0.05, 0.95);

  const double h1 = 1e-5; // first derivatives
  const double h2 = 1e-3; // fourth-order Laplacian stencil
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec2 p(coord(rng), coord(rng));
    const double t = time(rng);

    const Vec2 dudt = (c.velocity(p, t + h1) - c.velocity(p, t - h1)) / (2.0 * h1);
    const Vec2 dudx =
        (c.velocity(Vec2(p.x() + h1, p.y()), t) - c.velocity(Vec2(p.x() - h1, p.y()), t)) /
        (2.0 * h1);
    const Vec2 dudy =
        (c.velocity(Vec2(p.x(), p.y() + h1), t) - c.velocity(Vec2(p.x(), p.y() - h1), t)) /
        (2.0 * h1);
    const double dpdx =
        (c.pressure(Vec2(p.x() + h1, p.y()), t) - c.pressure(Vec2(p.x() - h1, p.y()), t)) /
        (2.0 * h1);
    const double dpdy =
        (c.pressure(Vec2(p.x(), p.y() + h1), t) - c.pressure(Vec2(p.x(), p.y() - h1), t)) /
        (2.0 * h1);

    auto lap_dir = [&](int dir) {
      auto at = [&](double d) {
        return dir == 0 ? c.velocity(Vec2(p.x() + d, p.y()), t)
                        : c.velocity(Vec2(p.x(), p.y() + d), t);
      };
      return Vec2((-at(2 * h2) + 16.0 * at(h2) - 30.0 * at(0.0) + 16.0 * at(-h2) -
                   at(-2 * h2)) /
                  (12.0 * h2 * h2));
    };
    const Vec2 lap = lap_dir(0) + lap_dir(1);

    const Vec2 u = c.velocity(p, t);
    Mat2 grad;
    grad.col(0) = dudx;
    grad.col(1) = dudy;
    const Vec2 f_fd = dudt - c.nu * lap + grad * u + Vec2(dpdx, dpdy);
    const Vec2 diff = c.forcing(p, t) - f_fd;
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

} // namespace nsdg
