#include <cmath>
#include <random>

#include "doctest.h"
#include "nsdg/quadrature.hpp"

using namespace nsdg;

namespace {

double apply(const QuadratureRule& r, const std::function<double(double)>& f) {
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) s += r.weights(i) * f(r.nodes(i, 0));
  return s;
}

// independent oracle: the moment equations sum_i w_i s_i^j = 1/(j+1)
void check_moments(const QuadratureRule& r, int up_to_degree) {
  for (int j = 0; j <= up_to_degree; ++j) {
    double s = 0.0;
    for (int i = 0; i < r.size(); ++i) s += r.weights(i) * std::pow(r.nodes(i, 0), j);
    CHECK(s == doctest::Approx(1.0 / (j + 1)).epsilon(1e-12));
  }
}

// closed form for monomials on the reference triangle
double triangle_monomial(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

} // namespace

TEST_CASE("gauss-radau-left frozen small rules") {
  const auto r1 = gauss_radau_left(1);
  CHECK(r1.nodes(0, 0) == 0.0);
  CHECK(r1.weights(0) == doctest::Approx(1.0).epsilon(1e-15));

  const auto r2 = gauss_radau_left(2);
  CHECK(r2.nodes(0, 0) == 0.0);
  CHECK(r2.nodes(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r2.weights(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r2.weights(1) == doctest::Approx(0.75).epsilon(1e-14));

  const auto r3 = gauss_radau_left(3);
  const double s6 = std::sqrt(6.0);
  CHECK(r3.nodes(1, 0) == doctest::Approx((6.0 - s6) / 10.0).epsilon(1e-14));
  CHECK(r3.nodes(2, 0) == doctest::Approx((6.0 + s6) / 10.0).epsilon(1e-14));
  CHECK(r3.weights(0) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  CHECK(r3.weights(1) == doctest::Approx((16.0 + s6) / 36.0).epsilon(1e-14));
  CHECK(r3.weights(2) == doctest::Approx((16.0 - s6) / 36.0).epsilon(1e-14));
}

TEST_CASE("gauss-radau-left invariants and exactness") {
  for (int m = 1; m <= 8; ++m) {
    const auto r = gauss_radau_left(m);
    CHECK(r.exactness_degree == 2 * m - 2);
    CHECK(r.nodes(0, 0) == 0.0);
    double wsum = 0.0;
    for (int i = 0; i < m; ++i) {
      CHECK(r.weights(i) > 0.0);
      wsum += r.weights(i);
      if (i > 0) CHECK(r.nodes(i, 0) > r.nodes(i - 1, 0));
      CHECK(r.nodes(i, 0) < 1.0);
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    check_moments(r, 2 * m - 2);
  }
  CHECK_THROWS_AS(gauss_radau_left(0), std::invalid_argument);
}

TEST_CASE("gauss-radau random polynomials of exact degree") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int m = 1; m <= 4; ++m) {
    const auto r = gauss_radau_left(m);
    for (int trial = 0; trial < 250; ++trial) {
      std::vector<double> c(2 * m - 1);
      for (auto& x : c) x = coef(rng);
      auto poly = [&](double t) {
        double v = 0.0, p = 1.0;
        for (double ci : c) {
          v += ci * p;
          p *= t;
        }
        return v;
      };
      double exact = 0.0;
      for (size_t j = 0; j < c.size(); ++j) exact += c[j] / (j + 1);
      CHECK(apply(r, poly) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("gauss-radau under-exactness witness at degree 2m-1") {
  // p = (prod_{i>=2} (t - s_i))^2 (t - s_1) is nonnegative, vanishes at all
  // nodes, and has degree 2m-1: the rule returns 0, the true integral is not 0
  for (int m = 1; m <= 5; ++m) {
    const auto r = gauss_radau_left(m);
    auto p = [&](double t) {
      double v = t - r.nodes(0, 0);
      for (int i = 1; i < m; ++i) {
        const double d = t - r.nodes(i, 0);
        v *= d * d;
      }
      return v;
    };
    CHECK(std::abs(apply(r, p)) < 1e-14);
    const auto fine = gauss_legendre(m + 2);
    CHECK(std::abs(apply(fine, p)) > 1e-6);
  }
}

TEST_CASE("gauss-legendre") {
  const auto r1 = gauss_legendre(1);
  CHECK(r1.nodes(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.weights(0) == doctest::Approx(1.0).epsilon(1e-15));

  const auto r2 = gauss_legendre(2);
  const double d = 0.5 / std::sqrt(3.0);
  CHECK(r2.nodes(0, 0) == doctest::Approx(0.5 - d).epsilon(1e-14));
  CHECK(r2.nodes(1, 0) == doctest::Approx(0.5 + d).epsilon(1e-14));
  CHECK(r2.weights(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r2.weights(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(apply(r2, [](double t) { return t * t * t; }) ==
        doctest::Approx(0.25).epsilon(1e-15));

  for (int m = 1; m <= 10; ++m) {
    const auto r = gauss_legendre(m);
    CHECK(r.exactness_degree == 2 * m - 1);
    check_moments(r, 2 * m - 1);
    for (int i = 0; i < m; ++i) { // symmetry about 1/2
      CHECK(r.nodes(i, 0) == doctest::Approx(1.0 - r.nodes(m - 1 - i, 0)).epsilon(1e-14));
      CHECK(r.weights(i) == doctest::Approx(r.weights(m - 1 - i)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("triangle rules against the factorial oracle") {
  const auto r1 = triangle_rule(1);
  CHECK(r1.size() == 1);
  CHECK(r1.nodes(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r1.nodes(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r1.weights(0) == doctest::Approx(0.5).epsilon(1e-14));

  // int x dA = 1/6 for any rule of degree >= 1
  for (int deg = 1; deg <= 12; ++deg) {
    const auto r = triangle_rule(deg);
    double s = 0.0;
    for (int i = 0; i < r.size(); ++i) s += r.weights(i) * r.nodes(i, 0);
    CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  }

  // x^2 y^3 with a degree-5 rule: 2! 3! / 7! = 1/420
  const auto r5 = triangle_rule(5);
  double v = 0.0;
  for (int i = 0; i < r5.size(); ++i)
    v += r5.weights(i) * std::pow(r5.nodes(i, 0), 2) * std::pow(r5.nodes(i, 1), 3);
  CHECK(v == doctest::Approx(triangle_monomial(2, 3)).epsilon(1e-13));
  CHECK(triangle_monomial(2, 3) == doctest::Approx(1.0 / 420.0).epsilon(1e-15));

  // full monomial sweep up to each rule's exactness degree
  for (int deg = 0; deg <= 12; ++deg) {
    const auto r = triangle_rule(deg);
    CHECK(r.exactness_degree >= deg);
    double wsum = 0.0;
    for (int i = 0; i < r.size(); ++i) {
      CHECK(r.weights(i) > 0.0);
      wsum += r.weights(i);
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= r.exactness_degree; ++a)
      for (int b = 0; a + b <= r.exactness_degree; ++b) {
        double s = 0.0;
        for (int i = 0; i < r.size(); ++i)
          s += r.weights(i) * std::pow(r.nodes(i, 0), a) * std::pow(r.nodes(i, 1), b);
        CHECK(s == doctest::Approx(triangle_monomial(a, b)).epsilon(1e-12));
      }
  }
  CHECK_THROWS_AS(triangle_rule(21), UnsupportedDegreeError);
}

TEST_CASE("affine mapping preserves exactness and scales weights") {
  const auto base = gauss_radau_left(3);
  const double a = 0.3, b = 1.1;
  const auto mapped = map_to_interval(base, a, b);
  double wsum = 0.0;
  for (int i = 0; i < mapped.size(); ++i) wsum += mapped.weights(i);
  CHECK(wsum == doctest::Approx(b - a).epsilon(1e-14));
  // integrate t^4 (within exactness 2m-2 = 4) over [a,b]
  double s = 0.0;
  for (int i = 0; i < mapped.size(); ++i)
    s += mapped.weights(i) * std::pow(mapped.nodes(i, 0), 4);
  CHECK(s == doctest::Approx((std::pow(b, 5) - std::pow(a, 5)) / 5.0).epsilon(1e-13));
}
