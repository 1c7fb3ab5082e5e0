#include <cmath>
#include <random>

#include "doctest.h"
#include "nsdg/assembly.hpp"
#include "nsdg/manufactured.hpp"

using namespace nsdg;

namespace {

std::shared_ptr<const Mesh> shared_mesh(int n) {
  return std::make_shared<Mesh>(build_structured_mesh(n));
}

// independent facet-jump oracle built on evaluate()
double jump_sq_oracle(const VelocitySpace& vs, const VecX& c, int f) {
  const Mesh& mesh = *vs.mesh;
  const Facet& facet = mesh.facets[f];
  const QuadratureRule gl = gauss_legendre(vs.degree + 4);
  const Vec2 a = mesh.vertices[facet.vertices[0]];
  const Vec2 b = mesh.vertices[facet.vertices[1]];
  double acc = 0.0;
  for (int q = 0; q < gl.size(); ++q) {
    const Vec2 x = a + gl.nodes(q, 0) * (b - a);
    Vec2 jump = Vec2::Zero();
    for (int side = 0; side < (facet.boundary ? 1 : 2); ++side) {
      const int e = facet.elements[side];
      const Vec2 ref = vs.inv_jac[e] * (x - mesh.vertices[mesh.triangles[e][0]]);
      jump += (side == 0 ? 1.0 : -1.0) * evaluate(vs, c, e, ref).value;
    }
    acc += gl.weights(q) * facet.length * jump.squaredNorm();
  }
  return acc;
}

VecX random_vector(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  VecX v(n);
  for (int i = 0; i < n; ++i) v(i) = coef(rng);
  return v;
}

} // namespace

TEST_CASE("mass matrix: SPD and quadrature oracle") {
  std::mt19937 rng(3);
  for (int k : {1, 2}) {
    const auto mesh = shared_mesh(2);
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const PressureSpace ps = build_pressure_space(mesh, k);
    const SpatialOperators ops = assemble_spatial(vs, ps, 1.0, 10.0 * k * k);

    CHECK((MatX(ops.M) - MatX(ops.M).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    const QuadratureRule tq = triangle_rule(2 * k + 2);
    for (int trial = 0; trial < 20; ++trial) {
      const VecX u = random_vector(vs.dim, rng);
      double l2sq = 0.0;
      for (int e = 0; e < mesh->num_elements(); ++e)
        for (int q = 0; q < tq.size(); ++q) {
          const Vec2 ref(tq.nodes(q, 0), tq.nodes(q, 1));
          l2sq += tq.weights(q) * vs.det_jac[e] *
                  evaluate(vs, u, e, ref).value.squaredNorm();
        }
      const double quad = u.dot(ops.M * u);
      CHECK(quad == doctest::Approx(l2sq).epsilon(1e-12));
      CHECK(quad > 0.0);
    }
  }
}

TEST_CASE("divergence coupling reproduces the div moments") {
  std::mt19937 rng(17);
  for (int k : {1, 2}) {
    const auto mesh = shared_mesh(2);
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const PressureSpace ps = build_pressure_space(mesh, k);
    const SpatialOperators ops = assemble_spatial(vs, ps, 1.0, 10.0);
    const QuadratureRule tq = triangle_rule(2 * k + 2);

    const VecX u = random_vector(vs.dim, rng);
    const VecX Bu = ops.B * u;
    for (int e = 0; e < mesh->num_elements(); ++e)
      for (int i = 0; i < ps.local_dim; ++i) {
        double moment = 0.0;
        for (int q = 0; q < tq.size(); ++q) {
          const Vec2 ref(tq.nodes(q, 0), tq.nodes(q, 1));
          moment -= tq.weights(q) * vs.det_jac[e] * evaluate(vs, u, e, ref).divergence *
                    ps.mono.eval(ref)(i);
        }
        CHECK(Bu(ps.global_dof(e, i)) == doctest::Approx(moment).epsilon(1e-11));
      }
  }
}

TEST_CASE("diffusion matrix: symmetry, constants, coercivity") {
  for (int k : {1, 2}) {
    const auto mesh = shared_mesh(4);
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const PressureSpace ps = build_pressure_space(mesh, k);
    const double sigma = 10.0 * k * k;
    const SpatialOperators ops = assemble_spatial(vs, ps, 1.0, sigma);

    CHECK((MatX(ops.A) - MatX(ops.A).transpose()).cwiseAbs().maxCoeff() < 1e-10);

    // constant field: gradient and interior jumps vanish, so A u is zero on
    // every dof whose supporting elements stay away from the boundary
    const VecX c = rt_interpolate(vs, [](const Vec2&) { return Vec2(0.7, -0.3); });
    const VecX Ac = ops.A * c;
    const VecX cancellation = MatX(ops.A).cwiseAbs() * c.cwiseAbs();
    for (int e = 0; e < mesh->num_elements(); ++e) {
      bool near_boundary = false;
      for (int l = 0; l < 3; ++l) {
        const Facet& f = mesh->facets[mesh->element_facets[e][l]];
        near_boundary |= f.boundary;
        if (!f.boundary) {
          const int other = f.elements[0] == e ? f.elements[1] : f.elements[0];
          for (int ll = 0; ll < 3; ++ll)
            near_boundary |= mesh->facets[mesh->element_facets[other][ll]].boundary;
        }
      }
      if (near_boundary) continue;
      for (int l = 0; l < vs.local_dim; ++l) {
        const int g = vs.global_dof(e, l);
        CHECK(std::abs(Ac(g)) < 1e-11 * (1.0 + cancellation(g)));
      }
    }
  }

  // coercivity smoke test on the constrained space (n = 2 is small enough
  // for a dense eigensolve)
  for (int k : {1, 2}) {
    const auto mesh = shared_mesh(2);
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const PressureSpace ps = build_pressure_space(mesh, k);
    const SpatialOperators ops = assemble_spatial(vs, ps, 1.0, 10.0 * k * k);
    std::vector<char> constrained(vs.dim, 0);
    for (const auto& bd : vs.boundary_dofs) constrained[bd.global] = 1;
    std::vector<int> free;
    for (int i = 0; i < vs.dim; ++i)
      if (!constrained[i]) free.push_back(i);
    MatX Af(free.size(), free.size());
    const MatX Adense(ops.A);
    for (size_t i = 0; i < free.size(); ++i)
      for (size_t j = 0; j < free.size(); ++j) Af(i, j) = Adense(free[i], free[j]);
    Eigen::SelfAdjointEigenSolver<MatX> es(Af);
    CHECK(es.eigenvalues().minCoeff() > -1e-9 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("convection: zero transport reduces to the safeguard penalty") {
  std::mt19937 rng(31);
  const auto mesh = shared_mesh(2);
  for (int k : {1, 2}) {
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const double c_S = 1e-8;
    const ConvectionSnapshot snap = assemble_convection(vs, VecX::Zero(vs.dim), c_S);
    for (int f = 0; f < mesh->num_facets(); ++f)
      CHECK(snap.gamma(f) == doctest::Approx(c_S).epsilon(1e-15));
    // C is then (c_S/2) x the jump-penalty form
    for (int trial = 0; trial < 10; ++trial) {
      const VecX u = random_vector(vs.dim, rng);
      double jumps = 0.0;
      for (int f = 0; f < mesh->num_facets(); ++f)
        if (!mesh->facets[f].boundary) jumps += jump_sq_oracle(vs, u, f);
      CHECK(u.dot(snap.C * u) == doctest::Approx(0.5 * c_S * jumps).epsilon(1e-10));
    }
  }
}

TEST_CASE("convection identity c(w;u,u) = gamma seminorm for Z-transport") {
  std::mt19937 rng(41);
  for (int k : {1, 2}) {
    const auto mesh = shared_mesh(3);
    const VelocitySpace vs = build_velocity_space(mesh, k);
    // transport in Z: divergence-free with zero normal boundary trace
    const ManufacturedCase sol1 = manufactured_case("sol1", 1.0);
    const VecX w = rt_interpolate(vs, [&](const Vec2& p) { return sol1.velocity(p, 0.3); });
    const ConvectionSnapshot snap = assemble_convection(vs, w, 1e-8);
    CHECK(snap.max_abs_div < 1e-10);

    for (int trial = 0; trial < 25; ++trial) {
      const VecX u = random_vector(vs.dim, rng);
      double gamma_form = 0.0;
      for (int f = 0; f < mesh->num_facets(); ++f)
        if (!mesh->facets[f].boundary)
          gamma_form += 0.5 * snap.gamma(f) * jump_sq_oracle(vs, u, f);
      const double cuu = u.dot(snap.C * u);
      CHECK(std::abs(cuu - gamma_form) <= 1e-10 * (1.0 + u.squaredNorm()));
    }
  }
}

TEST_CASE("convection antisymmetry for constant transport on interior dofs") {
  std::mt19937 rng(43);
  const auto mesh = shared_mesh(4);
  for (int k : {1, 2}) {
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const VecX w = rt_interpolate(vs, [](const Vec2&) { return Vec2(1.0, 0.0); });
    const ConvectionSnapshot snap = assemble_convection(vs, w, 1e-8);

    // u vanishing on every boundary-adjacent element: the surviving
    // boundary term of the integration-by-parts identity then vanishes
    std::vector<char> keep(vs.dim, 1);
    for (int e = 0; e < mesh->num_elements(); ++e) {
      bool touches = false;
      for (int l = 0; l < 3; ++l)
        touches |= mesh->facets[mesh->element_facets[e][l]].boundary;
      if (!touches) continue;
      for (int l = 0; l < vs.local_dim; ++l) keep[vs.global_dof(e, l)] = 0;
    }

    for (int trial = 0; trial < 50; ++trial) {
      VecX u = random_vector(vs.dim, rng);
      for (int i = 0; i < vs.dim; ++i)
        if (!keep[i]) u(i) = 0.0;
      double gamma_form = 0.0;
      for (int f = 0; f < mesh->num_facets(); ++f)
        if (!mesh->facets[f].boundary)
          gamma_form += 0.5 * snap.gamma(f) * jump_sq_oracle(vs, u, f);
      const double skew = u.dot(snap.C * u) - gamma_form;
      CHECK(std::abs(skew) <= 1e-10 * (1.0 + u.squaredNorm()));
    }
  }
}

TEST_CASE("gamma values") {
  const auto mesh = shared_mesh(2);
  const VelocitySpace vs = build_velocity_space(mesh, 1);
  const VecX w = rt_interpolate(vs, [](const Vec2&) { return Vec2(2.0, 0.0); });
  const VecX gamma = facet_gamma(vs, w, 1e-3);
  for (int f = 0; f < mesh->num_facets(); ++f) {
    if (mesh->facets[f].boundary) continue;
    const double nx = std::abs(mesh->facets[f].normal.x());
    CHECK(gamma(f) == doctest::Approx(std::max(1e-3, 2.0 * nx)).epsilon(1e-12));
  }
}

TEST_CASE("temporal coupling matrix G") {
  // frozen example: ell = 1 on a slab of length 1
  const TimeGrid g = uniform_time_grid(1.0, 1, 1);
  const SlabBasis b = slab_basis(g, 1);
  MatX G = b.weights.asDiagonal() * b.deriv;
  G(0, 0) += 1.0;
  CHECK(G(0, 0) == doctest::Approx(5.0 / 8.0).epsilon(1e-13));
  CHECK(G(0, 1) == doctest::Approx(3.0 / 8.0).epsilon(1e-13));
  CHECK(G(1, 0) == doctest::Approx(-9.0 / 8.0).epsilon(1e-13));
  CHECK(G(1, 1) == doctest::Approx(9.0 / 8.0).epsilon(1e-13));

  // Radau quadrature of l_j' l_i equals the exact integral (degree 2l-1)
  for (int ell : {0, 1, 2, 3}) {
    const TimeGrid g2 = uniform_time_grid(0.7, 2, ell);
    const SlabBasis b2 = slab_basis(g2, 2);
    const QuadratureRule gl = map_to_interval(gauss_legendre(ell + 2), b2.t_left, b2.t_right);
    for (int i = 0; i <= ell; ++i)
      for (int j = 0; j <= ell; ++j) {
        const double viaG = b2.weights(i) * b2.deriv(i, j);
        double exact = 0.0;
        for (int q = 0; q < gl.size(); ++q) {
          const double t = gl.nodes(q, 0);
          VecX ej = VecX::Zero(ell + 1);
          ej(j) = 1.0;
          const double h = 1e-6 * b2.tau;
          const double dlj =
              (b2.eval_nodal(ej, t + h) - b2.eval_nodal(ej, t - h)) / (2.0 * h);
          exact += gl.weights(q) * dlj * b2.eval_nodal(VecX::Unit(ell + 1, i), t);
        }
        CHECK(viaG == doctest::Approx(exact).epsilon(1e-7));
      }
  }
}

TEST_CASE("m-form jump identity over random trajectories") {
  std::mt19937 rng(53);
  const auto mesh = shared_mesh(2);
  for (int k : {1, 2}) {
    const VelocitySpace vs = build_velocity_space(mesh, k);
    const PressureSpace ps = build_pressure_space(mesh, k);
    const SpatialOperators ops = assemble_spatial(vs, ps, 1.0, 10.0);
    for (int ell : {0, 1, 2}) {
      const int N = 3;
      const TimeGrid grid = uniform_time_grid(1.1, N, ell);
      std::vector<MatX> v;
      for (int n = 0; n < N; ++n) {
        MatX slab(ell + 1, vs.dim);
        for (int i = 0; i <= ell; ++i) slab.row(i) = random_vector(vs.dim, rng).transpose();
        v.push_back(slab);
      }
      // m(v, v) assembled slab-locally: sum_n v_n : (G x M) v_n minus the
      // upwind coupling with the previous slab end value
      double mvv = 0.0;
      VecX prev_end;
      for (int n = 1; n <= N; ++n) {
        const SlabBasis b = slab_basis(grid, n);
        MatX G = b.weights.asDiagonal() * b.deriv;
        G(0, 0) += 1.0;
        for (int i = 0; i <= ell; ++i)
          for (int j = 0; j <= ell; ++j)
            mvv += G(i, j) * v[n - 1].row(i).dot((ops.M * v[n - 1].row(j).transpose()));
        if (n >= 2) mvv -= v[n - 1].row(0).dot(ops.M * prev_end);
        prev_end = v[n - 1].transpose() * b.right_value;
      }
      // |v|_J^2 = (||v(T-)||^2 + sum ||[v]_n||^2 + ||v(0+)||^2) / 2
      double jump_sq = 0.0;
      {
        const SlabBasis bN = slab_basis(grid, N);
        const VecX vT = v[N - 1].transpose() * bN.right_value;
        jump_sq += vT.dot(ops.M * vT);
        const VecX v0 = v[0].row(0).transpose();
        jump_sq += v0.dot(ops.M * v0);
        for (int n = 1; n < N; ++n) {
          const SlabBasis b = slab_basis(grid, n);
          const VecX jump = v[n - 1].transpose() * b.right_value - v[n].row(0).transpose();
          jump_sq += jump.dot(ops.M * jump);
        }
      }
      CHECK(mvv == doctest::Approx(0.5 * jump_sq).epsilon(1e-10));
    }
  }
}

TEST_CASE("slab system shape and error paths") {
  const auto mesh = shared_mesh(1);
  const VelocitySpace vs = build_velocity_space(mesh, 1);
  const PressureSpace ps = build_pressure_space(mesh, 1);
  const SpatialOperators ops = assemble_spatial(vs, ps, 1.0, 10.0);
  const TimeGrid grid = uniform_time_grid(1.0, 1, 1);
  const SlabBasis basis = slab_basis(grid, 1);

  std::vector<ConvectionSnapshot> conv;
  conv.push_back(assemble_convection(vs, VecX::Zero(vs.dim), 1e-8));
  conv.push_back(assemble_convection(vs, VecX::Zero(vs.dim), 1e-8));

  SlabProblem prob;
  prob.forcing = [](const Vec2&, double) { return Vec2(0.0, 0.0); };
  prob.prev_end = VecX::Zero(vs.dim);
  const SlabSystem sys = build_slab_system(ops, vs, ps, basis, conv, prob);
  CHECK(sys.size() == 2 * (vs.dim + ps.dim + 1));
  CHECK(sys.matrix.rows() == sys.size());

  std::vector<ConvectionSnapshot> short_conv(1, conv[0]);
  CHECK_THROWS_AS(build_slab_system(ops, vs, ps, basis, short_conv, prob),
                  std::invalid_argument);
  SlabProblem bad = prob;
  bad.prev_end = VecX::Zero(3);
  CHECK_THROWS_AS(build_slab_system(ops, vs, ps, basis, conv, bad), std::invalid_argument);
}
