#include "nsdg/analysis.hpp"

#include <cmath>

namespace nsdg {

namespace {

void phys_values(const VelocitySpace& vs, int e, const MatX& ref_val, MatX& out) {
  out.noalias() = (vs.jac[e] * ref_val) / vs.det_jac[e];
}

void phys_gradients(const VelocitySpace& vs, int e, const MatX& ref_grad, MatX& out) {
  const Mat2& J = vs.jac[e];
  const Mat2& K = vs.inv_jac[e];
  const double inv_det = 1.0 / vs.det_jac[e];
  const auto a = ref_grad.row(0), b = ref_grad.row(1);
  const auto c = ref_grad.row(2), d = ref_grad.row(3);
  const Eigen::RowVectorXd e0 = J(0, 0) * a + J(0, 1) * c;
  const Eigen::RowVectorXd e1 = J(0, 0) * b + J(0, 1) * d;
  const Eigen::RowVectorXd e2 = J(1, 0) * a + J(1, 1) * c;
  const Eigen::RowVectorXd e3 = J(1, 0) * b + J(1, 1) * d;
  out.resize(4, ref_grad.cols());
  out.row(0) = (e0 * K(0, 0) + e1 * K(1, 0)) * inv_det;
  out.row(1) = (e0 * K(0, 1) + e1 * K(1, 1)) * inv_det;
  out.row(2) = (e2 * K(0, 0) + e3 * K(1, 0)) * inv_det;
  out.row(3) = (e2 * K(0, 1) + e3 * K(1, 1)) * inv_det;
}

VecX local_coeffs(const VelocitySpace& vs, int e, const VecX& global) {
  VecX c(vs.local_dim);
  for (int l = 0; l < vs.local_dim; ++l)
    c(l) = vs.sign(e, l) * global(vs.global_dof(e, l));
  return c;
}

// Sample times for the L-infinity norm: Radau nodes, both slab endpoints,
// and ell+3 equispaced interior points.
std::vector<double> linf_samples(const SlabBasis& basis) {
  std::vector<double> ts;
  for (int i = 0; i < basis.num_nodes(); ++i) ts.push_back(basis.nodes(i));
  ts.push_back(basis.t_left);
  ts.push_back(basis.t_right);
  const int extra = basis.num_nodes() + 2;
  for (int j = 1; j <= extra; ++j)
    ts.push_back(basis.t_left + basis.tau * j / (extra + 1.0));
  return ts;
}

double jump_norm_sq(const VelocitySpace& vs, const VecX& coeffs, int facet) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  const Facet& f = mesh.facets[facet];
  const FacetSide sp = facet_side(mesh, facet, 0);
  const FacetSide sm = facet_side(mesh, facet, 1);
  const VecX cp = local_coeffs(vs, sp.element, coeffs);
  const VecX cm = local_coeffs(vs, sm.element, coeffs);
  MatX vp, vm;
  double acc = 0.0;
  for (int q = 0; q < tb.facet.size(); ++q) {
    phys_values(vs, sp.element, tb.edge_value[sp.local_edge][sp.reversed ? 1 : 0][q], vp);
    phys_values(vs, sm.element, tb.edge_value[sm.local_edge][sm.reversed ? 1 : 0][q], vm);
    const Vec2 jump = vp * cp - vm * cm;
    acc += tb.facet.weights(q) * f.length * jump.squaredNorm();
  }
  return acc;
}

} // namespace

double velocity_l2_error(const VelocitySpace& vs, const VecX& coeffs,
                         const SpatialField& reference) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  double acc = 0.0;
  MatX V;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const VecX loc = local_coeffs(vs, e, coeffs);
    const double detJ = vs.det_jac[e];
    for (int q = 0; q < tb.vol.size(); ++q) {
      phys_values(vs, e, tb.vol_value[q], V);
      const Vec2 ref(tb.vol.nodes(q, 0), tb.vol.nodes(q, 1));
      const Vec2 diff = V * loc - reference(vs.map_point(e, ref));
      acc += tb.vol.weights(q) * detJ * diff.squaredNorm();
    }
  }
  return std::sqrt(acc);
}

namespace {

// ||e||_{A,h}^2 at a fixed time: broken gradient mismatch plus
// sigma/h_F-weighted interior jumps. Boundary facets are excluded from the
// error functional: with weakly imposed Dirichlet data their contribution
// measures the data imposition (it is nu-scaled in the scheme), and the
// reported nu-robustness behavior holds for the interior quantity.
double a_seminorm_error_sq(const VelocitySpace& vs, const VecX& coeffs,
                           const ManufacturedCase& exact, double t, double sigma) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  double acc = 0.0;
  MatX G;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const VecX loc = local_coeffs(vs, e, coeffs);
    const double detJ = vs.det_jac[e];
    for (int q = 0; q < tb.vol.size(); ++q) {
      phys_gradients(vs, e, tb.vol_grad[q], G);
      const Vec2 ref(tb.vol.nodes(q, 0), tb.vol.nodes(q, 1));
      const Mat2 ge = exact.velocity_gradient(vs.map_point(e, ref), t);
      Mat2 gh;
      gh(0, 0) = G.row(0).dot(loc);
      gh(0, 1) = G.row(1).dot(loc);
      gh(1, 0) = G.row(2).dot(loc);
      gh(1, 1) = G.row(3).dot(loc);
      acc += tb.vol.weights(q) * detJ * (gh - ge).squaredNorm();
    }
  }
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (facet.boundary) continue;
    acc += (sigma / facet.length) * jump_norm_sq(vs, coeffs, f);
  }
  return acc;
}

} // namespace

double divergence_norm(const VelocitySpace& vs, const Trajectory& traj) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  double worst = 0.0;
  for (size_t n = 0; n < traj.velocity.size(); ++n) {
    for (int i = 0; i < traj.velocity[n].rows(); ++i) {
      const VecX coeffs = traj.velocity[n].row(i).transpose();
      double acc = 0.0;
      for (int e = 0; e < mesh.num_elements(); ++e) {
        const VecX loc = local_coeffs(vs, e, coeffs);
        const double detJ = vs.det_jac[e];
        for (int q = 0; q < tb.vol.size(); ++q) {
          const double d = tb.vol_div[q].dot(loc) / detJ;
          acc += tb.vol.weights(q) * detJ * d * d;
        }
      }
      worst = std::max(worst, std::sqrt(acc));
    }
  }
  return worst;
}

ErrorReport error_energy(const VelocitySpace& vs, const PressureSpace& ps,
                         const Trajectory& traj, const ManufacturedCase& exact) {
  ErrorReport rep;
  const int N = traj.grid.num_slabs();
  const QuadratureRule gl = gauss_legendre(traj.grid.degree + 3);

  for (int n = 1; n <= N; ++n) {
    const SlabBasis basis = slab_basis(traj.grid, n);

    double slab_linf = 0.0;
    for (const double t : linf_samples(basis)) {
      const VecX coeffs = traj.velocity_at(basis, n, t);
      const double err = velocity_l2_error(
          vs, coeffs, [&](const Vec2& x) { return exact.velocity(x, t); });
      slab_linf = std::max(slab_linf, err);
      rep.velocity_scale = std::max(
          rep.velocity_scale,
          velocity_l2_error(vs, coeffs, [](const Vec2&) { return Vec2(0.0, 0.0); }));
    }
    rep.slab_linf.push_back(slab_linf);
    rep.linf_l2_velocity = std::max(rep.linf_l2_velocity, slab_linf);

    double a_sq = 0.0;
    for (int q = 0; q < gl.size(); ++q) {
      const double t = basis.t_left + basis.tau * gl.nodes(q, 0);
      const VecX coeffs = traj.velocity_at(basis, n, t);
      a_sq += basis.tau * gl.weights(q) *
              a_seminorm_error_sq(vs, coeffs, exact, t, traj.sigma);
    }
    rep.slab_a_sq.push_back(exact.nu * a_sq);
    rep.a_norm_sq_weighted += exact.nu * a_sq;

    // gamma term with the weights the scheme actually ran with; hand-built
    // trajectories fall back to recomputing them from the transport field
    const bool stored = static_cast<int>(traj.gamma.size()) >= n;
    MatX w;
    if (!stored) w = transport_nodal(traj, n);
    double gamma_sq = 0.0;
    for (int i = 0; i < basis.num_nodes(); ++i) {
      const VecX gamma = stored ? VecX(traj.gamma[n - 1].row(i).transpose())
                                : facet_gamma(vs, w.row(i).transpose(), traj.c_s);
      const VecX coeffs = traj.velocity[n - 1].row(i).transpose();
      double node_sum = 0.0;
      for (int f = 0; f < vs.mesh->num_facets(); ++f) {
        if (vs.mesh->facets[f].boundary) continue;
        node_sum += gamma(f) * jump_norm_sq(vs, coeffs, f);
      }
      gamma_sq += basis.weights(i) * node_sum;
    }
    rep.slab_gamma_sq.push_back(gamma_sq);
    rep.gamma_jump_sq += gamma_sq;
  }

  rep.err_u = std::sqrt(rep.linf_l2_velocity * rep.linf_l2_velocity +
                        rep.a_norm_sq_weighted + rep.gamma_jump_sq);
  rep.pressure_l2_final = error_pressure_final(ps, traj, exact);
  rep.max_divergence = divergence_norm(vs, traj);
  return rep;
}

double error_pressure_final(const PressureSpace& ps, const Trajectory& traj,
                            const ManufacturedCase& exact) {
  const Mesh& mesh = *ps.mesh;
  const int N = traj.grid.num_slabs();
  const SlabBasis basis = slab_basis(traj.grid, N);
  const double T = traj.grid.final_time();
  const VecX ph = traj.pressure[N - 1].transpose() * basis.right_value;

  double area = 0.0;
  for (double a : mesh.element_area) area += a;
  const double mean_h = ps.mean_vector.dot(ph) / area;

  const QuadratureRule tq = triangle_rule(2 * ps.degree + 4);
  double mean_ex = 0.0;
  std::vector<VecX> mono_at(tq.size());
  for (int q = 0; q < tq.size(); ++q)
    mono_at[q] = ps.mono.eval(Vec2(tq.nodes(q, 0), tq.nodes(q, 1)));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double detJ = 2.0 * mesh.element_area[e];
    const auto& tri = mesh.triangles[e];
    for (int q = 0; q < tq.size(); ++q) {
      const Vec2 ref(tq.nodes(q, 0), tq.nodes(q, 1));
      const Vec2 x = mesh.vertices[tri[0]] +
                     (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) * ref.x() +
                     (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]) * ref.y();
      mean_ex += tq.weights(q) * detJ * exact.pressure(x, T);
    }
  }
  mean_ex /= area;

  double acc = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double detJ = 2.0 * mesh.element_area[e];
    const auto& tri = mesh.triangles[e];
    for (int q = 0; q < tq.size(); ++q) {
      const Vec2 ref(tq.nodes(q, 0), tq.nodes(q, 1));
      const Vec2 x = mesh.vertices[tri[0]] +
                     (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) * ref.x() +
                     (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]) * ref.y();
      double vh = 0.0;
      for (int i = 0; i < ps.local_dim; ++i)
        vh += ph(ps.global_dof(e, i)) * mono_at[q](i);
      const double diff = (vh - mean_h) - (exact.pressure(x, T) - mean_ex);
      acc += tq.weights(q) * detJ * diff * diff;
    }
  }
  return std::sqrt(acc);
}

std::vector<double> convergence_rates(const std::vector<double>& errors,
                                      const std::vector<double>& sizes) {
  if (errors.size() != sizes.size() || errors.size() < 2)
    throw std::invalid_argument("convergence_rates: need matching lists of length >= 2");
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0)) throw std::invalid_argument("convergence_rates: errors must be positive");
    if (!(sizes[i] > 0.0)) throw std::invalid_argument("convergence_rates: sizes must be positive");
    if (i > 0 && !(sizes[i] < sizes[i - 1]))
      throw std::invalid_argument("convergence_rates: sizes must be strictly decreasing");
  }
  std::vector<double> rates;
  for (size_t i = 0; i + 1 < errors.size(); ++i)
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(sizes[i] / sizes[i + 1]));
  return rates;
}

double trajectory_linf_l2_distance(const VelocitySpace& vs, const Trajectory& a,
                                   const Trajectory& b) {
  if (a.grid.num_slabs() != b.grid.num_slabs() || a.velocity.size() != b.velocity.size())
    throw std::invalid_argument("trajectory_linf_l2_distance: incompatible trajectories");
  double worst = 0.0;
  for (int n = 1; n <= a.grid.num_slabs(); ++n) {
    const SlabBasis basis = slab_basis(a.grid, n);
    for (const double t : linf_samples(basis)) {
      const VecX ca = a.velocity_at(basis, n, t);
      const VecX cb = b.velocity_at(basis, n, t);
      // both fields live in the same space: the distance is a plain L2 norm
      const VecX diff = ca - cb;
      double acc = 0.0;
      const Mesh& mesh = *vs.mesh;
      const BasisTables& tb = *vs.tables;
      MatX V;
      for (int e = 0; e < mesh.num_elements(); ++e) {
        const VecX loc = local_coeffs(vs, e, diff);
        for (int q = 0; q < tb.vol.size(); ++q) {
          phys_values(vs, e, tb.vol_value[q], V);
          acc += tb.vol.weights(q) * vs.det_jac[e] * (V * loc).squaredNorm();
        }
      }
      worst = std::max(worst, std::sqrt(acc));
    }
  }
  return worst;
}

} // namespace nsdg
