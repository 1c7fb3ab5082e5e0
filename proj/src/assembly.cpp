#include "nsdg/assembly.hpp"

#include <cstdlib>
#include <functional>
#include <iostream>
#include <thread>

namespace nsdg {

namespace {

int env_threads() {
  if (const char* s = std::getenv("NSDG_THREADS")) {
    const int n = std::atoi(s);
    if (n >= 1) return n;
  }
  return 1;
}

// Piola-transformed basis values at a cached reference table (2 x dim).
void phys_values(const VelocitySpace& vs, int e, const MatX& ref_val, MatX& out) {
  out.noalias() = (vs.jac[e] * ref_val) / vs.det_jac[e];
}

// Physical gradients as rows (dxVx, dyVx, dxVy, dyVy); ref_grad carries the
// reference-gradient rows in the same order.
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

VecX element_signs(const VelocitySpace& vs, int e) {
  VecX s(vs.local_dim);
  for (int l = 0; l < vs.local_dim; ++l) s(l) = vs.sign(e, l);
  return s;
}

VecX local_coeffs(const VelocitySpace& vs, int e, const VecX& global) {
  VecX c(vs.local_dim);
  for (int l = 0; l < vs.local_dim; ++l)
    c(l) = vs.sign(e, l) * global(vs.global_dof(e, l));
  return c;
}

struct SideData {
  int elem = -1;
  int dir = 0; // 0: local traversal matches global low->high, 1: reversed
  int edge = 0;
  VecX signs;
};

SideData side_data(const VelocitySpace& vs, int facet, int side) {
  const FacetSide fs = facet_side(*vs.mesh, facet, side);
  SideData sd;
  sd.elem = fs.element;
  if (sd.elem < 0) return sd;
  sd.edge = fs.local_edge;
  sd.dir = fs.reversed ? 1 : 0;
  sd.signs = element_signs(vs, sd.elem);
  return sd;
}

} // namespace

SpatialOperators assemble_spatial(const VelocitySpace& vs, const PressureSpace& ps,
                                  double nu, double sigma) {
  if (vs.mesh != ps.mesh && vs.mesh.get() != ps.mesh.get())
    throw std::invalid_argument("assemble_spatial: spaces built on different meshes");
  if (sigma <= 0.0) throw std::invalid_argument("assemble_spatial: sigma must be positive");

  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  const int dim = vs.local_dim;
  const int T = mesh.num_elements();

  std::vector<Triplet> tm, ta, tbp;
  const int nthreads = env_threads();

  auto element_range = [&](int begin, int end, std::vector<Triplet>& out_m,
                           std::vector<Triplet>& out_a, std::vector<Triplet>& out_b) {
    MatX V, G, Mloc(dim, dim), Aloc(dim, dim), Bloc(ps.local_dim, dim);
    for (int e = begin; e < end; ++e) {
      Mloc.setZero();
      Aloc.setZero();
      Bloc.setZero();
      const double detJ = vs.det_jac[e];
      for (int q = 0; q < tb.vol.size(); ++q) {
        const double w = tb.vol.weights(q) * detJ;
        phys_values(vs, e, tb.vol_value[q], V);
        phys_gradients(vs, e, tb.vol_grad[q], G);
        Mloc.noalias() += w * (V.transpose() * V);
        Aloc.noalias() += w * (G.transpose() * G);
        // div_phys * detJ = div_ref, so the detJ factors cancel
        Bloc.noalias() -=
            tb.vol.weights(q) * (ps.vol_value[q] * tb.vol_div[q].transpose());
      }
      const VecX s = element_signs(vs, e);
      for (int i = 0; i < dim; ++i) {
        const int gi = vs.global_dof(e, i);
        for (int j = 0; j < dim; ++j) {
          const int gj = vs.global_dof(e, j);
          const double ss = s(i) * s(j);
          out_m.emplace_back(gi, gj, ss * Mloc(i, j));
          out_a.emplace_back(gi, gj, ss * Aloc(i, j));
        }
      }
      for (int qi = 0; qi < ps.local_dim; ++qi)
        for (int j = 0; j < dim; ++j)
          out_b.emplace_back(ps.global_dof(e, qi), vs.global_dof(e, j),
                             s(j) * Bloc(qi, j));
    }
  };

  if (nthreads <= 1) {
    element_range(0, T, tm, ta, tbp);
  } else {
    std::vector<std::vector<Triplet>> pm(nthreads), pa(nthreads), pb(nthreads);
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
      const int b = T * t / nthreads, en = T * (t + 1) / nthreads;
      pool.emplace_back(element_range, b, en, std::ref(pm[t]), std::ref(pa[t]),
                        std::ref(pb[t]));
    }
    for (auto& th : pool) th.join();
    for (int t = 0; t < nthreads; ++t) {
      tm.insert(tm.end(), pm[t].begin(), pm[t].end());
      ta.insert(ta.end(), pa[t].begin(), pa[t].end());
      tbp.insert(tbp.end(), pb[t].begin(), pb[t].end());
    }
  }

  // interior-penalty facet terms of A
  MatX val[2], grad[2], gradn[2];
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    const int nsides = facet.boundary ? 1 : 2;
    const double alpha = facet.boundary ? 1.0 : 0.5;
    const Vec2 n = facet.normal;
    SideData sd[2];
    for (int s = 0; s < nsides; ++s) sd[s] = side_data(vs, f, s);

    MatX block[2][2];
    for (int s1 = 0; s1 < nsides; ++s1)
      for (int s2 = 0; s2 < nsides; ++s2) block[s1][s2] = MatX::Zero(dim, dim);

    for (int q = 0; q < tb.facet.size(); ++q) {
      const double w = tb.facet.weights(q) * facet.length;
      for (int s = 0; s < nsides; ++s) {
        phys_values(vs, sd[s].elem, tb.edge_value[sd[s].edge][sd[s].dir][q], val[s]);
        phys_gradients(vs, sd[s].elem, tb.edge_grad[sd[s].edge][sd[s].dir][q], grad[s]);
        gradn[s].resize(2, dim);
        gradn[s].row(0) = grad[s].row(0) * n.x() + grad[s].row(1) * n.y();
        gradn[s].row(1) = grad[s].row(2) * n.x() + grad[s].row(3) * n.y();
      }
      for (int s1 = 0; s1 < nsides; ++s1) {
        const double z1 = (s1 == 0) ? 1.0 : -1.0;
        for (int s2 = 0; s2 < nsides; ++s2) {
          const double z2 = (s2 == 0) ? 1.0 : -1.0;
          block[s1][s2].noalias() +=
              w * (-alpha * z1 * (val[s1].transpose() * gradn[s2]) -
                   alpha * z2 * (gradn[s1].transpose() * val[s2]) +
                   (sigma / facet.length) * z1 * z2 * (val[s1].transpose() * val[s2]));
        }
      }
    }
    for (int s1 = 0; s1 < nsides; ++s1)
      for (int s2 = 0; s2 < nsides; ++s2)
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j)
            ta.emplace_back(vs.global_dof(sd[s1].elem, i), vs.global_dof(sd[s2].elem, j),
                            sd[s1].signs(i) * sd[s2].signs(j) * block[s1][s2](i, j));
  }

  SpatialOperators ops;
  ops.nu = nu;
  ops.sigma = sigma;
  ops.M.resize(vs.dim, vs.dim);
  ops.M.setFromTriplets(tm.begin(), tm.end());
  ops.A.resize(vs.dim, vs.dim);
  ops.A.setFromTriplets(ta.begin(), ta.end());
  ops.B.resize(ps.dim, vs.dim);
  ops.B.setFromTriplets(tbp.begin(), tbp.end());
  ops.mean = ps.mean_vector;
  return ops;
}

ConvectionOperator::ConvectionOperator(const VelocitySpace& vs, double c_S)
    : vs_(vs), c_S_(c_S) {
  if (c_S <= 0.0)
    throw std::invalid_argument("ConvectionOperator: safeguard c_S must be positive");
  const Mesh& mesh = *vs.mesh;
  const int dim = vs.local_dim;
  gamma_ = VecX::Constant(mesh.num_facets(), c_S);

  // pattern pass
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_elements() * dim * dim + mesh.num_interior_facets * 4 * dim * dim);
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        trip.emplace_back(vs.global_dof(e, i), vs.global_dof(e, j), 0.0);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    if (mesh.facets[f].boundary) continue;
    const int ep = mesh.facets[f].elements[0], em = mesh.facets[f].elements[1];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        trip.emplace_back(vs.global_dof(ep, i), vs.global_dof(ep, j), 0.0);
        trip.emplace_back(vs.global_dof(ep, i), vs.global_dof(em, j), 0.0);
        trip.emplace_back(vs.global_dof(em, i), vs.global_dof(ep, j), 0.0);
        trip.emplace_back(vs.global_dof(em, i), vs.global_dof(em, j), 0.0);
      }
  }
  C_.resize(vs.dim, vs.dim);
  C_.setFromTriplets(trip.begin(), trip.end());
  C_.makeCompressed();

  // record value positions in the exact order assemble() walks them
  slots_.reserve(trip.size());
  double* base = C_.valuePtr();
  auto record = [&](int r, int c, double) {
    slots_.push_back(&C_.coeffRef(r, c) - base);
  };
  walk(VecX::Zero(vs.dim), record, false);
}

// The core convection walk shares one code path between pattern recording
// and value assembly, so the slot order always matches.
template <class Emit>
void convection_walk(const VelocitySpace& vs, const VecX& w, double c_S, Emit&& emit,
                     bool compute_gamma, VecX* gamma, double* max_abs_div) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  const int dim = vs.local_dim;

  MatX V, G, Gw(2, dim), block(dim, dim);
  double maxdiv = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const VecX wloc = local_coeffs(vs, e, w);
    const double detJ = vs.det_jac[e];
    block.setZero();
    for (int q = 0; q < tb.vol.size(); ++q) {
      const double wq = tb.vol.weights(q) * detJ;
      phys_values(vs, e, tb.vol_value[q], V);
      phys_gradients(vs, e, tb.vol_grad[q], G);
      const Vec2 wval = V * wloc;
      maxdiv = std::max(maxdiv, std::abs(tb.vol_div[q].dot(wloc)) / detJ);
      Gw.row(0) = G.row(0) * wval.x() + G.row(1) * wval.y();
      Gw.row(1) = G.row(2) * wval.x() + G.row(3) * wval.y();
      block.noalias() += wq * (V.transpose() * Gw);
    }
    const VecX s = element_signs(vs, e);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        emit(vs.global_dof(e, i), vs.global_dof(e, j), s(i) * s(j) * block(i, j));
  }

  MatX val[2];
  MatX fblock[2][2];
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (facet.boundary) continue;
    SideData sd[2] = {side_data(vs, f, 0), side_data(vs, f, 1)};
    const Vec2 n = facet.normal;
    const VecX wp = local_coeffs(vs, sd[0].elem, w);

    double gf = c_S;
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) fblock[s1][s2] = MatX::Zero(dim, dim);

    for (int q = 0; q < tb.facet.size(); ++q) {
      const double wq = tb.facet.weights(q) * facet.length;
      for (int s = 0; s < 2; ++s)
        phys_values(vs, sd[s].elem, tb.edge_value[sd[s].edge][sd[s].dir][q], val[s]);
      const double wn = (val[0] * wp).dot(n);
      if (compute_gamma) gf = std::max(gf, std::abs(wn));
      for (int s1 = 0; s1 < 2; ++s1) {
        const double z1 = (s1 == 0) ? 1.0 : -1.0;
        for (int s2 = 0; s2 < 2; ++s2) {
          const double z2 = (s2 == 0) ? 1.0 : -1.0;
          fblock[s1][s2].noalias() +=
              (-wq * wn * 0.5 * z2) * (val[s1].transpose() * val[s2]);
        }
      }
    }
    if (compute_gamma) (*gamma)(f) = gf;
    const double g_pen = compute_gamma ? gf : c_S;
    // gamma-penalty 1/2 gamma ([u],[v]); its facet integrand is degree
    // 2k+2 and the facet rule is exact for it
    for (int q = 0; q < tb.facet.size(); ++q) {
      const double wq = tb.facet.weights(q) * facet.length;
      for (int s = 0; s < 2; ++s)
        phys_values(vs, sd[s].elem, tb.edge_value[sd[s].edge][sd[s].dir][q], val[s]);
      for (int s1 = 0; s1 < 2; ++s1) {
        const double z1 = (s1 == 0) ? 1.0 : -1.0;
        for (int s2 = 0; s2 < 2; ++s2) {
          const double z2 = (s2 == 0) ? 1.0 : -1.0;
          fblock[s1][s2].noalias() +=
              (0.5 * g_pen * wq * z1 * z2) * (val[s1].transpose() * val[s2]);
        }
      }
    }
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2)
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j)
            emit(vs.global_dof(sd[s1].elem, i), vs.global_dof(sd[s2].elem, j),
                 sd[s1].signs(i) * sd[s2].signs(j) * fblock[s1][s2](i, j));
  }
  if (max_abs_div) *max_abs_div = maxdiv;
}

void ConvectionOperator::walk(const VecX& w, const std::function<void(int, int, double)>& emit,
                              bool values) {
  convection_walk(vs_, w, c_S_, emit, values, &gamma_, &max_abs_div_);
}

void ConvectionOperator::assemble(const VecX& w) {
  std::fill(C_.valuePtr(), C_.valuePtr() + C_.nonZeros(), 0.0);
  gamma_.setConstant(c_S_);
  size_t cursor = 0;
  double* base = C_.valuePtr();
  auto add = [&](int, int, double v) { base[slots_[cursor++]] += v; };
  walk(w, add, true);
  double wnorm = 0.0;
  for (int i = 0; i < w.size(); ++i) wnorm = std::max(wnorm, std::abs(w(i)));
  if (!warned_ && max_abs_div_ > 1e-10 * (1.0 + wnorm)) {
    std::cerr << "nsdg: warning: convection transport field has |div w| = "
              << max_abs_div_ << "\n";
    warned_ = true;
  }
}

VecX facet_gamma(const VelocitySpace& vs, const VecX& w, double c_S) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  VecX gamma = VecX::Constant(mesh.num_facets(), c_S);
  MatX val;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (facet.boundary) continue;
    const SideData sd = side_data(vs, f, 0);
    const VecX wp = local_coeffs(vs, sd.elem, w);
    double g = c_S;
    for (int q = 0; q < tb.facet.size(); ++q) {
      phys_values(vs, sd.elem, tb.edge_value[sd.edge][sd.dir][q], val);
      g = std::max(g, std::abs((val * wp).dot(facet.normal)));
    }
    gamma(f) = g;
  }
  return gamma;
}

ConvectionSnapshot assemble_convection(const VelocitySpace& vs, const VecX& w, double c_S) {
  if (w.size() != vs.dim)
    throw std::invalid_argument("assemble_convection: coefficient vector has wrong length");
  ConvectionOperator op(vs, c_S);
  op.assemble(w);
  ConvectionSnapshot snap;
  snap.C = op.matrix();
  snap.gamma = op.gamma();
  snap.max_abs_div = op.max_abs_div();
  return snap;
}

VecX assemble_load(const VelocitySpace& vs, const SpatialField& f) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  VecX load = VecX::Zero(vs.dim);
  MatX V;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double detJ = vs.det_jac[e];
    VecX loc = VecX::Zero(vs.local_dim);
    for (int q = 0; q < tb.vol.size(); ++q) {
      const Vec2 ref(tb.vol.nodes(q, 0), tb.vol.nodes(q, 1));
      const Vec2 fx = f(vs.map_point(e, ref));
      phys_values(vs, e, tb.vol_value[q], V);
      loc.noalias() += (tb.vol.weights(q) * detJ) * (V.transpose() * fx);
    }
    for (int l = 0; l < vs.local_dim; ++l)
      load(vs.global_dof(e, l)) += vs.sign(e, l) * loc(l);
  }
  return load;
}

VecX assemble_boundary_ip_rhs(const VelocitySpace& vs, const SpatialField& g,
                              double nu, double sigma) {
  const Mesh& mesh = *vs.mesh;
  const BasisTables& tb = *vs.tables;
  VecX rhs = VecX::Zero(vs.dim);
  MatX val, grad, gradn(2, vs.local_dim);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    if (!facet.boundary) continue;
    const SideData sd = side_data(vs, f, 0);
    const Vec2 a = mesh.vertices[facet.vertices[0]];
    const Vec2 b = mesh.vertices[facet.vertices[1]];
    const Vec2 n = facet.normal;
    VecX loc = VecX::Zero(vs.local_dim);
    for (int q = 0; q < tb.facet.size(); ++q) {
      const double s = tb.facet.nodes(q, 0);
      const double w = tb.facet.weights(q) * facet.length;
      const Vec2 gx = g(a + s * (b - a));
      phys_values(vs, sd.elem, tb.edge_value[sd.edge][sd.dir][q], val);
      phys_gradients(vs, sd.elem, tb.edge_grad[sd.edge][sd.dir][q], grad);
      gradn.row(0) = grad.row(0) * n.x() + grad.row(1) * n.y();
      gradn.row(1) = grad.row(2) * n.x() + grad.row(3) * n.y();
      loc.noalias() += (w * nu) * (-(gradn.transpose() * gx) +
                                   (sigma / facet.length) * (val.transpose() * gx));
    }
    for (int l = 0; l < vs.local_dim; ++l)
      rhs(vs.global_dof(sd.elem, l)) += sd.signs(l) * loc(l);
  }
  return rhs;
}

VecX boundary_lift_values(const VelocitySpace& vs, const SpatialField& g) {
  const Mesh& mesh = *vs.mesh;
  const QuadratureRule gl = gauss_legendre(vs.degree + 3);
  VecX values = VecX::Zero(static_cast<int>(vs.boundary_dofs.size()));
  for (size_t i = 0; i < vs.boundary_dofs.size(); ++i) {
    const auto& bd = vs.boundary_dofs[i];
    const Facet& facet = mesh.facets[bd.facet];
    const Vec2 a = mesh.vertices[facet.vertices[0]];
    const Vec2 b = mesh.vertices[facet.vertices[1]];
    double v = 0.0;
    for (int q = 0; q < gl.size(); ++q) {
      const double s = gl.nodes(q, 0);
      v += gl.weights(q) * facet.length * g(a + s * (b - a)).dot(facet.normal) *
           legendre01(bd.moment, s);
    }
    values(static_cast<int>(i)) = v;
  }
  return values;
}

SlabSystem build_slab_system(const SpatialOperators& ops, const VelocitySpace& vs,
                             const PressureSpace& ps, const SlabBasis& basis,
                             const std::vector<ConvectionSnapshot>& convection,
                             const SlabProblem& problem) {
  const int m = basis.num_nodes();
  if (static_cast<int>(convection.size()) != m)
    throw std::invalid_argument("build_slab_system: need one convection snapshot per node");
  if (problem.prev_end.size() != vs.dim)
    throw std::invalid_argument("build_slab_system: prev_end has wrong length");

  SlabSystem sys;
  sys.nv = vs.dim;
  sys.nq = ps.dim;
  sys.nodes = m;
  const int size = sys.size();

  sys.constrained.assign(size, 0);
  sys.constrained_values = VecX::Zero(size);
  for (int i = 0; i < m; ++i) {
    VecX lift;
    if (problem.dirichlet) {
      const double t = basis.nodes(i);
      lift = boundary_lift_values(vs, [&](const Vec2& x) { return problem.dirichlet(x, t); });
    }
    for (size_t bi = 0; bi < vs.boundary_dofs.size(); ++bi) {
      const int idx = sys.u_index(i, vs.boundary_dofs[bi].global);
      sys.constrained[idx] = 1;
      sys.constrained_values(idx) = problem.dirichlet ? lift(static_cast<int>(bi)) : 0.0;
    }
  }

  sys.rhs = VecX::Zero(size);
  for (int i = 0; i < m; ++i) {
    const double t = basis.nodes(i);
    const VecX load = assemble_load(vs, [&](const Vec2& x) { return problem.forcing(x, t); });
    sys.rhs.segment(sys.u_index(i, 0), sys.nv) += basis.weights(i) * load;
    if (problem.dirichlet) {
      const VecX bip = assemble_boundary_ip_rhs(
          vs, [&](const Vec2& x) { return problem.dirichlet(x, t); }, ops.nu, ops.sigma);
      sys.rhs.segment(sys.u_index(i, 0), sys.nv) += basis.weights(i) * bip;
    }
  }
  sys.rhs.segment(sys.u_index(0, 0), sys.nv) += ops.M * problem.prev_end;

  MatX G = basis.weights.asDiagonal() * basis.deriv;
  G(0, 0) += 1.0; // e e^T, e = delta_0 at the left Radau node

  std::vector<Triplet> trip;
  auto add = [&](int r, int c, double v) {
    if (sys.constrained[r]) return;
    if (sys.constrained[c]) {
      sys.rhs(r) -= v * sys.constrained_values(c);
      return;
    }
    trip.emplace_back(r, c, v);
  };

  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (G(i, j) == 0.0) continue;
      for (int col = 0; col < ops.M.outerSize(); ++col)
        for (SpMat::InnerIterator it(ops.M, col); it; ++it)
          add(sys.u_index(i, static_cast<int>(it.row())),
              sys.u_index(j, col), G(i, j) * it.value());
    }
  for (int i = 0; i < m; ++i) {
    const double wi = basis.weights(i);
    for (int col = 0; col < ops.A.outerSize(); ++col)
      for (SpMat::InnerIterator it(ops.A, col); it; ++it)
        add(sys.u_index(i, static_cast<int>(it.row())), sys.u_index(i, col),
            ops.nu * wi * it.value());
    for (int col = 0; col < convection[i].C.outerSize(); ++col)
      for (SpMat::InnerIterator it(convection[i].C, col); it; ++it)
        add(sys.u_index(i, static_cast<int>(it.row())), sys.u_index(i, col),
            wi * it.value());
    for (int col = 0; col < ops.B.outerSize(); ++col)
      for (SpMat::InnerIterator it(ops.B, col); it; ++it) {
        add(sys.p_index(i, static_cast<int>(it.row())), sys.u_index(i, col),
            wi * it.value());
        add(sys.u_index(i, col), sys.p_index(i, static_cast<int>(it.row())),
            wi * it.value());
      }
    for (int qd = 0; qd < sys.nq; ++qd) {
      add(sys.p_index(i, qd), sys.lambda_index(i), wi * ops.mean(qd));
      add(sys.lambda_index(i), sys.p_index(i, qd), wi * ops.mean(qd));
    }
  }
  for (int idx = 0; idx < size; ++idx)
    if (sys.constrained[idx]) {
      trip.emplace_back(idx, idx, 1.0);
      sys.rhs(idx) = sys.constrained_values(idx);
    }

  sys.matrix.resize(size, size);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  return sys;
}

} // namespace nsdg
