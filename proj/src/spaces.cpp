#include "nsdg/spaces.hpp"

#include <cmath>
#include <stdexcept>

namespace nsdg {

double legendre01(int n, double s) {
  const double x = 2.0 * s - 1.0;
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Monomials::Monomials(int d) : deg(d) {
  for (int total = 0; total <= d; ++total)
    for (int a = total; a >= 0; --a) exp.push_back({a, total - a});
}

int Monomials::index(int a, int b) const {
  for (int i = 0; i < size(); ++i)
    if (exp[i][0] == a && exp[i][1] == b) return i;
  throw std::logic_error("Monomials::index: exponent out of range");
}

VecX Monomials::eval(const Vec2& p) const {
  VecX v(size());
  for (int i = 0; i < size(); ++i)
    v(i) = std::pow(p.x(), exp[i][0]) * std::pow(p.y(), exp[i][1]);
  return v;
}

namespace {

struct RefEdge {
  Vec2 start, end;
  Vec2 normal; // outward unit normal of the CCW reference triangle
  double length;
};

// Local edge l runs from reference vertex l to vertex (l+1)%3.
const RefEdge kEdges[3] = {
    {{0.0, 0.0}, {1.0, 0.0}, {0.0, -1.0}, 1.0},
    {{1.0, 0.0}, {0.0, 1.0}, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}, std::sqrt(2.0)},
    {{0.0, 1.0}, {0.0, 0.0}, {-1.0, 0.0}, 1.0},
};

// Derivative coefficients: in(mono_from) -> out(mono_to), d/dx or d/dy.
MatX derivative_matrix(const Monomials& from, const Monomials& to, int direction) {
  MatX d = MatX::Zero(to.size(), from.size());
  for (int i = 0; i < from.size(); ++i) {
    int a = from.exp[i][0], b = from.exp[i][1];
    if (direction == 0 && a > 0)
      d(to.index(a - 1, b), i) = a;
    else if (direction == 1 && b > 0)
      d(to.index(a, b - 1), i) = b;
  }
  return d;
}

} // namespace

RefBasis::RefBasis(int kk) : k(kk), dim((kk + 1) * (kk + 3)), mono(kk + 1), mono_grad(kk) {
  const Monomials span_scalar(k);
  const int np = span_scalar.size();
  const int span_dim = 2 * np + (k + 1);
  if (span_dim != dim) throw std::logic_error("RT span dimension mismatch");

  // Monomial coefficients of the spanning set P_k^2 + x * homogeneous_k.
  MatX span_cx = MatX::Zero(mono.size(), span_dim);
  MatX span_cy = MatX::Zero(mono.size(), span_dim);
  for (int i = 0; i < np; ++i) {
    const int a = span_scalar.exp[i][0], b = span_scalar.exp[i][1];
    span_cx(mono.index(a, b), i) = 1.0;
    span_cy(mono.index(a, b), np + i) = 1.0;
  }
  for (int a = 0; a <= k; ++a) {
    const int b = k - a;
    span_cx(mono.index(a + 1, b), 2 * np + a) = 1.0;
    span_cy(mono.index(a, b + 1), 2 * np + a) = 1.0;
  }

  // Generalized Vandermonde of the dof functionals on the spanning set.
  MatX V = MatX::Zero(dim, span_dim);
  const QuadratureRule gl = gauss_legendre(k + 2);
  for (int l = 0; l < 3; ++l) {
    const RefEdge& e = kEdges[l];
    for (int q = 0; q < gl.size(); ++q) {
      const double s = gl.nodes(q, 0);
      const Vec2 p = e.start + s * (e.end - e.start);
      const VecX mv = mono.eval(p);
      const VecX vn = (e.normal.x() * (span_cx.transpose() * mv) +
                       e.normal.y() * (span_cy.transpose() * mv));
      for (int j = 0; j <= k; ++j) {
        const double w = gl.weights(q) * e.length * legendre01(j, s);
        for (int c = 0; c < span_dim; ++c) V(l * (k + 1) + j, c) += w * vn(c);
      }
    }
  }
  if (k >= 1) {
    const Monomials pint(k - 1);
    const QuadratureRule tq = triangle_rule(2 * k + 2);
    for (int q = 0; q < tq.size(); ++q) {
      const Vec2 p(tq.nodes(q, 0), tq.nodes(q, 1));
      const VecX mv = mono.eval(p);
      const VecX vx = span_cx.transpose() * mv;
      const VecX vy = span_cy.transpose() * mv;
      const VecX pv = pint.eval(p);
      for (int i = 0; i < pint.size(); ++i) {
        const int row = 3 * (k + 1) + 2 * i;
        for (int c = 0; c < span_dim; ++c) {
          V(row, c) += tq.weights(q) * pv(i) * vx(c);
          V(row + 1, c) += tq.weights(q) * pv(i) * vy(c);
        }
      }
    }
  }

  Eigen::FullPivLU<MatX> lu(V);
  if (!lu.isInvertible())
    throw std::logic_error("RT dof/Vandermonde matrix is singular");
  const MatX B = lu.inverse(); // columns: span coefficients of each basis fn

  cx = span_cx * B;
  cy = span_cy * B;
  dxx = derivative_matrix(mono, mono_grad, 0) * cx;
  dyx = derivative_matrix(mono, mono_grad, 1) * cx;
  dxy = derivative_matrix(mono, mono_grad, 0) * cy;
  dyy = derivative_matrix(mono, mono_grad, 1) * cy;
  divc = dxx + dyy;
}

void RefBasis::values(const Vec2& ref, MatX& out) const {
  const VecX mv = mono.eval(ref);
  out.resize(2, dim);
  out.row(0) = (cx.transpose() * mv).transpose();
  out.row(1) = (cy.transpose() * mv).transpose();
}

void RefBasis::gradients(const Vec2& ref, MatX& out, VecX& div) const {
  const VecX mv = mono_grad.eval(ref);
  out.resize(4, dim);
  out.row(0) = (dxx.transpose() * mv).transpose();
  out.row(1) = (dyx.transpose() * mv).transpose();
  out.row(2) = (dxy.transpose() * mv).transpose();
  out.row(3) = (dyy.transpose() * mv).transpose();
  div = divc.transpose() * mv;
}

FacetSide facet_side(const Mesh& mesh, int facet, int side) {
  const Facet& f = mesh.facets[facet];
  FacetSide fs;
  fs.element = f.elements[side];
  if (fs.element < 0) return fs;
  const auto& tri = mesh.triangles[fs.element];
  for (int l = 0; l < 3; ++l)
    if (mesh.element_facets[fs.element][l] == facet) {
      fs.local_edge = l;
      fs.reversed = tri[l] > tri[(l + 1) % 3];
      return fs;
    }
  throw std::logic_error("facet_side: facet not found in element");
}

Vec2 VelocitySpace::map_point(int element, const Vec2& ref) const {
  const auto& tri = mesh->triangles[element];
  return mesh->vertices[tri[0]] + jac[element] * ref;
}

namespace {

Vec2 edge_ref_point(int edge, double s) {
  return kEdges[edge].start + s * (kEdges[edge].end - kEdges[edge].start);
}

std::shared_ptr<BasisTables> build_tables(const RefBasis& ref, int k) {
  auto t = std::make_shared<BasisTables>();
  t->vol = triangle_rule(std::max(3 * k + 3, 2 * k + 6));
  for (int q = 0; q < t->vol.size(); ++q) {
    const Vec2 p(t->vol.nodes(q, 0), t->vol.nodes(q, 1));
    MatX val, grad;
    VecX div;
    ref.values(p, val);
    ref.gradients(p, grad, div);
    t->vol_value.push_back(val);
    t->vol_grad.push_back(grad);
    t->vol_div.push_back(div);
  }
  const int facet_pts = std::max((3 * k + 5) / 2, 2 * k + 3);
  t->facet = gauss_legendre(facet_pts);
  for (int l = 0; l < 3; ++l)
    for (int d = 0; d < 2; ++d)
      for (int q = 0; q < t->facet.size(); ++q) {
        const double s = t->facet.nodes(q, 0);
        const Vec2 p = edge_ref_point(l, d == 0 ? s : 1.0 - s);
        MatX val, grad;
        VecX div;
        ref.values(p, val);
        ref.gradients(p, grad, div);
        t->edge_value[l][d].push_back(val);
        t->edge_grad[l][d].push_back(grad);
      }
  return t;
}

} // namespace

VelocitySpace build_velocity_space(std::shared_ptr<const Mesh> mesh, int k) {
  if (k != 1 && k != 2)
    throw std::invalid_argument("build_velocity_space: only k in {1,2} is supported");
  VelocitySpace s;
  s.mesh = mesh;
  s.degree = k;
  s.local_dim = (k + 1) * (k + 3);
  s.facet_dofs = k + 1;
  s.interior_dofs = k * (k + 1);
  const int T = mesh->num_elements();
  const int F = mesh->num_facets();
  s.dim = s.facet_dofs * F + s.interior_dofs * T;

  s.ref = std::make_shared<RefBasis>(k);
  s.tables = build_tables(*s.ref, k);

  s.jac.resize(T);
  s.inv_jac.resize(T);
  s.det_jac.resize(T);
  for (int e = 0; e < T; ++e) {
    const auto& tri = mesh->triangles[e];
    Mat2 J;
    J.col(0) = mesh->vertices[tri[1]] - mesh->vertices[tri[0]];
    J.col(1) = mesh->vertices[tri[2]] - mesh->vertices[tri[0]];
    s.jac[e] = J;
    s.det_jac[e] = J.determinant();
    s.inv_jac[e] = J.inverse();
  }

  s.dof_map.resize(T * s.local_dim);
  s.dof_sign.assign(T * s.local_dim, 1.0);
  for (int e = 0; e < T; ++e) {
    const auto& tri = mesh->triangles[e];
    for (int l = 0; l < 3; ++l) {
      const int facet = mesh->element_facets[e][l];
      const bool reversed = tri[l] > tri[(l + 1) % 3];
      const double sign_n = (mesh->facets[facet].elements[0] == e) ? 1.0 : -1.0;
      for (int j = 0; j <= k; ++j) {
        const int loc = l * (k + 1) + j;
        s.dof_map[e * s.local_dim + loc] = facet * s.facet_dofs + j;
        s.dof_sign[e * s.local_dim + loc] = sign_n * (reversed && (j % 2) ? -1.0 : 1.0);
      }
    }
    for (int i = 0; i < s.interior_dofs; ++i) {
      const int loc = 3 * (k + 1) + i;
      s.dof_map[e * s.local_dim + loc] = s.facet_dofs * F + e * s.interior_dofs + i;
    }
  }

  for (int f = 0; f < F; ++f)
    if (mesh->facets[f].boundary)
      for (int j = 0; j <= k; ++j)
        s.boundary_dofs.push_back({f * s.facet_dofs + j, f, j});

  return s;
}

PressureSpace build_pressure_space(std::shared_ptr<const Mesh> mesh, int k) {
  if (k < 1) throw std::invalid_argument("build_pressure_space: need k >= 1");
  PressureSpace s;
  s.mesh = mesh;
  s.degree = k;
  s.mono = Monomials(k);
  s.local_dim = s.mono.size();
  s.dim = mesh->num_elements() * s.local_dim;

  const QuadratureRule tq = triangle_rule(std::max(3 * k + 3, 2 * k + 6));
  for (int q = 0; q < tq.size(); ++q)
    s.vol_value.push_back(s.mono.eval(Vec2(tq.nodes(q, 0), tq.nodes(q, 1))));

  s.mean_vector = VecX::Zero(s.dim);
  for (int e = 0; e < mesh->num_elements(); ++e) {
    const double detJ = 2.0 * mesh->element_area[e];
    for (int q = 0; q < tq.size(); ++q)
      for (int i = 0; i < s.local_dim; ++i)
        s.mean_vector(e * s.local_dim + i) += tq.weights(q) * detJ * s.vol_value[q](i);
  }
  return s;
}

VecX rt_interpolate(const VelocitySpace& space, const SpatialField& field) {
  const Mesh& mesh = *space.mesh;
  const int k = space.degree;
  VecX coeffs = VecX::Zero(space.dim);

  // Generous orders: the commuting property div(I u) = Pi_k(div u) holds
  // only as exactly as these moments are integrated.
  const QuadratureRule gl = gauss_legendre(k + 10);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& facet = mesh.facets[f];
    const Vec2 a = mesh.vertices[facet.vertices[0]];
    const Vec2 b = mesh.vertices[facet.vertices[1]];
    for (int q = 0; q < gl.size(); ++q) {
      const double s = gl.nodes(q, 0);
      const Vec2 p = a + s * (b - a);
      const double un = field(p).dot(facet.normal);
      for (int j = 0; j <= k; ++j)
        coeffs(f * space.facet_dofs + j) +=
            gl.weights(q) * facet.length * un * legendre01(j, s);
    }
  }

  if (k >= 1) {
    const Monomials pint(k - 1);
    const QuadratureRule tq = triangle_rule(2 * k + 14);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      for (int q = 0; q < tq.size(); ++q) {
        const Vec2 ref(tq.nodes(q, 0), tq.nodes(q, 1));
        const Vec2 x = space.map_point(e, ref);
        // contravariant pullback
        const Vec2 uhat = space.det_jac[e] * (space.inv_jac[e] * field(x));
        const VecX pv = pint.eval(ref);
        for (int i = 0; i < pint.size(); ++i) {
          const int g = space.facet_dofs * mesh.num_facets() + e * space.interior_dofs;
          coeffs(g + 2 * i) += tq.weights(q) * pv(i) * uhat.x();
          coeffs(g + 2 * i + 1) += tq.weights(q) * pv(i) * uhat.y();
        }
      }
    }
  }
  return coeffs;
}

EvalResult evaluate(const VelocitySpace& space, const VecX& coeffs, int element,
                    const Vec2& ref_point) {
  if (element < 0 || element >= space.mesh->num_elements())
    throw std::out_of_range("evaluate: element index out of range");
  if (coeffs.size() != space.dim)
    throw std::invalid_argument("evaluate: coefficient vector has wrong length");

  VecX local(space.local_dim);
  for (int l = 0; l < space.local_dim; ++l)
    local(l) = space.sign(element, l) * coeffs(space.global_dof(element, l));

  MatX val, grad;
  VecX div;
  space.ref->values(ref_point, val);
  space.ref->gradients(ref_point, grad, div);

  const Vec2 vhat = val * local;
  Mat2 ghat;
  ghat(0, 0) = grad.row(0).dot(local);
  ghat(0, 1) = grad.row(1).dot(local);
  ghat(1, 0) = grad.row(2).dot(local);
  ghat(1, 1) = grad.row(3).dot(local);

  const Mat2& J = space.jac[element];
  const double detJ = space.det_jac[element];
  EvalResult r;
  r.value = (J * vhat) / detJ;
  r.gradient = (J * ghat * space.inv_jac[element]) / detJ;
  r.divergence = div.dot(local) / detJ;
  return r;
}

double evaluate_pressure(const PressureSpace& space, const VecX& coeffs, int element,
                         const Vec2& ref_point) {
  if (element < 0 || element >= space.mesh->num_elements())
    throw std::out_of_range("evaluate_pressure: element index out of range");
  const VecX mv = space.mono.eval(ref_point);
  double v = 0.0;
  for (int i = 0; i < space.local_dim; ++i)
    v += coeffs(space.global_dof(element, i)) * mv(i);
  return v;
}

} // namespace nsdg
