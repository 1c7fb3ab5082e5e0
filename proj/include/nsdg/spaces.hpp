#pragma once

#include <memory>
#include <vector>

#include "nsdg/mesh.hpp"
#include "nsdg/quadrature.hpp"
#include "nsdg/types.hpp"

namespace nsdg {

// Shifted Legendre polynomial on [0,1] with P_n(1) = 1.
double legendre01(int n, double s);

// Scalar monomial basis x^a y^b, a+b <= deg, in a fixed order.
struct Monomials {
  int deg = 0;
  std::vector<std::array<int, 2>> exp;

  explicit Monomials(int d);
  int size() const { return static_cast<int>(exp.size()); }
  int index(int a, int b) const;
  VecX eval(const Vec2& p) const;
};

// Reference RT_k basis on the unit triangle, dual to the facet
// normal-moment and interior moment functionals. Each component of each
// basis function is stored as monomial coefficients of degree <= k+1.
struct RefBasis {
  int k = 1;
  int dim = 0;          // (k+1)(k+3)
  Monomials mono;       // degree k+1
  Monomials mono_grad;  // degree k
  MatX cx, cy;          // mono.size() x dim
  MatX dxx, dyx;        // derivatives of the x-component (mono_grad coeffs)
  MatX dxy, dyy;        // derivatives of the y-component
  MatX divc;            // divergence coefficients

  explicit RefBasis(int k);
  // columns of out: per basis function
  void values(const Vec2& ref, MatX& out) const;                  // 2 x dim
  void gradients(const Vec2& ref, MatX& out, VecX& div) const;    // 4 x dim (dxVx,dyVx,dxVy,dyVy)
};

// Which side of a facet an element is, and whether the element's local
// CCW traversal of the edge runs opposite to the global low->high one.
struct FacetSide {
  int element = -1;
  int local_edge = -1;
  bool reversed = false;
};
FacetSide facet_side(const Mesh& mesh, int facet, int side);

// Reference tables at fixed quadrature points shared by all elements;
// Piola factors are applied per element during assembly.
struct BasisTables {
  QuadratureRule vol;         // triangle rule
  std::vector<MatX> vol_value;   // per point: 2 x dim
  std::vector<MatX> vol_grad;    // per point: 4 x dim
  std::vector<VecX> vol_div;     // per point: dim
  QuadratureRule facet;       // Gauss-Legendre on [0,1]
  // [edge][direction][point]: direction 0 = forward (local traversal),
  // 1 = reversed parameterization
  std::vector<MatX> edge_value[3][2]; // per point: 2 x dim
  std::vector<MatX> edge_grad[3][2];  // per point: 4 x dim
};

struct VelocitySpace {
  std::shared_ptr<const Mesh> mesh;
  int degree = 1;        // k
  int local_dim = 0;     // (k+1)(k+3)
  int facet_dofs = 0;    // per facet: k+1
  int interior_dofs = 0; // per element: k(k+1)
  int dim = 0;           // N_V

  std::vector<int> dof_map;     // element-major, T x local_dim
  std::vector<double> dof_sign; // same layout

  std::vector<Mat2> jac, inv_jac;
  std::vector<double> det_jac;

  std::shared_ptr<const RefBasis> ref;
  std::shared_ptr<const BasisTables> tables;

  struct BoundaryDof {
    int global;
    int facet;
    int moment;
  };
  std::vector<BoundaryDof> boundary_dofs;

  int global_dof(int element, int local) const { return dof_map[element * local_dim + local]; }
  double sign(int element, int local) const { return dof_sign[element * local_dim + local]; }
  Vec2 map_point(int element, const Vec2& ref) const;
};

struct PressureSpace {
  std::shared_ptr<const Mesh> mesh;
  int degree = 1;
  int local_dim = 0; // (k+1)(k+2)/2
  int dim = 0;       // N_Q
  Monomials mono{1};
  VecX mean_vector;               // m, with m . q = integral of q_h
  std::vector<VecX> vol_value;    // reference monomials at the velocity vol points

  int global_dof(int element, int local) const { return element * local_dim + local; }
};

VelocitySpace build_velocity_space(std::shared_ptr<const Mesh> mesh, int k);
PressureSpace build_pressure_space(std::shared_ptr<const Mesh> mesh, int k);

// Coefficients of the RT interpolant of a smooth field: facet normal
// moments against Legendre polynomials plus interior moments.
VecX rt_interpolate(const VelocitySpace& space, const SpatialField& field);

struct EvalResult {
  Vec2 value;
  Mat2 gradient; // gradient(i,j) = d v_i / d x_j
  double divergence;
};

EvalResult evaluate(const VelocitySpace& space, const VecX& coeffs, int element,
                    const Vec2& ref_point);

double evaluate_pressure(const PressureSpace& space, const VecX& coeffs, int element,
                         const Vec2& ref_point);

} // namespace nsdg
