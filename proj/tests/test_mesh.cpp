#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "nsdg/mesh.hpp"

using namespace nsdg;

namespace {

const char* kNode4 = R"(# unit square corners
4 2 0 0
1 0.0 0.0
2 1.0 0.0
3 1.0 1.0
4 0.0 1.0
)";

const char* kEle2 = R"(2 3 0
1 1 2 3
2 1 3 4
)";

} // namespace

TEST_CASE("structured mesh counts") {
  CHECK_THROWS_AS(build_structured_mesh(0), std::invalid_argument);

  const Mesh m1 = build_structured_mesh(1);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_elements() == 2);
  CHECK(m1.num_facets() == 5);
  CHECK(m1.num_boundary_facets == 4);
  CHECK(m1.num_interior_facets == 1);

  const Mesh m2 = build_structured_mesh(2);
  CHECK(m2.num_vertices() == 9);
  CHECK(m2.num_elements() == 8);
  CHECK(m2.num_facets() == 16);
  CHECK(m2.num_boundary_facets == 8);

  const Mesh m4 = build_structured_mesh(4);
  CHECK(m4.h == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("mesh invariants") {
  for (int n : {1, 2, 3, 5}) {
    const Mesh m = build_structured_mesh(n);
    // Euler relation
    CHECK(m.num_vertices() - m.num_facets() + m.num_elements() == 1);
    // facet partition: 3T = 2 interior + boundary
    CHECK(3 * m.num_elements() == 2 * m.num_interior_facets + m.num_boundary_facets);
    // area sums to 1
    double area = 0.0;
    for (double a : m.element_area) area += a;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
    // interior normals point out of the first (lower-index) element, and
    // boundary normals out of the domain
    for (const auto& f : m.facets) {
      const Vec2 mid = 0.5 * (m.vertices[f.vertices[0]] + m.vertices[f.vertices[1]]);
      const auto& tri = m.triangles[f.elements[0]];
      const Vec2 centroid =
          (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0;
      CHECK(f.normal.dot(mid - centroid) > 0.0);
      if (!f.boundary) {
        CHECK(f.elements[0] < f.elements[1]);
        const auto& tri2 = m.triangles[f.elements[1]];
        const Vec2 c2 = (m.vertices[tri2[0]] + m.vertices[tri2[1]] + m.vertices[tri2[2]]) / 3.0;
        CHECK(f.normal.dot(mid - c2) < 0.0); // minus the outward normal of K_-
      } else {
        CHECK((std::abs(mid.x()) < 1e-14 || std::abs(mid.x() - 1.0) < 1e-14 ||
               std::abs(mid.y()) < 1e-14 || std::abs(mid.y() - 1.0) < 1e-14));
      }
      CHECK(f.normal.norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("metrics of the reference-style right triangle") {
  // embed the unit right triangle in a two-triangle mesh and check its
  // exact metrics through the split unit square
  const Mesh m = build_structured_mesh(1);
  const MeshMetrics mm = mesh_metrics(m);
  CHECK(mm.element_area[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mm.element_h[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // the diagonal facet
  int diag = -1;
  for (int f = 0; f < m.num_facets(); ++f)
    if (!m.facets[f].boundary) diag = f;
  CHECK(mm.facet_h[diag] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const Vec2 n = mm.facet_normal[diag];
  CHECK(std::abs(n.x()) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(n.y()) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  const Mesh m2 = build_structured_mesh(2);
  for (double hk : mesh_metrics(m2).element_h)
    CHECK(hk == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));

  // right isoceles triangle: rho = h / (2 r) with r = area/s
  const double s = 0.5 * (1.0 + 1.0 + std::sqrt(2.0));
  const double rho = std::sqrt(2.0) / (2.0 * (0.5 / s));
  CHECK(mm.shape_regularity == doctest::Approx(rho).epsilon(1e-13));
}

TEST_CASE("triangle format loader") {
  const Mesh loaded = load_triangle_mesh(kNode4, kEle2);
  const Mesh built = build_structured_mesh(1);
  CHECK(loaded.num_vertices() == built.num_vertices());
  CHECK(loaded.num_elements() == built.num_elements());
  CHECK(loaded.num_facets() == built.num_facets());
  CHECK(loaded.h == doctest::Approx(built.h).epsilon(1e-15));
  double area = 0.0;
  for (double a : loaded.element_area) area += a;
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));

  // clockwise triangle gets re-oriented
  const char* ele_cw = "2 3 0\n1 1 3 2\n2 1 4 3\n";
  const Mesh reoriented = load_triangle_mesh(kNode4, ele_cw);
  for (double a : reoriented.element_area) CHECK(a > 0.0);

  // 0-based indexing auto-detected
  const char* node0 = "4 2 0 0\n0 0 0\n1 1 0\n2 1 1\n3 0 1\n";
  const char* ele0 = "2 3 0\n0 0 1 2\n1 0 2 3\n";
  const Mesh zero_based = load_triangle_mesh(node0, ele0);
  CHECK(zero_based.num_elements() == 2);

  CHECK_THROWS_AS(load_triangle_mesh(kNode4, "2 3 0\n1 1 2 99\n2 1 3 4\n"), MeshError);
  CHECK_THROWS_AS(load_triangle_mesh("junk", kEle2), MeshError);
  CHECK_THROWS_AS(load_triangle_mesh(kNode4, "2 3 0\n1 1 2 2\n2 1 3 4\n"), MeshError);
}

TEST_CASE("json dump") {
  const Mesh m = build_structured_mesh(1);
  const auto j = nlohmann::json::parse(mesh_to_json(m));
  CHECK(j["vertices"].size() == 4);
  CHECK(j["triangles"].size() == 2);
}
