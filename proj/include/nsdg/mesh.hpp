#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdg/types.hpp"

namespace nsdg {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Facet {
  std::array<int, 2> vertices;  // global indices, low -> high
  std::array<int, 2> elements;  // adjacent elements; elements[1] = -1 on the boundary
  Vec2 normal;                  // unit normal, pointing out of elements[0]
  double length = 0.0;          // h_F
  bool boundary = false;
};

// Conforming triangulation with facet topology. All triangles are stored
// counter-clockwise; the facet normal convention makes jump signs
// reproducible: n_F points out of the lower-indexed adjacent element, and
// out of the domain on boundary facets.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Facet> facets;
  // facet index of local edge l (from vertex l to vertex (l+1)%3)
  std::vector<std::array<int, 3>> element_facets;
  std::vector<double> element_area;
  std::vector<double> element_diameter;
  double h = 0.0; // max over elements of h_K
  int num_interior_facets = 0;
  int num_boundary_facets = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_elements() const { return static_cast<int>(triangles.size()); }
  int num_facets() const { return static_cast<int>(facets.size()); }
};

// Uniform n x n grid of the unit square, each cell split into two
// triangles along its diagonal.
Mesh build_structured_mesh(int n);

// Parse the .node/.ele text produced by the Triangle package. Both 0- and
// 1-based files are accepted (detected from the first index seen);
// clockwise triangles are reoriented.
Mesh load_triangle_mesh(const std::string& node_text, const std::string& ele_text);

struct MeshMetrics {
  double h = 0.0;
  std::vector<double> element_h;
  std::vector<double> element_area;
  std::vector<double> facet_h;
  std::vector<Vec2> facet_normal;
  double shape_regularity = 0.0; // max_K h_K / (2 inradius_K)
};

MeshMetrics mesh_metrics(const Mesh& mesh);

// Debug dump (vertices, triangles) as a JSON string.
std::string mesh_to_json(const Mesh& mesh);

} // namespace nsdg
