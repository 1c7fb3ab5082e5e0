#include "nsdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace nsdg {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// Builds facet topology and geometric quantities, validating conformity.
// Triangles must already be counter-clockwise.
void finalize(Mesh& mesh) {
  const int T = mesh.num_elements();
  mesh.element_area.resize(T);
  mesh.element_diameter.resize(T);
  mesh.element_facets.assign(T, {-1, -1, -1});
  mesh.h = 0.0;

  for (int e = 0; e < T; ++e) {
    const auto& tri = mesh.triangles[e];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const double area = signed_area(a, b, c);
    if (area <= 0.0)
      throw MeshError("element " + std::to_string(e) + " is not counter-clockwise");
    mesh.element_area[e] = area;
    const double hK = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    if (area < 1e-14 * hK * hK)
      throw MeshError("element " + std::to_string(e) + " is degenerate");
    mesh.element_diameter[e] = hK;
    mesh.h = std::max(mesh.h, hK);
  }

  std::map<std::pair<int, int>, int> facet_of;
  mesh.facets.clear();
  for (int e = 0; e < T; ++e) {
    const auto& tri = mesh.triangles[e];
    for (int l = 0; l < 3; ++l) {
      const int v0 = tri[l];
      const int v1 = tri[(l + 1) % 3];
      const auto key = std::minmax(v0, v1);
      auto it = facet_of.find(key);
      if (it == facet_of.end()) {
        Facet f;
        f.vertices = {key.first, key.second};
        f.elements = {e, -1};
        f.length = (mesh.vertices[v1] - mesh.vertices[v0]).norm();
        mesh.facets.push_back(f);
        const int idx = static_cast<int>(mesh.facets.size()) - 1;
        facet_of.emplace(key, idx);
        mesh.element_facets[e][l] = idx;
      } else {
        Facet& f = mesh.facets[it->second];
        if (f.elements[1] != -1)
          throw MeshError("facet shared by more than two elements (non-conforming mesh)");
        f.elements[1] = e;
        mesh.element_facets[e][l] = it->second;
      }
    }
  }

  mesh.num_interior_facets = 0;
  mesh.num_boundary_facets = 0;
  for (auto& f : mesh.facets) {
    f.boundary = (f.elements[1] == -1);
    if (f.boundary)
      ++mesh.num_boundary_facets;
    else {
      // K_+ is the lower element index
      if (f.elements[0] > f.elements[1]) std::swap(f.elements[0], f.elements[1]);
      ++mesh.num_interior_facets;
    }
    // Unit normal pointing out of elements[0]: rotate the edge tangent of
    // the CCW traversal of elements[0] by -90 degrees.
    const auto& tri = mesh.triangles[f.elements[0]];
    int l = -1;
    for (int ll = 0; ll < 3; ++ll) {
      const auto key = std::minmax(tri[ll], tri[(ll + 1) % 3]);
      if (key.first == f.vertices[0] && key.second == f.vertices[1]) l = ll;
    }
    const Vec2 t = mesh.vertices[tri[(l + 1) % 3]] - mesh.vertices[tri[l]];
    f.normal = Vec2(t.y(), -t.x()) / t.norm();
  }

  // Euler relation for a simply connected triangulated domain.
  const int V = mesh.num_vertices();
  const int E = mesh.num_facets();
  if (V - E + T != 1)
    throw MeshError("Euler relation V-E+T=1 violated (holes or disconnected mesh?)");
}

// Strips '#'-comments and splits the remaining text into tokens.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

long to_long(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MeshError(std::string("malformed integer in ") + what + ": '" + tok + "'");
  }
}

double to_double(const std::string& tok, const char* what) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MeshError(std::string("malformed number in ") + what + ": '" + tok + "'");
  }
}

} // namespace

Mesh build_structured_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_structured_mesh: need n >= 1");
  Mesh mesh;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(double(i) / n, double(j) / n);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  finalize(mesh);
  return mesh;
}

Mesh load_triangle_mesh(const std::string& node_text, const std::string& ele_text) {
  const auto nt = tokenize(node_text);
  if (nt.size() < 4) throw MeshError(".node file: missing header");
  const long nv = to_long(nt[0], ".node header");
  const long dim = to_long(nt[1], ".node header");
  const long nattr = to_long(nt[2], ".node header");
  const long nbdry = to_long(nt[3], ".node header");
  if (nv < 1 || dim != 2) throw MeshError(".node file: expected '<count> 2 ...' header");
  const long node_stride = 3 + nattr + nbdry;
  if (static_cast<long>(nt.size()) < 4 + nv * node_stride)
    throw MeshError(".node file: truncated vertex list");

  long node_base = -1;
  std::vector<Vec2> verts(nv);
  for (long i = 0; i < nv; ++i) {
    const long off = 4 + i * node_stride;
    const long idx = to_long(nt[off], ".node entry");
    if (node_base < 0) node_base = (idx == 0) ? 0 : 1;
    const long v = idx - node_base;
    if (v < 0 || v >= nv)
      throw MeshError(".node entry " + std::to_string(i + 1) + ": index " +
                      std::to_string(idx) + " out of range");
    verts[v] = Vec2(to_double(nt[off + 1], ".node entry"),
                    to_double(nt[off + 2], ".node entry"));
  }

  const auto et = tokenize(ele_text);
  if (et.size() < 3) throw MeshError(".ele file: missing header");
  const long ne = to_long(et[0], ".ele header");
  const long npt = to_long(et[1], ".ele header");
  const long eattr = to_long(et[2], ".ele header");
  if (ne < 1 || npt != 3)
    throw MeshError(".ele file: only 3-node triangles are supported");
  const long ele_stride = 4 + eattr;
  if (static_cast<long>(et.size()) < 3 + ne * ele_stride)
    throw MeshError(".ele file: truncated element list");

  Mesh mesh;
  mesh.vertices = std::move(verts);
  long ele_base = -1;
  for (long e = 0; e < ne; ++e) {
    const long off = 3 + e * ele_stride;
    std::array<int, 3> tri;
    for (int l = 0; l < 3; ++l) {
      const long idx = to_long(et[off + 1 + l], ".ele entry");
      if (ele_base < 0) ele_base = (idx == 0) ? 0 : 1;
      const long v = idx - ele_base;
      if (v < 0 || v >= nv)
        throw MeshError(".ele entry " + std::to_string(e + 1) + ": vertex index " +
                        std::to_string(idx) + " out of range");
      tri[l] = static_cast<int>(v);
    }
    const double area = signed_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                    mesh.vertices[tri[2]]);
    if (area < 0.0) std::swap(tri[1], tri[2]); // re-orient clockwise input
    mesh.triangles.push_back(tri);
  }
  finalize(mesh);
  return mesh;
}

MeshMetrics mesh_metrics(const Mesh& mesh) {
  MeshMetrics mm;
  mm.h = mesh.h;
  mm.element_h = mesh.element_diameter;
  mm.element_area = mesh.element_area;
  mm.facet_h.reserve(mesh.facets.size());
  mm.facet_normal.reserve(mesh.facets.size());
  for (const auto& f : mesh.facets) {
    mm.facet_h.push_back(f.length);
    mm.facet_normal.push_back(f.normal);
  }
  mm.shape_regularity = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& tri = mesh.triangles[e];
    const double la = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).norm();
    const double lb = (mesh.vertices[tri[2]] - mesh.vertices[tri[1]]).norm();
    const double lc = (mesh.vertices[tri[0]] - mesh.vertices[tri[2]]).norm();
    const double s = 0.5 * (la + lb + lc);
    const double inradius = mesh.element_area[e] / s;
    mm.shape_regularity =
        std::max(mm.shape_regularity, mesh.element_diameter[e] / (2.0 * inradius));
  }
  return mm;
}

std::string mesh_to_json(const Mesh& mesh) {
  nlohmann::json j;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices) verts.push_back({v.x(), v.y()});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  return j.dump();
}

} // namespace nsdg
