#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polydg/common.hpp"

namespace polydg {

/// Submesh triangle with counter-clockwise vertices.
struct Triangle {
  std::array<Index, 3> v{};
  Index parent = -1;
};

struct PolytopicElement {
  Index id = -1;
  std::vector<Index> loop;  // counter-clockwise boundary vertex loop
  std::vector<Index> tris;
  double area = 0.0;
  double H = 0.0;
  double rho = 0.0;
  bool convex = false;
  std::vector<Index> neighbors;  // sorted
};

/// Maximal run of submesh edges shared by one element pair (or by an
/// element and the domain boundary, kminus = -1). Edges are oriented
/// counter-clockwise with respect to kplus, so the facet normal points out
/// of kplus.
struct InterfaceFace {
  Index id = -1;
  Index kplus = -1;
  Index kminus = -1;
  std::vector<std::array<Index, 2>> edges;
  std::vector<Point2> normals;
  std::vector<Index> tri_plus;
  std::vector<Index> tri_minus;  // -1 on the domain boundary

  [[nodiscard]] bool is_boundary() const { return kminus < 0; }
};

/// One edge of the simplicial skeleton Gamma_T. `face` is -1 for edges
/// interior to a polytope.
struct SkeletonEdge {
  std::array<Index, 2> v{};
  Index tri_plus = -1;
  Index tri_minus = -1;
  Index face = -1;

  [[nodiscard]] bool is_boundary() const { return tri_minus < 0; }
};

struct PolytopicMesh {
  std::vector<Point2> points;
  std::vector<Triangle> triangles;
  std::vector<PolytopicElement> elements;
  std::vector<InterfaceFace> faces;
  std::vector<SkeletonEdge> skeleton;

  double C_star = 0.0;
  double C_sh = 0.0;
  double C_qu = 0.0;

  [[nodiscard]] Index num_elements() const { return static_cast<Index>(elements.size()); }
  [[nodiscard]] Index num_triangles() const { return static_cast<Index>(triangles.size()); }

  [[nodiscard]] Point2 vertex(Index tri, int local) const {
    return points[triangles[tri].v[local]];
  }
  [[nodiscard]] double triangle_area(Index tri) const;
  [[nodiscard]] double triangle_diameter(Index tri) const;
  [[nodiscard]] double triangle_inradius(Index tri) const;
  [[nodiscard]] Point2 triangle_centroid(Index tri) const;
};

struct MeshGenOptions {
  int n_base = 0;  // 0 selects round(sqrt(3 n_poly))
  int n_poly = 8;
  std::uint64_t seed = 1;
  int lloyd_iterations = 4;
  int max_attempts = 32;
};

/// Structured triangulation of (0,1)^2 with n_base^2 squares split along
/// the (0,0)-(1,1) diagonal direction; every triangle is its own element.
PolytopicMesh structured_triangle_mesh(int n_base);

/// Agglomerates a structured triangle grid into n_poly simply connected
/// polygons by seeded region growing. Deterministic in the options.
PolytopicMesh generate_agglomerated_mesh(const MeshGenOptions& options);
PolytopicMesh generate_agglomerated_mesh(int n_base, int n_poly, std::uint64_t seed);

/// Builds a mesh from raw connectivity: element loops are derived from the
/// triangles; faces, skeleton and geometry are computed and validated.
PolytopicMesh build_mesh(std::vector<Point2> points, std::vector<Triangle> triangles,
                         Index num_elements);

/// Uniform red refinement of every submesh triangle. Polygons, their loops
/// and owner pairs are unchanged; original points keep their ids.
PolytopicMesh refine_submesh(const PolytopicMesh& mesh, int levels);

/// Fills H_K, rho_K, area, convexity, neighbors and the global constants.
void compute_geometry(PolytopicMesh& mesh);

/// Groups boundary submesh edges into interface faces and rebuilds the
/// skeleton index.
void build_interfaces(PolytopicMesh& mesh);

/// Runs every structural check; throws MeshError on the first failure.
void validate_mesh(const PolytopicMesh& mesh);

/// Chebyshev radius of a simple polygon. Exact for convex polygons, sampled
/// to a resolution of 1e-3 * diameter otherwise.
double inscribed_radius(const std::vector<Point2>& polygon);
double polygon_diameter(const std::vector<Point2>& polygon);
double polygon_area(const std::vector<Point2>& polygon);
bool polygon_is_convex(const std::vector<Point2>& polygon);
bool point_in_polygon(const std::vector<Point2>& polygon, const Point2& p);

std::vector<Point2> element_polygon(const PolytopicMesh& mesh, Index element);

std::string mesh_to_json(const PolytopicMesh& mesh);
PolytopicMesh mesh_from_json(const std::string& text);

}  // namespace polydg
