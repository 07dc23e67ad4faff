#pragma once

#include <array>
#include <span>
#include <vector>

#include "csh/kernels.hpp"

namespace csh {

using Vec3 = std::array<double, 3>;

struct PointSpec {
  Vec3 direction;
  int multiplicity = 1;

  bool operator==(const PointSpec&) const = default;
};

struct StringPoint {
  int vertex;
  int multiplicity;
};

/// Icosphere approximation of the unit sphere with a cotangent Laplacian.
/// The discrete Laplacian is  Lap u = -M^{-1} K u  with K the (positive
/// semidefinite) stiffness matrix and M = diag(areas) the lumped mass.
struct SphereMesh {
  int level = 0;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<std::array<int, 2>> edges;
  std::vector<double> areas;          // mixed Voronoi lumped areas
  std::vector<double> vertex_spacing;  // mean length of incident edges
  CsrMatrix stiffness;
  double total_area = 0.0;
  double area_error = 0.0;      // |total_area - 4 pi| / 4 pi
  double mean_edge = 0.0;
  double min_edge_weight = 0.0;  // smallest cotangent weight over edges
  int negative_weights = 0;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int euler_characteristic() const {
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(faces.size());
  }
};

inline constexpr int kMaxMeshLevel = 8;

/// Icosahedron refined `level` times by edge midpoints projected to the
/// sphere. Vertices of coarser levels keep their index and coordinates.
SphereMesh build_icosphere(int level);

/// out = -M^{-1} K u.
void apply_laplacian(const SphereMesh& mesh, std::span<const double> u, std::span<double> out,
                     const VectorOps& ops = {});

double chordal_distance(const Vec3& x, const Vec3& y);
double geodesic_distance(const Vec3& x, const Vec3& y);

int nearest_vertex(const SphereMesh& mesh, const Vec3& direction);

/// Snaps each point to its nearest vertex. Two entries landing on one vertex
/// are rejected; coincident strings must be given as one entry with multiplicity.
std::vector<StringPoint> snap_points(const SphereMesh& mesh, std::span<const PointSpec> points);

/// Four points near the vertices of a regular tetrahedron, moved onto level-1
/// mesh vertices so that they are mesh vertices at every level >= 1.
std::vector<PointSpec> tetrahedral_points();

/// `count` level-1 vertices picked greedily by largest distance to those
/// already chosen, starting from vertex 0. count = 4 gives tetrahedral_points().
std::vector<PointSpec> spread_points(int count);

}  // namespace csh
