#pragma once

#include <iosfwd>
#include <vector>

#include "rtfem/core.hpp"

namespace rtfem {

/// Tetrahedron with precomputed P1 data: constant basis gradients and volume.
struct Tetrahedron {
  int node[4];
  Vec3 grad[4];     // gradient of the hat function of node[k]
  double volume;    // > 0 by construction
  double diameter;  // longest edge
};

/// Triangular boundary face with its outward unit normal (axis-aligned).
struct BoundaryFace {
  int node[3];
  Vec3 normal;
};

/// Structured tetrahedral mesh of the unit cube: n^3 vertices, each cubic
/// cell split into 6 tetrahedra sharing the main diagonal (Kuhn subdivision),
/// carrying the continuous piecewise-linear space.
struct SpatialMesh {
  int n = 0;             // vertices per axis
  double spacing = 0.0;  // 1/(n-1), the axis step
  double max_diameter = 0.0;
  std::vector<Vec3> nodes;
  std::vector<Tetrahedron> tets;
  std::vector<BoundaryFace> boundary_faces;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int node_id(int i, int j, int k) const { return (i * n + j) * n + k; }
};

/// Inflow/outflow classification of the boundary for one direction. A node is
/// inflow when it lies on at least one boundary face with s.n < 0 (strict);
/// faces with s.n = 0 count as outflow.
struct DirectionBoundary {
  Vec3 direction;
  std::vector<int> inflow_nodes;     // sorted ascending
  std::vector<char> is_inflow;      // size = node count
  std::vector<int> outflow_faces;   // indices into mesh.boundary_faces
};

SpatialMesh build_spatial_mesh(int vertices_per_axis);

DirectionBoundary classify_boundary(const SpatialMesh& mesh, const Vec3& direction);

/// Writes `node_id x y z` rows followed by `tet_id n0 n1 n2 n3` rows.
void dump_spatial_mesh(const SpatialMesh& mesh, std::ostream& out);

}  // namespace rtfem
