#pragma once

#include <iosfwd>
#include <vector>

#include "rtfem/core.hpp"

namespace rtfem {

/// One spherical triangle of the angular mesh. Vertices are unit vectors,
/// oriented counterclockwise seen from outside the sphere.
struct SphericalCell {
  Vec3 vertex[3];
  Vec3 center;  // normalized vertex centroid, the DG(0) collocation point
  double area;  // spherical excess, steradians
};

/// Hierarchical triangulation of the unit sphere carrying the piecewise
/// constant angular space: one unknown per cell, collocated at the cell
/// center, weighted by the exact spherical area.
struct AngularMesh {
  int level = 0;
  std::vector<SphericalCell> cells;
  double max_diameter = 0.0;  // largest great-circle edge length over all cells

  int cell_count() const { return static_cast<int>(cells.size()); }
};

/// Builds the triangulation at the given refinement depth. The seed is a cube
/// (6 faces x 2 triangles) projected to the sphere, so level L has 12*4^L
/// cells; refinement splits each triangle into 4 through projected edge
/// midpoints. Levels above 6 are rejected as a resource guard.
AngularMesh build_angular_mesh(int level);

/// Center direction of cell i; throws std::out_of_range on a bad index.
Vec3 cell_center(const AngularMesh& mesh, int i);

/// Exact solid angle of the spherical triangle (a,b,c) (Van Oosterom-Strackee).
double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// Great-circle distance between unit vectors.
double arc_length(const Vec3& a, const Vec3& b);

/// True if unit vector p lies inside (or on the edges of) cell.
bool cell_contains(const SphericalCell& cell, const Vec3& p, double tol = 1e-12);

/// Writes rows `cell_id cx cy cz area`.
void dump_angular_mesh(const AngularMesh& mesh, std::ostream& out);

}  // namespace rtfem
