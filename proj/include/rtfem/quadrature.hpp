#pragma once

#include <array>
#include <vector>

#include "rtfem/core.hpp"
#include "rtfem/spatial_mesh.hpp"

namespace rtfem {

/// Quadrature rule on the reference tetrahedron in barycentric coordinates;
/// weights sum to 1 (multiply by the cell volume).
struct TetQuadrature {
  struct Point {
    std::array<double, 4> bary;
    double weight;
  };
  std::vector<Point> points;

  /// 4-point rule, exact for polynomials of degree 2 (load vectors).
  static const TetQuadrature& degree2();
  /// 15-point rule, exact for polynomials of degree 5 (error norms).
  static const TetQuadrature& degree5();
};

inline Vec3 tet_point(const SpatialMesh& mesh, const Tetrahedron& tet,
                      const std::array<double, 4>& bary) {
  Vec3 x = Vec3::Zero();
  for (int v = 0; v < 4; ++v) {
    x += bary[static_cast<size_t>(v)] * mesh.nodes[static_cast<size_t>(tet.node[v])];
  }
  return x;
}

}  // namespace rtfem
