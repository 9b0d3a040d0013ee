#include "rtfem/spatial_mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <map>
#include <ostream>

namespace rtfem {

namespace {

// The six permutation tetrahedra of the unit cube, as paths from corner
// (0,0,0) to (1,1,1) adding one axis at a time. Odd permutations are listed
// with two vertices swapped so every tetrahedron is positively oriented.
constexpr int kCorner(int x, int y, int z) { return x * 4 + y * 2 + z; }

const std::array<std::array<int, 4>, 6> kKuhnTets = [] {
  std::array<std::array<int, 4>, 6> tets{};
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int p = 0; p < 6; ++p) {
    int c[3] = {0, 0, 0};
    std::array<int, 4> verts{};
    verts[0] = kCorner(0, 0, 0);
    for (int step = 0; step < 3; ++step) {
      c[perms[p][step]] = 1;
      verts[static_cast<size_t>(step) + 1] = kCorner(c[0], c[1], c[2]);
    }
    // permutation parity decides orientation; swap to keep volume positive
    const int inversions = (perms[p][0] > perms[p][1]) + (perms[p][0] > perms[p][2]) +
                           (perms[p][1] > perms[p][2]);
    if (inversions % 2 == 1) std::swap(verts[1], verts[2]);
    tets[static_cast<size_t>(p)] = verts;
  }
  return tets;
}();

Tetrahedron make_tet(const std::vector<Vec3>& nodes, const std::array<int, 4>& ids) {
  Tetrahedron tet;
  for (int k = 0; k < 4; ++k) tet.node[k] = ids[static_cast<size_t>(k)];
  const Vec3& p0 = nodes[static_cast<size_t>(tet.node[0])];
  Eigen::Matrix3d jac;
  for (int k = 0; k < 3; ++k) {
    jac.col(k) = nodes[static_cast<size_t>(tet.node[k + 1])] - p0;
  }
  const double det = jac.determinant();
  tet.volume = det / 6.0;
  const Eigen::Matrix3d inv = jac.inverse();
  tet.grad[0] = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    tet.grad[k + 1] = inv.row(k).transpose();
    tet.grad[0] -= tet.grad[k + 1];
  }
  tet.diameter = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double edge = (nodes[static_cast<size_t>(tet.node[a])] -
                           nodes[static_cast<size_t>(tet.node[b])])
                              .norm();
      tet.diameter = std::max(tet.diameter, edge);
    }
  }
  return tet;
}

}  // namespace

SpatialMesh build_spatial_mesh(int vertices_per_axis) {
  const int n = vertices_per_axis;
  if (n < 2) throw std::invalid_argument("spatial mesh needs at least 2 vertices per axis");
  SpatialMesh mesh;
  mesh.n = n;
  mesh.spacing = 1.0 / (n - 1);
  mesh.nodes.reserve(static_cast<size_t>(n) * n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        mesh.nodes.emplace_back(i * mesh.spacing, j * mesh.spacing, k * mesh.spacing);
      }
    }
  }

  mesh.tets.reserve(static_cast<size_t>(n - 1) * (n - 1) * (n - 1) * 6);
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      for (int k = 0; k + 1 < n; ++k) {
        int corner[8];
        for (int dx = 0; dx < 2; ++dx)
          for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz)
              corner[kCorner(dx, dy, dz)] = mesh.node_id(i + dx, j + dy, k + dz);
        for (const auto& local : kKuhnTets) {
          std::array<int, 4> ids;
          for (int v = 0; v < 4; ++v) ids[static_cast<size_t>(v)] = corner[local[static_cast<size_t>(v)]];
          mesh.tets.push_back(make_tet(mesh.nodes, ids));
        }
      }
    }
  }

  mesh.max_diameter = 0.0;
  for (const Tetrahedron& tet : mesh.tets) {
    mesh.max_diameter = std::max(mesh.max_diameter, tet.diameter);
  }

  // boundary faces: tet faces appearing exactly once across the mesh
  std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> face_count;
  const int face_local[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  for (const Tetrahedron& tet : mesh.tets) {
    for (const auto& f : face_local) {
      std::array<int, 3> ids = {tet.node[f[0]], tet.node[f[1]], tet.node[f[2]]};
      std::array<int, 3> key = ids;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = face_count.try_emplace(key, 0, ids);
      it->second.first += 1;
    }
  }
  for (const auto& [key, entry] : face_count) {
    if (entry.first != 1) continue;
    BoundaryFace face;
    for (int v = 0; v < 3; ++v) face.node[v] = entry.second[static_cast<size_t>(v)];
    // all three nodes share one coordinate at 0 or 1; the normal points outward
    face.normal = Vec3::Zero();
    for (int axis = 0; axis < 3; ++axis) {
      const double c0 = mesh.nodes[static_cast<size_t>(face.node[0])][axis];
      const double c1 = mesh.nodes[static_cast<size_t>(face.node[1])][axis];
      const double c2 = mesh.nodes[static_cast<size_t>(face.node[2])][axis];
      if (c0 == c1 && c1 == c2 && (c0 == 0.0 || c0 == 1.0)) {
        face.normal[axis] = c0 == 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    if (face.normal.squaredNorm() == 0.0) {
      throw NumericalError("boundary face not axis-aligned; mesh construction is broken");
    }
    mesh.boundary_faces.push_back(face);
  }
  return mesh;
}

DirectionBoundary classify_boundary(const SpatialMesh& mesh, const Vec3& direction) {
  require_unit(direction, "classify_boundary direction");
  DirectionBoundary bnd;
  bnd.direction = direction;
  bnd.is_inflow.assign(static_cast<size_t>(mesh.node_count()), 0);
  for (int f = 0; f < static_cast<int>(mesh.boundary_faces.size()); ++f) {
    const BoundaryFace& face = mesh.boundary_faces[static_cast<size_t>(f)];
    if (direction.dot(face.normal) < 0.0) {
      for (int v = 0; v < 3; ++v) bnd.is_inflow[static_cast<size_t>(face.node[v])] = 1;
    } else {
      bnd.outflow_faces.push_back(f);
    }
  }
  for (int i = 0; i < mesh.node_count(); ++i) {
    if (bnd.is_inflow[static_cast<size_t>(i)]) bnd.inflow_nodes.push_back(i);
  }
  return bnd;
}

void dump_spatial_mesh(const SpatialMesh& mesh, std::ostream& out) {
  out.precision(17);
  for (int i = 0; i < mesh.node_count(); ++i) {
    const Vec3& p = mesh.nodes[static_cast<size_t>(i)];
    out << i << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  }
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const Tetrahedron& tet = mesh.tets[t];
    out << t << ' ' << tet.node[0] << ' ' << tet.node[1] << ' ' << tet.node[2]
        << ' ' << tet.node[3] << '\n';
  }
}

}  // namespace rtfem
