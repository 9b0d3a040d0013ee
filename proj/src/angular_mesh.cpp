#include "rtfem/angular_mesh.hpp"

#include <array>
#include <cmath>
#include <ostream>

namespace rtfem {

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double numer = std::abs(a.dot(b.cross(c)));
  const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(numer, denom);
}

double arc_length(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

bool cell_contains(const SphericalCell& cell, const Vec3& p, double tol) {
  const Vec3& a = cell.vertex[0];
  const Vec3& b = cell.vertex[1];
  const Vec3& c = cell.vertex[2];
  return a.cross(b).dot(p) >= -tol && b.cross(c).dot(p) >= -tol &&
         c.cross(a).dot(p) >= -tol;
}

namespace {

SphericalCell make_cell(const Vec3& a, const Vec3& b, const Vec3& c) {
  SphericalCell cell;
  cell.vertex[0] = a;
  cell.vertex[1] = b;
  cell.vertex[2] = c;
  // enforce outward (counterclockwise from outside) orientation
  if (cell.vertex[0].dot(cell.vertex[1].cross(cell.vertex[2])) < 0.0) {
    std::swap(cell.vertex[1], cell.vertex[2]);
  }
  cell.center = (cell.vertex[0] + cell.vertex[1] + cell.vertex[2]).normalized();
  cell.area = spherical_triangle_area(cell.vertex[0], cell.vertex[1], cell.vertex[2]);
  return cell;
}

// Cube seed. Each face is split along the diagonal whose endpoints belong to
// the inscribed tetrahedron {(1,1,1),(1,-1,-1),(-1,1,-1),(-1,-1,1)}
// (coordinate product +1), making the triangulation invariant under the
// tetrahedral rotation group.
std::vector<SphericalCell> cube_seed() {
  std::vector<SphericalCell> cells;
  cells.reserve(12);
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = -1; side <= 1; side += 2) {
      const int u = (axis + 1) % 3;
      const int v = (axis + 2) % 3;
      // face corners in cyclic order
      std::array<Vec3, 4> q;
      const std::array<std::pair<int, int>, 4> uv = {
          {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
      for (int k = 0; k < 4; ++k) {
        Vec3 p;
        p[axis] = side;
        p[u] = uv[k].first;
        p[v] = uv[k].second;
        q[k] = p.normalized();
      }
      auto product_positive = [&](int k) {
        Vec3 p;
        p[axis] = side;
        p[u] = uv[k].first;
        p[v] = uv[k].second;
        return p[0] * p[1] * p[2] > 0.0;
      };
      // exactly one of the two diagonals joins product-positive corners
      if (product_positive(0)) {  // diagonal q0-q2
        cells.push_back(make_cell(q[0], q[1], q[2]));
        cells.push_back(make_cell(q[0], q[2], q[3]));
      } else {  // diagonal q1-q3
        cells.push_back(make_cell(q[1], q[2], q[3]));
        cells.push_back(make_cell(q[1], q[3], q[0]));
      }
    }
  }
  return cells;
}

std::vector<SphericalCell> refine(const std::vector<SphericalCell>& coarse) {
  std::vector<SphericalCell> fine;
  fine.reserve(coarse.size() * 4);
  for (const SphericalCell& cell : coarse) {
    const Vec3& a = cell.vertex[0];
    const Vec3& b = cell.vertex[1];
    const Vec3& c = cell.vertex[2];
    const Vec3 mab = (a + b).normalized();
    const Vec3 mbc = (b + c).normalized();
    const Vec3 mca = (c + a).normalized();
    fine.push_back(make_cell(a, mab, mca));
    fine.push_back(make_cell(mab, b, mbc));
    fine.push_back(make_cell(mca, mbc, c));
    fine.push_back(make_cell(mab, mbc, mca));
  }
  return fine;
}

}  // namespace

AngularMesh build_angular_mesh(int level) {
  if (level < 0) throw std::invalid_argument("angular mesh level must be >= 0");
  if (level > 6) {
    throw ResourceLimitError("angular mesh level must be <= 6 (12*4^level cells)");
  }
  AngularMesh mesh;
  mesh.level = level;
  mesh.cells = cube_seed();
  for (int l = 0; l < level; ++l) mesh.cells = refine(mesh.cells);
  double h = 0.0;
  for (const SphericalCell& cell : mesh.cells) {
    for (int e = 0; e < 3; ++e) {
      h = std::max(h, arc_length(cell.vertex[e], cell.vertex[(e + 1) % 3]));
    }
  }
  mesh.max_diameter = h;
  return mesh;
}

Vec3 cell_center(const AngularMesh& mesh, int i) {
  if (i < 0 || i >= mesh.cell_count()) {
    throw std::out_of_range("cell_center: cell index out of range");
  }
  return mesh.cells[static_cast<size_t>(i)].center;
}

void dump_angular_mesh(const AngularMesh& mesh, std::ostream& out) {
  out.precision(17);
  for (int i = 0; i < mesh.cell_count(); ++i) {
    const SphericalCell& c = mesh.cells[static_cast<size_t>(i)];
    out << i << ' ' << c.center.x() << ' ' << c.center.y() << ' ' << c.center.z()
        << ' ' << c.area << '\n';
  }
}

}  // namespace rtfem
