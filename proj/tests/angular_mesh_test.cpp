#include <doctest.h>

#include <cmath>

#include "rtfem/angular_mesh.hpp"

using namespace rtfem;

namespace {

double total_area(const AngularMesh& mesh) {
  double sum = 0.0;
  for (const SphericalCell& cell : mesh.cells) sum += cell.area;
  return sum;
}

double midpoint_quadrature(const AngularMesh& mesh,
                           const std::function<double(const Vec3&)>& fn) {
  double sum = 0.0;
  for (const SphericalCell& cell : mesh.cells) sum += fn(cell.center) * cell.area;
  return sum;
}

}  // namespace

TEST_CASE("cube seed has 12 cells of equal area tiling the sphere") {
  const AngularMesh mesh = build_angular_mesh(0);
  CHECK(mesh.cell_count() == 12);
  CHECK(std::abs(total_area(mesh) - kFourPi) < 1e-10);
  for (const SphericalCell& cell : mesh.cells) {
    CHECK(cell.area == doctest::Approx(kFourPi / 12.0).epsilon(1e-12));
    CHECK(std::abs(cell.center.norm() - 1.0) < 1e-12);
    for (const Vec3& v : cell.vertex) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("cell counts follow 12 * 4^level and areas always close") {
  for (int level = 0; level <= 3; ++level) {
    const AngularMesh mesh = build_angular_mesh(level);
    CHECK(mesh.cell_count() == 12 * (1 << (2 * level)));
    CHECK(std::abs(total_area(mesh) - kFourPi) < 1e-10);
  }
  CHECK(build_angular_mesh(1).cell_count() == 48);
  CHECK(build_angular_mesh(2).cell_count() == 192);
}

TEST_CASE("refinement guard and bad level") {
  CHECK_THROWS_AS(build_angular_mesh(7), ResourceLimitError);
  CHECK_THROWS_AS(build_angular_mesh(-1), std::invalid_argument);
}

TEST_CASE("diameter roughly halves per refinement") {
  double previous = build_angular_mesh(0).max_diameter;
  for (int level = 1; level <= 4; ++level) {
    const double current = build_angular_mesh(level).max_diameter;
    CHECK(current <= 0.6 * previous);
    previous = current;
  }
}

TEST_CASE("cell_center bounds and membership") {
  const AngularMesh mesh = build_angular_mesh(1);
  CHECK_THROWS_AS(cell_center(mesh, -1), std::out_of_range);
  CHECK_THROWS_AS(cell_center(mesh, mesh.cell_count()), std::out_of_range);
  for (int level = 0; level <= 2; ++level) {
    const AngularMesh m = build_angular_mesh(level);
    for (const SphericalCell& cell : m.cells) {
      CHECK(cell_contains(cell, cell.center, 1e-12));
      CHECK(std::abs(cell.center.norm() - 1.0) < 1e-12);
      for (const Vec3& v : cell.vertex) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("cube symmetry: centers cancel and the north pole cell points up") {
  const AngularMesh mesh = build_angular_mesh(0);
  Vec3 sum = Vec3::Zero();
  for (int i = 0; i < mesh.cell_count(); ++i) sum += cell_center(mesh, i);
  CHECK(sum.norm() < 1e-10);

  const Vec3 pole(0.0, 0.0, 1.0);
  bool found = false;
  for (const SphericalCell& cell : mesh.cells) {
    if (cell_contains(cell, pole, 1e-9)) {
      found = true;
      CHECK(cell.center.z() > 0.0);
    }
  }
  CHECK(found);
}

TEST_CASE("midpoint quadrature: exact constants, odd cancellation, exact s3^2") {
  for (int level = 0; level <= 3; ++level) {
    const AngularMesh mesh = build_angular_mesh(level);
    CHECK(std::abs(midpoint_quadrature(mesh, [](const Vec3&) { return 1.0; }) - kFourPi) <
          1e-10);
    CHECK(std::abs(midpoint_quadrature(mesh, [](const Vec3& s) { return s.z(); })) < 1e-10);
    // the tetrahedral symmetry of the seed integrates quadratics exactly,
    // so the s3^2 defect sits at rounding level rather than O(h^2)
    CHECK(std::abs(midpoint_quadrature(mesh, [](const Vec3& s) { return s.z() * s.z(); }) -
                   kFourPi / 3.0) < 1e-10);
  }
}

TEST_CASE("midpoint quadrature is second order for generic smooth integrands") {
  const auto fn = [](const Vec3& s) {
    return std::exp(0.8 * s.z()) + 0.3 * std::sin(s.x() + 0.5 * s.y());
  };
  const AngularMesh fine = build_angular_mesh(6);
  double reference = 0.0;
  for (const SphericalCell& cell : fine.cells) reference += fn(cell.center) * cell.area;
  std::vector<double> defects;
  for (int level = 2; level <= 4; ++level) {
    const AngularMesh mesh = build_angular_mesh(level);
    defects.push_back(std::abs(midpoint_quadrature(mesh, fn) - reference));
  }
  for (size_t k = 0; k + 1 < defects.size(); ++k) {
    const double ratio = defects[k] / defects[k + 1];
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
  }
}
