#include "rtfem/quadrature.hpp"

#include <cmath>

namespace rtfem {

namespace {

TetQuadrature make_degree2() {
  TetQuadrature q;
  const double a = 0.585410196624968515;  // (5 + 3*sqrt(5)) / 20
  const double b = 0.138196601125010495;  // (5 - sqrt(5)) / 20
  for (int k = 0; k < 4; ++k) {
    TetQuadrature::Point p;
    p.bary = {b, b, b, b};
    p.bary[static_cast<size_t>(k)] = a;
    p.weight = 0.25;
    q.points.push_back(p);
  }
  return q;
}

// 15-point rule of Stroud/Keast: center + two vertex orbits + edge orbit,
// closed forms in sqrt(15), all weights positive
TetQuadrature make_degree5() {
  TetQuadrature q;
  const double r15 = std::sqrt(15.0);
  {
    TetQuadrature::Point p;
    p.bary = {0.25, 0.25, 0.25, 0.25};
    p.weight = 16.0 / 135.0;
    q.points.push_back(p);
  }
  auto push_vertex_orbit = [&q](double b, double w) {
    for (int k = 0; k < 4; ++k) {
      TetQuadrature::Point p;
      p.bary = {b, b, b, b};
      p.bary[static_cast<size_t>(k)] = 1.0 - 3.0 * b;
      p.weight = w;
      q.points.push_back(p);
    }
  };
  auto push_edge_orbit = [&q](double c, double w) {
    const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& pr : pairs) {
      TetQuadrature::Point p;
      p.bary = {c, c, c, c};
      p.bary[static_cast<size_t>(pr[0])] = 0.5 - c;
      p.bary[static_cast<size_t>(pr[1])] = 0.5 - c;
      p.weight = w;
      q.points.push_back(p);
    }
  };
  push_vertex_orbit((7.0 - r15) / 34.0, (2665.0 + 14.0 * r15) / 37800.0);
  push_vertex_orbit((7.0 + r15) / 34.0, (2665.0 - 14.0 * r15) / 37800.0);
  push_edge_orbit((10.0 - 2.0 * r15) / 40.0, 10.0 / 189.0);
  return q;
}

}  // namespace

const TetQuadrature& TetQuadrature::degree2() {
  static const TetQuadrature q = make_degree2();
  return q;
}

const TetQuadrature& TetQuadrature::degree5() {
  static const TetQuadrature q = make_degree5();
  return q;
}

}  // namespace rtfem
