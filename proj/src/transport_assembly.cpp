#include "rtfem/transport_assembly.hpp"

#include <algorithm>
#include <sstream>

#include "rtfem/quadrature.hpp"

namespace rtfem {

SparseMatrix SpatialComponents::with_values(std::vector<double> values) const {
  SparseMatrix m;
  m.rows = nodes;
  m.cols = nodes;
  m.row_offsets = row_offsets;
  m.col_indices = cols;
  m.values = std::move(values);
  return m;
}

int SpatialComponents::stiffness_slot(int a, int b) {
  static constexpr int slot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return slot[a][b];
}

namespace {

// position of (row, col) inside the CSR value arrays
int pattern_slot(const SpatialComponents& comp, int row, int col) {
  const auto begin = comp.cols.begin() + comp.row_offsets[static_cast<size_t>(row)];
  const auto end = comp.cols.begin() + comp.row_offsets[static_cast<size_t>(row) + 1];
  const auto it = std::lower_bound(begin, end, col);
  return static_cast<int>(it - comp.cols.begin());
}

}  // namespace

SpatialComponents assemble_spatial_components(const SpatialMesh& mesh,
                                              const StabilizationPolicy& policy,
                                              double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("assemble_spatial_components: dt must be > 0");
  SpatialComponents comp;
  comp.nodes = mesh.node_count();
  comp.dt = dt;
  comp.policy = policy;

  comp.delta.reserve(mesh.tets.size());
  for (const Tetrahedron& tet : mesh.tets) {
    const double d = policy.delta(tet.diameter, dt);
    if (d > 0.25 * dt * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "stabilization policy violates delta_K <= dt/4 (delta_K = " << d
          << ", dt/4 = " << 0.25 * dt << ")";
      throw ConfigError(msg.str());
    }
    if (d > policy.delta0 * mesh.max_diameter * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "stabilization policy violates delta_K <= delta0*h (delta_K = " << d
          << ", delta0*h = " << policy.delta0 * mesh.max_diameter << ")";
      throw ConfigError(msg.str());
    }
    comp.delta.push_back(d);
  }

  // shared CSR pattern from node adjacency
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(mesh.tets.size() * 16);
  for (const Tetrahedron& tet : mesh.tets) {
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) pairs.emplace_back(tet.node[a], tet.node[b]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  comp.row_offsets.assign(static_cast<size_t>(comp.nodes) + 1, 0);
  comp.cols.reserve(pairs.size());
  for (const auto& [r, c] : pairs) {
    comp.cols.push_back(c);
    comp.row_offsets[static_cast<size_t>(r) + 1] = static_cast<int>(comp.cols.size());
  }
  for (size_t r = 1; r < comp.row_offsets.size(); ++r) {
    comp.row_offsets[r] = std::max(comp.row_offsets[r], comp.row_offsets[r - 1]);
  }

  const int nnz = comp.nnz();
  comp.mass.assign(static_cast<size_t>(nnz), 0.0);
  for (auto& v : comp.convection) v.assign(static_cast<size_t>(nnz), 0.0);
  for (auto& v : comp.supg_mass) v.assign(static_cast<size_t>(nnz), 0.0);
  for (auto& v : comp.supg_stiffness) v.assign(static_cast<size_t>(nnz), 0.0);

  // exact P1 element integrals: gradients constant per tet,
  // int_K psi_i psi_j = V/20 (1 + delta_ij), int_K psi = V/4
  for (size_t t = 0; t < mesh.tets.size(); ++t) {
    const Tetrahedron& tet = mesh.tets[t];
    const double vol = tet.volume;
    const double dK = comp.delta[t];
    for (int i = 0; i < 4; ++i) {        // test
      for (int j = 0; j < 4; ++j) {      // trial
        const int slot = pattern_slot(comp, tet.node[i], tet.node[j]);
        comp.mass[static_cast<size_t>(slot)] += vol / 20.0 * (i == j ? 2.0 : 1.0);
        for (int a = 0; a < 3; ++a) {
          comp.convection[static_cast<size_t>(a)][static_cast<size_t>(slot)] +=
              tet.grad[j][a] * vol / 4.0;
          comp.supg_mass[static_cast<size_t>(a)][static_cast<size_t>(slot)] +=
              dK * tet.grad[i][a] * vol / 4.0;
          for (int b = a; b < 3; ++b) {
            const double sym = 0.5 * (tet.grad[j][a] * tet.grad[i][b] +
                                      tet.grad[j][b] * tet.grad[i][a]);
            comp.supg_stiffness[static_cast<size_t>(
                SpatialComponents::stiffness_slot(a, b))][static_cast<size_t>(slot)] +=
                dK * vol * sym;
          }
        }
      }
    }
  }

  const TetQuadrature& rule = TetQuadrature::degree2();
  comp.load_points.reserve(mesh.tets.size() * rule.points.size());
  for (const Tetrahedron& tet : mesh.tets) {
    for (const auto& p : rule.points) comp.load_points.push_back(tet_point(mesh, tet, p.bary));
  }
  return comp;
}

namespace {

std::vector<double> axpy_compose(const SpatialComponents& comp,
                                 std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
  std::vector<double> out(static_cast<size_t>(comp.nnz()), 0.0);
  for (const auto& [coeff, vals] : terms) {
    if (coeff == 0.0) continue;
    for (size_t k = 0; k < out.size(); ++k) out[k] += coeff * (*vals)[k];
  }
  return out;
}

}  // namespace

SparseMatrix compose_convection(const SpatialComponents& comp, const Vec3& s) {
  return comp.with_values(axpy_compose(comp, {{s[0], &comp.convection[0]},
                                              {s[1], &comp.convection[1]},
                                              {s[2], &comp.convection[2]}}));
}

SparseMatrix compose_supg_mass(const SpatialComponents& comp, const Vec3& s) {
  return comp.with_values(axpy_compose(comp, {{s[0], &comp.supg_mass[0]},
                                              {s[1], &comp.supg_mass[1]},
                                              {s[2], &comp.supg_mass[2]}}));
}

SparseMatrix compose_supg_stiffness(const SpatialComponents& comp, const Vec3& s) {
  return comp.with_values(axpy_compose(
      comp, {{s[0] * s[0], &comp.supg_stiffness[0]},
             {2.0 * s[0] * s[1], &comp.supg_stiffness[1]},
             {2.0 * s[0] * s[2], &comp.supg_stiffness[2]},
             {s[1] * s[1], &comp.supg_stiffness[3]},
             {2.0 * s[1] * s[2], &comp.supg_stiffness[4]},
             {s[2] * s[2], &comp.supg_stiffness[5]}}));
}

SparseMatrix compose_step2_mass(const SpatialComponents& comp, const Vec3& s) {
  return comp.with_values(axpy_compose(comp, {{1.0, &comp.mass},
                                              {s[0], &comp.supg_mass[0]},
                                              {s[1], &comp.supg_mass[1]},
                                              {s[2], &comp.supg_mass[2]}}));
}

SparseMatrix compose_step2_matrix(const SpatialComponents& comp, const Vec3& s,
                                  double dt, const DirectionBoundary& boundary) {
  require_unit(s, "compose_step2_matrix direction");
  if (std::abs(dt - comp.dt) > 1e-14 * std::max(1.0, comp.dt)) {
    throw std::invalid_argument(
        "compose_step2_matrix: dt does not match the assembled components");
  }
  SparseMatrix m = comp.with_values(axpy_compose(
      comp, {{1.0, &comp.mass},
             {s[0], &comp.supg_mass[0]},
             {s[1], &comp.supg_mass[1]},
             {s[2], &comp.supg_mass[2]},
             {dt * s[0], &comp.convection[0]},
             {dt * s[1], &comp.convection[1]},
             {dt * s[2], &comp.convection[2]},
             {dt * s[0] * s[0], &comp.supg_stiffness[0]},
             {dt * 2.0 * s[0] * s[1], &comp.supg_stiffness[1]},
             {dt * 2.0 * s[0] * s[2], &comp.supg_stiffness[2]},
             {dt * s[1] * s[1], &comp.supg_stiffness[3]},
             {dt * 2.0 * s[1] * s[2], &comp.supg_stiffness[4]},
             {dt * s[2] * s[2], &comp.supg_stiffness[5]}}));
  for (int node : boundary.inflow_nodes) m.set_unit_row(node);
  return m;
}

Eigen::VectorXd assemble_load(const SpatialMesh& mesh, const SpatialComponents& comp,
                              const DirectionBoundary& boundary, const SourceFn& f,
                              const Vec3& s, double t) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.node_count());
  if (f) {
    const TetQuadrature& rule = TetQuadrature::degree2();
    const size_t nq = rule.points.size();
    for (size_t tt = 0; tt < mesh.tets.size(); ++tt) {
      const Tetrahedron& tet = mesh.tets[tt];
      const double dK = comp.delta[tt];
      double sgrad[4];
      for (int v = 0; v < 4; ++v) sgrad[v] = s.dot(tet.grad[v]);
      for (size_t q = 0; q < nq; ++q) {
        const Vec3& x = comp.load_points[tt * nq + q];
        const double fw = f(x, s, t) * rule.points[q].weight * tet.volume;
        for (int v = 0; v < 4; ++v) {
          load[tet.node[v]] += fw * (rule.points[q].bary[static_cast<size_t>(v)] +
                                     dK * sgrad[v]);
        }
      }
    }
  }
  for (int node : boundary.inflow_nodes) load[node] = 0.0;
  return load;
}

}  // namespace rtfem
