#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "rtfem/core.hpp"
#include "rtfem/linalg.hpp"
#include "rtfem/spatial_mesh.hpp"

namespace rtfem {

/// Source density f(x, s, t).
using SourceFn = std::function<double(const Vec3&, const Vec3&, double)>;

/// Per-cell SUPG weight rule. The default reproduces
/// delta_K = min(h_K, dt)/4, which satisfies both stability bounds
/// (delta_K <= delta0*h and delta_K <= dt/4). With cap_to_dt off the weight is
/// delta0*h_K and the dt/4 bound becomes a real constraint checked at
/// assembly/config time.
struct StabilizationPolicy {
  double delta0 = 0.25;
  bool cap_to_dt = true;

  double delta(double cell_diameter, double dt) const {
    const double d = delta0 * cell_diameter;
    return cap_to_dt ? std::min(d, 0.25 * dt) : d;
  }
};

/// Direction-independent spatial matrix components, assembled once and shared
/// by every direction and time step. All components live on one CSR pattern
/// (the P1 node adjacency); only the value arrays differ.
///
/// Entry convention: row = test function, column = trial function. (The
/// composed convection block has entries (s . grad psi_col, psi_row).)
struct SpatialComponents {
  int nodes = 0;
  double dt = 0.0;
  StabilizationPolicy policy;

  std::vector<int> row_offsets;
  std::vector<int> cols;

  std::vector<double> mass;                          // (psi_col, psi_row)
  std::array<std::vector<double>, 3> convection;     // (d_a psi_col, psi_row)
  std::array<std::vector<double>, 3> supg_mass;      // sum_K delta_K (psi_col, d_a psi_row)_K
  // symmetrized SUPG stiffness for a<=b, packed (0,0),(0,1),(0,2),(1,1),(1,2),(2,2);
  // contraction uses coefficient s_a*s_b, doubled off the diagonal
  std::array<std::vector<double>, 6> supg_stiffness;

  std::vector<double> delta;  // per tet

  // tet quadrature points (degree-2 rule), cached for load assembly
  std::vector<Vec3> load_points;

  int nnz() const { return static_cast<int>(cols.size()); }
  SparseMatrix with_values(std::vector<double> values) const;
  static int stiffness_slot(int a, int b);  // a <= b
};

SpatialComponents assemble_spatial_components(const SpatialMesh& mesh,
                                              const StabilizationPolicy& policy,
                                              double dt);

/// A_x(s) = s1*A^I + s2*A^II + s3*A^III.
SparseMatrix compose_convection(const SpatialComponents& comp, const Vec3& s);

/// M^delta_x(s): the SUPG transient term.
SparseMatrix compose_supg_mass(const SpatialComponents& comp, const Vec3& s);

/// A^delta_x(s): symmetric positive semidefinite SUPG stiffness.
SparseMatrix compose_supg_stiffness(const SpatialComponents& comp, const Vec3& s);

/// M_x + M^delta_x(s); multiplies the previous state on the right-hand side.
SparseMatrix compose_step2_mass(const SpatialComponents& comp, const Vec3& s);

/// Full Step-2 system M_x + M^delta_x + dt (A_x + A^delta_x) with inflow
/// Dirichlet rows replaced by unit rows.
SparseMatrix compose_step2_matrix(const SpatialComponents& comp, const Vec3& s,
                                  double dt, const DirectionBoundary& boundary);

/// Load vector F + F^delta at fixed (s, t), degree-2 quadrature, inflow
/// entries zeroed.
Eigen::VectorXd assemble_load(const SpatialMesh& mesh, const SpatialComponents& comp,
                              const DirectionBoundary& boundary, const SourceFn& f,
                              const Vec3& s, double t);

}  // namespace rtfem
