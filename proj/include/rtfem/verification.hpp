#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rtfem/splitting_solver.hpp"

namespace rtfem {

using ExactFn = std::function<double(const Vec3&, const Vec3&, double)>;

/// A manufactured problem: exact solution, the source that makes it satisfy
/// the transport equation, and the matching kernel/coefficients. Both built-in
/// cases factor as u(x,s,t) = spatial_factor(x,t) * angular_factor(s); the
/// error quadrature exploits that when available.
struct ManufacturedCase {
  std::string name;
  PhaseFunction phase;
  CrossSections sections;
  double decay_rate = 0.1;  // alpha
  ExactFn exact;
  SourceFn source;
  std::function<double(const Vec3&, double)> spatial_factor;
  std::function<double(const Vec3&)> angular_factor;

  InitialFn initial() const {
    return [e = exact](const Vec3& x, const Vec3& s) { return e(x, s, 0.0); };
  }
};

/// Angle-independent product-sine solution with the linear-anisotropic kernel.
ManufacturedCase example_one(CrossSections sections = CrossSections::make(2.0, 0.5));

/// s3-weighted product-sine solution with the Henyey-Greenstein kernel.
ManufacturedCase example_two(double eta = 0.5,
                             CrossSections sections = CrossSections::make(2.0, 0.5));

/// Exact value and source density at one point.
std::pair<double, double> exact_and_source(const ManufacturedCase& mcase, const Vec3& x,
                                           const Vec3& s, double t);

/// L2(S2 x Omega) error of a coefficient field against the exact solution at
/// time t: degree-5 quadrature per tetrahedron, midpoint rule per spherical
/// cell.
double l2_error_space_angle(const SolutionField& field, const AngularMesh& angular,
                            const SpatialMesh& spatial, const ManufacturedCase& mcase,
                            double t);

/// sqrt( dt * sum of squared per-step errors ), the discrete-in-time norm.
double time_accumulated_error(const std::vector<double>& step_errors, double dt);

struct ConvergenceRow {
  int level = 0;
  int nodes = 0;       // N_x
  int directions = 0;  // N_s
  double l2_final = 0.0;
  std::optional<double> order_final;
  double l2_time = 0.0;
  std::optional<double> order_time;
  double min_stability_margin = 0.0;  // slack of the global stability bound
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

struct StudyOptions {
  int parallelism = 0;
  bool cache_factorizations = true;
  double solver_tol = 1e-10;
};

/// Runs the solver at the paired resolutions (n = 2^level + 1 vertices per
/// axis, angular refinement = level, dt = 1/2^level, T = 1) and fills the
/// error table. Orders are log2 of consecutive error ratios.
ConvergenceTable convergence_study(const ManufacturedCase& mcase,
                                   const std::vector<int>& levels,
                                   const StudyOptions& options = {});

/// Writes `level,N_x,N_s,l2_final,order_final,l2_time,order_time` CSV rows.
void write_csv(const ConvergenceTable& table, std::ostream& out);

/// Nodal-interpolation L2 error of a smooth function on the cube mesh.
double spatial_interpolation_error(int vertices_per_axis,
                                   const std::function<double(const Vec3&)>& fn);

/// Cell-center-interpolation L2 error of a function on the sphere mesh; the
/// reference integral refines each cell `extra_levels` times (level +
/// extra_levels must stay within the mesh guard).
double angular_interpolation_error(int level, const std::function<double(const Vec3&)>& fn,
                                   int extra_levels = 3);

/// Direct one-pass assembly of (s . grad psi_col, psi_row): the oracle the
/// component-split check compares against.
SparseMatrix assemble_convection_direct(const SpatialMesh& mesh, const Vec3& s);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Component-split exactness over random unit directions; takes the
/// components as an argument so corrupted inputs are detectable.
CheckResult component_split_check(const SpatialMesh& mesh, const SpatialComponents& comp,
                                  int n_directions = 20, unsigned seed = 7u);

/// The full invariant suite behind `check`: geometry, operator symmetry,
/// quadrature-defect decay, stability properties, and the splitting oracle.
std::vector<CheckResult> run_self_checks();

/// Published reference data for the two studies: final-time errors/orders and
/// time-accumulated errors/orders per level 1..4.
struct ReferenceTable {
  std::vector<double> errors_final;
  std::vector<double> orders_final;  // size = levels-1
  std::vector<double> errors_time;
  std::vector<double> orders_time;
};
const ReferenceTable& reference_table_one();
const ReferenceTable& reference_table_two();

}  // namespace rtfem
