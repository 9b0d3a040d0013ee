#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rtfem/angular_mesh.hpp"
#include "rtfem/scattering.hpp"
#include "rtfem/solution_field.hpp"
#include "rtfem/spatial_mesh.hpp"
#include "rtfem/transport_assembly.hpp"

namespace rtfem {

/// Initial condition u0(x, s).
using InitialFn = std::function<double(const Vec3&, const Vec3&)>;

/// Complete problem description: meshes, coefficients, data, time grid.
struct ModelProblem {
  int angular_level = 1;
  int spatial_n = 3;
  CrossSections sections = CrossSections::make(2.0, 0.5);
  PhaseFunction phase = PhaseFunction::isotropic();
  SourceFn source;    // empty = zero source
  InitialFn initial;  // empty = zero initial condition
  double final_time = 1.0;
  double dt = 0.5;
  StabilizationPolicy stabilization;
  double solver_tol = 1e-10;
  int parallelism = 0;  // worker threads for the sweeps; 0 = hardware default
  bool cache_factorizations = true;

  int step_count() const { return static_cast<int>(std::lround(final_time / dt)); }
};

/// Validates the time-step, stabilization, and coefficient constraints before
/// anything is assembled. Throws ConfigError naming the violated bound;
/// returns human-readable warnings (e.g. absorption below the analysis floor).
std::vector<std::string> validate_problem(const ModelProblem& problem);

/// One direction's transport system: boundary classification, composed Step-2
/// matrix, the Step-2 mass (right-hand-side operator), and an optional cached
/// factorization.
struct DirectionSystem {
  DirectionBoundary boundary;
  SparseMatrix system;
  SparseMatrix step2_mass;
  std::optional<SparseFactorization> factorization;
};

/// Everything assembled once per problem: meshes, angular operators with the
/// Step-1 factorization, spatial components, and per-direction systems.
/// Immutable after build; sweeps only read it.
struct AssembledOperators {
  AngularMesh angular_mesh;
  SpatialMesh spatial_mesh;
  Eigen::VectorXd angular_mass;
  Eigen::MatrixXd scattering_mass;
  Step1Operator step1;
  SpatialComponents components;
  SparseMatrix mass_matrix;  // plain M_x, no boundary rows replaced
  std::vector<DirectionSystem> directions;
  double dt = 0.0;
  double solver_tol = 1e-10;
  bool cache_factorizations = true;
  int threads = 1;

  static AssembledOperators build(const ModelProblem& problem);
};

/// Discrete tensor L2 norm: sqrt( sum_i |K_i| u_i^T M_x u_i ).
double tensor_l2_norm(const SolutionField& field, const Eigen::VectorXd& angular_mass,
                      const SparseMatrix& mass_matrix);
double tensor_l2_norm(const SolutionField& field, const AssembledOperators& ops);

/// Nodal interpolation in space, cell-center evaluation in angle.
SolutionField project_initial(const AssembledOperators& ops, const InitialFn& u0);

/// Angular half-step: for every spatial node solve M_s u_new = M1 u_old.
/// Requires angular-major layout. Reports the largest relative solve residual
/// through max_residual when given.
SolutionField angular_sweep(const SolutionField& field, const AssembledOperators& ops,
                            double* max_residual = nullptr);

/// Transport half-step: for every direction solve
///   (M_x + M^d + dt (A + A^d)) u = dt (F + F^d) + (M_x + M^d) u_tilde
/// with inflow values forced to zero. Requires spatial-major layout.
SolutionField transport_sweep(const SolutionField& field, const AssembledOperators& ops,
                              const SourceFn& source, double t_next,
                              double* max_residual = nullptr);

/// One full step: angular sweep, transpose, transport sweep, transpose.
SolutionField advance(const SolutionField& field, const AssembledOperators& ops,
                      const SourceFn& source, double t_next,
                      double* max_residual = nullptr);

struct StepDiagnostics {
  int step = 0;
  double time = 0.0;
  double solution_norm = 0.0;   // tensor L2 norm after the step
  double residual_check = 0.0;  // max relative linear-solve residual in the step
};

struct RunResult {
  SolutionField final_field;
  std::vector<StepDiagnostics> steps;
  std::vector<std::string> warnings;
  /// Per-step slack of the global stability bound
  /// e^{2T} (||u0||^2 + 2 dt (1+4 delta dt) sum ||f||^2) - ||u^n||^2  (>= 0).
  std::vector<double> stability_margin;
};

using StepObserver = std::function<void(const StepDiagnostics&, const SolutionField&)>;

struct RunOptions {
  StepObserver observer;               // called after every step, angular-major field
  bool track_stability_bound = false;  // fills RunResult::stability_margin
};

/// Executes T/dt steps of the split scheme from the projected initial data.
RunResult run(const ModelProblem& problem, const RunOptions& options = {});

/// Unsplit backward Euler on the full tensor system with the same element
/// matrices; the oracle for splitting-consistency tests. Guarded to
/// N_s * N_x <= 10^4 unknowns. Returns the state after every step, including
/// the initial field, in angular-major layout.
std::vector<SolutionField> monolithic_reference_solve(const ModelProblem& problem);

}  // namespace rtfem
