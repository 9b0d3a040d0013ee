#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "rtfem/splitting_solver.hpp"
#include "rtfem/verification.hpp"

namespace rtfem {

/// Everything the command-line front end needs to set up a run. Defaults are
/// the reference configuration: paired meshes (n = 2^level + 1), dt = h_x,
/// T = 1, sigma_t = 2, sigma_s = 1/2, eta = 1/2.
struct RunConfig {
  std::string example = "ex1";  // "ex1", "ex2", or a path to a problem file
  int level = 1;                // angular refinement depth
  int spatial_n = 0;            // vertices per axis; 0 = 2^level + 1
  double dt = 0.0;              // 0 = axis spacing 1/(n-1)
  double final_time = 1.0;
  double sigma_t = 2.0;
  double sigma_s = 0.5;
  double eta = 0.5;
  double delta0 = 0.25;
  bool delta_cap_to_dt = true;  // false: delta_K = delta0 * h_K, checked against dt/4
  double solver_tol = 1e-10;
  int parallelism = 0;
  bool cache_factorizations = true;
  std::string diagnostics_path;
  std::string field_dump_path;
  std::string csv_path;
};

struct PreparedRun {
  ModelProblem problem;
  /// Set when the run has a known exact solution (ex1/ex2).
  std::optional<ManufacturedCase> exact_case;
};

/// Resolves the example (or parses the problem file), fills the derived
/// defaults, and validates every parameter bound before any assembly.
PreparedRun prepare_run(const RunConfig& config);

/// Parses a flat key=value problem description (see README for the keys).
ModelProblem parse_problem_file(const std::string& path);

/// One line per step: `step t norm residual`.
void write_diagnostics(std::ostream& out, const std::vector<StepDiagnostics>& steps);

/// Header lines (`# key value`) with mesh metadata, then `node direction value`
/// triplets.
void write_field_dump(std::ostream& out, const SolutionField& field,
                      const AngularMesh& angular, const SpatialMesh& spatial);

}  // namespace rtfem
