#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "rtfem/run_config.hpp"
#include "rtfem/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw rtfem::ConfigError("cannot open output file: " + path);
  return out;
}

void add_common_options(CLI::App* cmd, rtfem::RunConfig& config) {
  cmd->add_option("--example", config.example,
                  "Problem: ex1, ex2, or a path to a key=value problem file");
  cmd->add_option("--level", config.level, "Angular refinement depth (0-6)");
  cmd->add_option("--n", config.spatial_n,
                  "Vertices per axis (default: 2^level + 1)");
  cmd->add_option("--dt", config.dt, "Time step (default: 1/(n-1))");
  cmd->add_option("--T", config.final_time, "Final time");
  cmd->add_option("--sigma-t", config.sigma_t, "Total coefficient sigma_t");
  cmd->add_option("--sigma-s", config.sigma_s, "Scattering coefficient sigma_s");
  cmd->add_option("--eta", config.eta, "Henyey-Greenstein anisotropy, in (-1,1)");
  cmd->add_option("--delta0", config.delta0, "Stabilization constant delta0");
  cmd->add_flag("!--delta-h-only", config.delta_cap_to_dt,
                "Use delta_K = delta0*h_K without the dt/4 cap");
  cmd->add_option("--tol", config.solver_tol, "Linear solver residual tolerance");
  cmd->add_option("-j,--parallelism", config.parallelism,
                  "Worker threads for the sweeps (0 = hardware)");
  cmd->add_flag("!--no-cache-factorizations", config.cache_factorizations,
                "Do not cache per-direction factorizations");
  cmd->set_config("--config", "", "Flat key=value config file; flags win");
}

int cmd_solve(const rtfem::RunConfig& config) {
  const rtfem::PreparedRun prepared = rtfem::prepare_run(config);

  std::optional<rtfem::AngularMesh> angular;
  std::optional<rtfem::SpatialMesh> spatial;
  std::vector<double> step_errors;
  rtfem::RunOptions options;
  options.track_stability_bound = static_cast<bool>(prepared.problem.source);
  if (prepared.exact_case) {
    angular = rtfem::build_angular_mesh(prepared.problem.angular_level);
    spatial = rtfem::build_spatial_mesh(prepared.problem.spatial_n);
    options.observer = [&](const rtfem::StepDiagnostics& diag,
                           const rtfem::SolutionField& field) {
      step_errors.push_back(rtfem::l2_error_space_angle(
          field, *angular, *spatial, *prepared.exact_case, diag.time));
    };
  }

  const rtfem::RunResult result = rtfem::run(prepared.problem, options);
  for (const std::string& warning : result.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }

  if (config.diagnostics_path.empty()) {
    rtfem::write_diagnostics(std::cout, result.steps);
  } else {
    auto out = open_output(config.diagnostics_path);
    rtfem::write_diagnostics(out, result.steps);
    std::cout << "diagnostics written to " << config.diagnostics_path << '\n';
  }

  if (prepared.exact_case && !step_errors.empty()) {
    std::cout.precision(6);
    std::cout << "final-time L2 error: " << std::scientific << step_errors.back()
              << "\ntime-accumulated error: "
              << rtfem::time_accumulated_error(step_errors, prepared.problem.dt)
              << std::defaultfloat << '\n';
  }
  if (!result.stability_margin.empty()) {
    const double min_margin = *std::min_element(result.stability_margin.begin(),
                                                result.stability_margin.end());
    if (min_margin < 0.0) {
      std::cerr << "stability bound violated (margin " << min_margin << ")\n";
      return kExitNumerical;
    }
  }

  if (!config.field_dump_path.empty()) {
    if (!angular) angular = rtfem::build_angular_mesh(prepared.problem.angular_level);
    if (!spatial) spatial = rtfem::build_spatial_mesh(prepared.problem.spatial_n);
    auto out = open_output(config.field_dump_path);
    rtfem::write_field_dump(out, result.final_field, *angular, *spatial);
    std::cout << "final field written to " << config.field_dump_path << '\n';
  }
  return kExitOk;
}

int cmd_convergence(const rtfem::RunConfig& config, const std::vector<int>& levels) {
  rtfem::RunConfig base = config;
  base.level = levels.empty() ? 1 : levels.front();
  base.spatial_n = 0;
  base.dt = 0.0;
  const rtfem::PreparedRun prepared = rtfem::prepare_run(base);
  if (!prepared.exact_case) {
    throw rtfem::ConfigError("convergence studies need an exact solution (ex1 or ex2)");
  }

  rtfem::StudyOptions options;
  options.parallelism = config.parallelism;
  options.cache_factorizations = config.cache_factorizations;
  options.solver_tol = config.solver_tol;
  const rtfem::ConvergenceTable table =
      rtfem::convergence_study(*prepared.exact_case, levels, options);

  rtfem::write_csv(table, std::cout);
  bool bound_ok = true;
  for (const rtfem::ConvergenceRow& row : table.rows) {
    bound_ok = bound_ok && row.min_stability_margin >= 0.0;
  }
  if (!config.csv_path.empty()) {
    auto out = open_output(config.csv_path);
    rtfem::write_csv(table, out);
    std::cout << "table written to " << config.csv_path << '\n';
  }
  if (!bound_ok) {
    std::cerr << "stability bound violated in at least one run\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_check() {
  const std::vector<rtfem::CheckResult> results = rtfem::run_self_checks();
  bool all_ok = true;
  for (const rtfem::CheckResult& r : results) {
    std::cout << (r.passed ? "PASS" : "FAIL") << ' ' << r.name << ": " << r.detail << '\n';
    all_ok = all_ok && r.passed;
  }
  std::cout << (all_ok ? "all checks passed" : "checks FAILED") << '\n';
  return all_ok ? kExitOk : kExitNumerical;
}

int cmd_mesh_info(int level, int spatial_n, const std::string& dump_angular,
                  const std::string& dump_spatial) {
  const rtfem::AngularMesh angular = rtfem::build_angular_mesh(level);
  const int n = spatial_n > 0 ? spatial_n : (1 << level) + 1;
  const rtfem::SpatialMesh spatial = rtfem::build_spatial_mesh(n);
  double area = 0.0;
  for (const auto& cell : angular.cells) area += cell.area;
  double volume = 0.0;
  for (const auto& tet : spatial.tets) volume += tet.volume;
  std::cout << "angular level " << level << ": " << angular.cell_count()
            << " cells, h_s = " << angular.max_diameter << ", total area = " << area
            << '\n';
  std::cout << "spatial n " << n << ": " << spatial.node_count() << " nodes, "
            << spatial.tets.size() << " tets, " << spatial.boundary_faces.size()
            << " boundary faces, h_x = " << spatial.spacing
            << ", max diameter = " << spatial.max_diameter
            << ", total volume = " << volume << '\n';
  if (!dump_angular.empty()) {
    auto out = open_output(dump_angular);
    rtfem::dump_angular_mesh(angular, out);
  }
  if (!dump_spatial.empty()) {
    auto out = open_output(dump_spatial);
    rtfem::dump_spatial_mesh(spatial, out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-splitting finite element solver for radiative transfer"};
  app.require_subcommand(1);

  rtfem::RunConfig config;

  CLI::App* solve = app.add_subcommand("solve", "Run the time-dependent solver");
  add_common_options(solve, config);
  solve->add_option("--diagnostics", config.diagnostics_path,
                    "Per-step diagnostics file (default: stdout)");
  solve->add_option("--dump-field", config.field_dump_path, "Final field dump file");

  std::vector<int> levels = {1, 2, 3};
  CLI::App* convergence =
      app.add_subcommand("convergence", "Run a mesh-refinement error study");
  add_common_options(convergence, config);
  convergence->add_option("--levels", levels, "Levels to run (paired meshes)");
  convergence->add_option("--csv", config.csv_path, "CSV output path");

  CLI::App* check = app.add_subcommand("check", "Run the library invariant suite");

  int mesh_level = 1;
  int mesh_n = 0;
  std::string dump_angular;
  std::string dump_spatial;
  CLI::App* mesh_info = app.add_subcommand("mesh-info", "Print mesh statistics");
  mesh_info->add_option("--level", mesh_level, "Angular refinement depth");
  mesh_info->add_option("--n", mesh_n, "Vertices per axis (default: 2^level + 1)");
  mesh_info->add_option("--dump-angular", dump_angular, "Angular mesh dump path");
  mesh_info->add_option("--dump-spatial", dump_spatial, "Spatial mesh dump path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (solve->parsed()) return cmd_solve(config);
    if (convergence->parsed()) return cmd_convergence(config, levels);
    if (check->parsed()) return cmd_check();
    if (mesh_info->parsed()) return cmd_mesh_info(mesh_level, mesh_n, dump_angular, dump_spatial);
  } catch (const rtfem::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const rtfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
