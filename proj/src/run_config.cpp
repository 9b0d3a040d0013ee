#include "rtfem/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace rtfem {

namespace {

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto notspace = [](unsigned char c) { return !std::isspace(c); };
      s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
      s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

double to_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("problem file: key '" + key + "' is not a number: " + it->second);
  }
}

std::string to_string_or(const std::map<std::string, std::string>& kv,
                         const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

}  // namespace

ModelProblem parse_problem_file(const std::string& path) {
  const auto kv = read_key_values(path);
  ModelProblem problem;
  problem.sections =
      CrossSections::make(to_double(kv, "sigma_t", 2.0), to_double(kv, "sigma_s", 0.5));

  const std::string phase = to_string_or(kv, "phase", "isotropic");
  if (phase == "isotropic") {
    problem.phase = PhaseFunction::isotropic();
  } else if (phase == "linear") {
    problem.phase = PhaseFunction::linear_anisotropic();
  } else if (phase == "hg") {
    problem.phase = PhaseFunction::henyey_greenstein(to_double(kv, "eta", 0.5));
  } else {
    throw ConfigError("problem file: unknown phase '" + phase +
                      "' (expected isotropic, linear, or hg)");
  }

  const std::string source = to_string_or(kv, "source", "zero");
  if (source == "zero") {
    problem.source = SourceFn{};
  } else if (source == "constant") {
    const double value = to_double(kv, "source_value", 1.0);
    problem.source = [value](const Vec3&, const Vec3&, double) { return value; };
  } else {
    throw ConfigError("problem file: unknown source '" + source +
                      "' (expected zero or constant)");
  }

  const std::string initial = to_string_or(kv, "initial", "zero");
  if (initial == "zero") {
    problem.initial = InitialFn{};
  } else if (initial == "sine-product") {
    problem.initial = [](const Vec3& x, const Vec3&) {
      return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
    };
  } else {
    throw ConfigError("problem file: unknown initial '" + initial +
                      "' (expected zero or sine-product)");
  }
  return problem;
}

PreparedRun prepare_run(const RunConfig& config) {
  PreparedRun prepared;
  if (config.example == "ex1") {
    prepared.exact_case = example_one(CrossSections::make(config.sigma_t, config.sigma_s));
  } else if (config.example == "ex2") {
    prepared.exact_case =
        example_two(config.eta, CrossSections::make(config.sigma_t, config.sigma_s));
  } else {
    prepared.problem = parse_problem_file(config.example);
  }
  if (prepared.exact_case) {
    prepared.problem.phase = prepared.exact_case->phase;
    prepared.problem.sections = prepared.exact_case->sections;
    prepared.problem.source = prepared.exact_case->source;
    prepared.problem.initial = prepared.exact_case->initial();
  }

  ModelProblem& problem = prepared.problem;
  problem.angular_level = config.level;
  problem.spatial_n = config.spatial_n > 0 ? config.spatial_n : (1 << config.level) + 1;
  if (problem.spatial_n < 2) throw ConfigError("spatial mesh needs at least 2 vertices per axis");
  problem.dt = config.dt > 0.0 ? config.dt : 1.0 / (problem.spatial_n - 1);
  problem.final_time = config.final_time;
  problem.stabilization = StabilizationPolicy{config.delta0, config.delta_cap_to_dt};
  problem.solver_tol = config.solver_tol;
  problem.parallelism = config.parallelism;
  problem.cache_factorizations = config.cache_factorizations;

  validate_problem(problem);  // throws ConfigError naming the violated bound
  return prepared;
}

void write_diagnostics(std::ostream& out, const std::vector<StepDiagnostics>& steps) {
  out.precision(17);
  for (const StepDiagnostics& d : steps) {
    out << d.step << ' ' << d.time << ' ' << d.solution_norm << ' ' << d.residual_check
        << '\n';
  }
}

void write_field_dump(std::ostream& out, const SolutionField& field,
                      const AngularMesh& angular, const SpatialMesh& spatial) {
  out << "# angular_level " << angular.level << '\n';
  out << "# directions " << field.directions << '\n';
  out << "# spatial_n " << spatial.n << '\n';
  out << "# nodes " << field.nodes << '\n';
  out.precision(17);
  for (int l = 0; l < field.nodes; ++l) {
    for (int i = 0; i < field.directions; ++i) {
      out << l << ' ' << i << ' ' << field.at(i, l) << '\n';
    }
  }
}

}  // namespace rtfem
