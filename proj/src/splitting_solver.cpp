#include "rtfem/splitting_solver.hpp"

#include <cmath>
#include <sstream>

#include "rtfem/quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rtfem {

namespace {

int resolve_threads(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace

std::vector<std::string> validate_problem(const ModelProblem& problem) {
  if (problem.angular_level < 0 || problem.angular_level > 6) {
    throw ConfigError("angular level must lie in [0, 6]");
  }
  if (problem.spatial_n < 2) {
    throw ConfigError("spatial mesh needs at least 2 vertices per axis");
  }
  if (!(problem.dt > 0.0)) throw ConfigError("time step must be positive");
  if (problem.dt > 0.5 + 1e-12) {
    std::ostringstream msg;
    msg << "time step must satisfy dt <= 1/2 (got " << problem.dt << ")";
    throw ConfigError(msg.str());
  }
  if (!(problem.final_time > 0.0)) throw ConfigError("final time must be positive");
  const double steps = problem.final_time / problem.dt;
  if (std::abs(steps - std::lround(steps)) > 1e-12 * std::max(1.0, steps)) {
    std::ostringstream msg;
    msg << "dt must divide the final time (T/dt = " << steps << ")";
    throw ConfigError(msg.str());
  }
  // stabilization bounds, checked against the largest cell a Kuhn mesh of
  // this resolution will contain (sqrt(3) * axis spacing)
  const double h_max = std::sqrt(3.0) / (problem.spatial_n - 1);
  const double d = problem.stabilization.delta(h_max, problem.dt);
  if (d > 0.25 * problem.dt * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "stabilization policy violates delta_K <= dt/4 (delta_K = " << d
        << ", dt/4 = " << 0.25 * problem.dt << ")";
    throw ConfigError(msg.str());
  }
  if (problem.stabilization.delta0 < 0.0) {
    throw ConfigError("stabilization constant delta0 must be >= 0");
  }
  if (!(problem.solver_tol > 0.0)) throw ConfigError("solver tolerance must be positive");

  std::vector<std::string> warnings;
  if (problem.sections.below_analysis_floor()) {
    std::ostringstream msg;
    msg << "absorption coefficient " << problem.sections.absorption()
        << " is below the 1/8 floor assumed by the convergence analysis";
    warnings.push_back(msg.str());
  }
  return warnings;
}

AssembledOperators AssembledOperators::build(const ModelProblem& problem) {
  validate_problem(problem);
  AngularMesh angular = build_angular_mesh(problem.angular_level);
  SpatialMesh spatial = build_spatial_mesh(problem.spatial_n);
  Eigen::VectorXd m1 = assemble_angular_mass(angular);
  Eigen::MatrixXd m2 = assemble_scattering_matrix(angular, problem.phase);
  Step1Operator step1(m1, m2, problem.sections, problem.dt);
  SpatialComponents comp =
      assemble_spatial_components(spatial, problem.stabilization, problem.dt);

  AssembledOperators ops{std::move(angular),
                         std::move(spatial),
                         std::move(m1),
                         std::move(m2),
                         std::move(step1),
                         std::move(comp),
                         {},
                         {},
                         problem.dt,
                         problem.solver_tol,
                         problem.cache_factorizations,
                         resolve_threads(problem.parallelism)};
  ops.mass_matrix = ops.components.with_values(ops.components.mass);

  ops.directions.resize(static_cast<size_t>(ops.angular_mesh.cell_count()));
  const int n_dir = ops.angular_mesh.cell_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(ops.threads)
#endif
  for (int i = 0; i < n_dir; ++i) {
    const Vec3 s = ops.angular_mesh.cells[static_cast<size_t>(i)].center;
    DirectionSystem& dir = ops.directions[static_cast<size_t>(i)];
    dir.boundary = classify_boundary(ops.spatial_mesh, s);
    dir.system = compose_step2_matrix(ops.components, s, ops.dt, dir.boundary);
    dir.step2_mass = compose_step2_mass(ops.components, s);
    if (ops.cache_factorizations) dir.factorization.emplace(dir.system);
  }
  return ops;
}

double tensor_l2_norm(const SolutionField& field, const Eigen::VectorXd& angular_mass,
                      const SparseMatrix& mass_matrix) {
  const SolutionField* f = &field;
  SolutionField transposed;
  if (field.layout != SolutionField::Layout::SpatialMajor) {
    transposed = transpose_layout(field);
    f = &transposed;
  }
  double acc = 0.0;
  for (int i = 0; i < f->directions; ++i) {
    const Eigen::VectorXd u = f->direction_slice(i);
    acc += angular_mass[i] * u.dot(mass_matrix.multiply(u));
  }
  return std::sqrt(std::max(0.0, acc));
}

double tensor_l2_norm(const SolutionField& field, const AssembledOperators& ops) {
  return tensor_l2_norm(field, ops.angular_mass, ops.mass_matrix);
}

SolutionField project_initial(const AssembledOperators& ops, const InitialFn& u0) {
  SolutionField field = SolutionField::zeros(ops.angular_mesh.cell_count(),
                                             ops.spatial_mesh.node_count());
  if (!u0) return field;
  for (int l = 0; l < field.nodes; ++l) {
    const Vec3& x = ops.spatial_mesh.nodes[static_cast<size_t>(l)];
    for (int i = 0; i < field.directions; ++i) {
      field.at(i, l) = u0(x, ops.angular_mesh.cells[static_cast<size_t>(i)].center);
    }
  }
  return field;
}

SolutionField angular_sweep(const SolutionField& field, const AssembledOperators& ops,
                            double* max_residual) {
  if (field.layout != SolutionField::Layout::AngularMajor) {
    throw std::invalid_argument("angular_sweep: field must be in angular-major layout");
  }
  if (field.directions != ops.step1.directions()) {
    throw std::invalid_argument("angular_sweep: direction count mismatch");
  }
  SolutionField out = field;
  std::vector<double> residual(static_cast<size_t>(field.nodes), 0.0);
  const int n_nodes = field.nodes;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(ops.threads)
#endif
  for (int l = 0; l < n_nodes; ++l) {
    const Eigen::VectorXd u_old = field.node_slice(l);
    const Eigen::VectorXd u_new = ops.step1.apply(u_old);
    out.node_slice(l) = u_new;
    if (max_residual) residual[static_cast<size_t>(l)] = ops.step1.residual(u_old, u_new);
  }
  if (max_residual) {
    *max_residual = 0.0;
    for (double r : residual) *max_residual = std::max(*max_residual, r);
  }
  return out;
}

SolutionField transport_sweep(const SolutionField& field, const AssembledOperators& ops,
                              const SourceFn& source, double t_next,
                              double* max_residual) {
  if (field.layout != SolutionField::Layout::SpatialMajor) {
    throw std::invalid_argument("transport_sweep: field must be in spatial-major layout");
  }
  if (field.directions != static_cast<int>(ops.directions.size())) {
    throw std::invalid_argument("transport_sweep: direction count mismatch");
  }
  SolutionField out = field;
  std::vector<double> residual(static_cast<size_t>(field.directions), 0.0);
  std::vector<std::string> failures(static_cast<size_t>(field.directions));
  const int n_dir = field.directions;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(ops.threads)
#endif
  for (int i = 0; i < n_dir; ++i) {
    const DirectionSystem& dir = ops.directions[static_cast<size_t>(i)];
    try {
      const Vec3 s = ops.angular_mesh.cells[static_cast<size_t>(i)].center;
      Eigen::VectorXd rhs =
          ops.dt * assemble_load(ops.spatial_mesh, ops.components, dir.boundary,
                                 source, s, t_next) +
          dir.step2_mass.multiply(field.direction_slice(i));
      for (int node : dir.boundary.inflow_nodes) rhs[node] = 0.0;
      Eigen::VectorXd u;
      if (dir.factorization) {
        u = dir.factorization->solve(rhs);
      } else {
        SparseFactorization fact(dir.system);
        u = fact.solve(rhs);
      }
      const double rhs_norm = rhs.norm();
      const double res = (dir.system.multiply(u) - rhs).norm();
      const double rel = rhs_norm > 0.0 ? res / rhs_norm : res;
      if (!(rel <= ops.solver_tol)) {
        std::ostringstream msg;
        msg << "direction " << i << ": relative residual " << rel
            << " exceeds tolerance " << ops.solver_tol;
        throw NumericalError(msg.str());
      }
      residual[static_cast<size_t>(i)] = rel;
      out.direction_slice(i) = u;
    } catch (const std::exception& e) {
      failures[static_cast<size_t>(i)] = e.what();
    }
  }
  for (size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      throw NumericalError("transport sweep failed in direction " + std::to_string(i) +
                           ": " + failures[i]);
    }
  }
  if (max_residual) {
    *max_residual = 0.0;
    for (double r : residual) *max_residual = std::max(*max_residual, r);
  }
  return out;
}

SolutionField advance(const SolutionField& field, const AssembledOperators& ops,
                      const SourceFn& source, double t_next, double* max_residual) {
  double r1 = 0.0;
  double r2 = 0.0;
  SolutionField tilde = angular_sweep(field, ops, max_residual ? &r1 : nullptr);
  SolutionField by_direction = transpose_layout(tilde);
  SolutionField updated =
      transport_sweep(by_direction, ops, source, t_next, max_residual ? &r2 : nullptr);
  if (max_residual) *max_residual = std::max(r1, r2);
  return transpose_layout(updated);
}

namespace {

// L2(G) norm of the source at fixed time, by the load quadrature and the
// angular midpoint rule; used by the stability-bound tracker.
double source_norm_squared(const AssembledOperators& ops, const SourceFn& f, double t) {
  if (!f) return 0.0;
  const TetQuadrature& rule = TetQuadrature::degree2();
  const size_t nq = rule.points.size();
  std::vector<double> per_direction(static_cast<size_t>(ops.angular_mesh.cell_count()), 0.0);
  const int n_dir = ops.angular_mesh.cell_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(ops.threads)
#endif
  for (int i = 0; i < n_dir; ++i) {
    const SphericalCell& cell = ops.angular_mesh.cells[static_cast<size_t>(i)];
    double acc = 0.0;
    for (size_t tt = 0; tt < ops.spatial_mesh.tets.size(); ++tt) {
      const double vol = ops.spatial_mesh.tets[tt].volume;
      for (size_t q = 0; q < nq; ++q) {
        const double fv = f(ops.components.load_points[tt * nq + q], cell.center, t);
        acc += rule.points[q].weight * vol * fv * fv;
      }
    }
    per_direction[static_cast<size_t>(i)] = acc * cell.area;
  }
  double total = 0.0;
  for (double v : per_direction) total += v;
  return total;
}

}  // namespace

RunResult run(const ModelProblem& problem, const RunOptions& options) {
  RunResult result;
  result.warnings = validate_problem(problem);
  const AssembledOperators ops = AssembledOperators::build(problem);

  SolutionField field = project_initial(ops, problem.initial);
  const int n_steps = problem.step_count();
  result.steps.reserve(static_cast<size_t>(n_steps));

  double delta_max = 0.0;
  for (double d : ops.components.delta) delta_max = std::max(delta_max, d);
  const double u0_sq = std::pow(tensor_l2_norm(field, ops), 2);
  double source_sum_sq = 0.0;

  for (int step = 1; step <= n_steps; ++step) {
    const double t_next = step * problem.dt;
    double residual = 0.0;
    field = advance(field, ops, problem.source, t_next, &residual);

    StepDiagnostics diag;
    diag.step = step;
    diag.time = t_next;
    diag.solution_norm = tensor_l2_norm(field, ops);
    diag.residual_check = residual;
    result.steps.push_back(diag);

    if (options.track_stability_bound) {
      source_sum_sq += source_norm_squared(ops, problem.source, t_next);
      const double bound =
          std::exp(2.0 * problem.final_time) *
          (u0_sq + 2.0 * problem.dt * (1.0 + 4.0 * delta_max * problem.dt) * source_sum_sq);
      result.stability_margin.push_back(bound - diag.solution_norm * diag.solution_norm);
    }
    if (options.observer) options.observer(diag, field);
  }
  result.final_field = std::move(field);
  return result;
}

std::vector<SolutionField> monolithic_reference_solve(const ModelProblem& problem) {
  validate_problem(problem);
  ModelProblem assembly_problem = problem;
  assembly_problem.cache_factorizations = false;  // per-direction LUs are not used here
  const AssembledOperators ops = AssembledOperators::build(assembly_problem);

  const int n_dir = ops.angular_mesh.cell_count();
  const int n_nodes = ops.spatial_mesh.node_count();
  const long unknowns = static_cast<long>(n_dir) * n_nodes;
  if (unknowns > 10000) {
    throw ResourceLimitError(
        "monolithic reference is guarded to N_s * N_x <= 10^4 unknowns (got " +
        std::to_string(unknowns) + ")");
  }

  // tensor system, row (i,l) -> i * n_nodes + l:
  //   |K_i| [ (M + G_i) + dt (C_i + W_i) ] on the diagonal block
  //   + dt (sigma_t M1 - sigma_s M2)_{ij} (M + G_i) coupling blocks,
  // inflow rows per direction replaced by unit rows. Coupling the removal
  // operator through the same step-2 mass that carries the time derivative
  // makes this exactly the unsplit composition of the two split factors.
  std::vector<Eigen::Triplet<double>> trips;
  const double dt = problem.dt;
  const double sigma_t = problem.sections.total;
  const double sigma_s = problem.sections.scattering;
  for (int i = 0; i < n_dir; ++i) {
    const Vec3 s = ops.angular_mesh.cells[static_cast<size_t>(i)].center;
    const double area = ops.angular_mass[i];
    const DirectionBoundary& bnd = ops.directions[static_cast<size_t>(i)].boundary;
    const SparseMatrix transport = compose_step2_matrix(
        ops.components, s, dt, DirectionBoundary{});  // no rows replaced yet
    const SparseMatrix& step2_mass = ops.directions[static_cast<size_t>(i)].step2_mass;
    for (int r = 0; r < n_nodes; ++r) {
      const long row = static_cast<long>(i) * n_nodes + r;
      if (bnd.is_inflow[static_cast<size_t>(r)]) {
        trips.emplace_back(row, row, 1.0);
        continue;
      }
      for (int k = transport.row_offsets[r]; k < transport.row_offsets[r + 1]; ++k) {
        trips.emplace_back(row, static_cast<long>(i) * n_nodes + transport.col_indices[k],
                           area * transport.values[k]);
      }
      for (int j = 0; j < n_dir; ++j) {
        const double coupling =
            dt * ((i == j ? sigma_t * area : 0.0) - sigma_s * ops.scattering_mass(i, j));
        if (coupling == 0.0) continue;
        for (int k = step2_mass.row_offsets[r]; k < step2_mass.row_offsets[r + 1]; ++k) {
          trips.emplace_back(row,
                             static_cast<long>(j) * n_nodes + step2_mass.col_indices[k],
                             coupling * step2_mass.values[k]);
        }
      }
    }
  }
  const int dim = static_cast<int>(unknowns);
  SparseMatrix system = SparseMatrix::from_triplets(dim, dim, std::move(trips));
  SparseFactorization fact(system);

  std::vector<SolutionField> history;
  history.push_back(project_initial(ops, problem.initial));

  SolutionField state = transpose_layout(history.front());  // spatial-major
  const int n_steps = problem.step_count();
  for (int step = 1; step <= n_steps; ++step) {
    const double t_next = step * dt;
    Eigen::VectorXd rhs(dim);
    for (int i = 0; i < n_dir; ++i) {
      const Vec3 s = ops.angular_mesh.cells[static_cast<size_t>(i)].center;
      const double area = ops.angular_mass[i];
      const DirectionSystem& dir = ops.directions[static_cast<size_t>(i)];
      Eigen::VectorXd block =
          area * (dir.step2_mass.multiply(state.direction_slice(i)) +
                  dt * assemble_load(ops.spatial_mesh, ops.components, dir.boundary,
                                     problem.source, s, t_next));
      for (int node : dir.boundary.inflow_nodes) block[node] = 0.0;
      rhs.segment(static_cast<long>(i) * n_nodes, n_nodes) = block;
    }
    const Eigen::VectorXd x = fact.solve(rhs);
    const double rel = (system.multiply(x) - rhs).norm() / std::max(rhs.norm(), 1e-300);
    if (!(rel <= problem.solver_tol)) {
      throw NumericalError("monolithic solve residual " + std::to_string(rel) +
                           " exceeds tolerance");
    }
    for (int i = 0; i < n_dir; ++i) {
      state.direction_slice(i) = x.segment(static_cast<long>(i) * n_nodes, n_nodes);
    }
    history.push_back(transpose_layout(state));
  }
  return history;
}

}  // namespace rtfem
