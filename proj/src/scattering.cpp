#include "rtfem/scattering.hpp"

namespace rtfem {

Eigen::VectorXd assemble_angular_mass(const AngularMesh& mesh) {
  Eigen::VectorXd m(mesh.cell_count());
  for (int i = 0; i < mesh.cell_count(); ++i) {
    m[i] = mesh.cells[static_cast<size_t>(i)].area;
  }
  return m;
}

Eigen::MatrixXd assemble_scattering_matrix(const AngularMesh& mesh,
                                           const PhaseFunction& phase) {
  const int n = mesh.cell_count();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    const SphericalCell& ci = mesh.cells[static_cast<size_t>(i)];
    for (int j = 0; j <= i; ++j) {
      const SphericalCell& cj = mesh.cells[static_cast<size_t>(j)];
      const double value = phase.eval_mu(ci.center.dot(cj.center)) * ci.area * cj.area;
      m(i, j) = value;
      m(j, i) = value;
    }
  }
  return m;
}

Eigen::VectorXd apply_scattering(const AngularMesh& mesh, const PhaseFunction& phase,
                                 const Eigen::VectorXd& v) {
  const int n = mesh.cell_count();
  if (v.size() != n) {
    throw std::invalid_argument("apply_scattering: coefficient vector length mismatch");
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const Vec3& si = mesh.cells[static_cast<size_t>(i)].center;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const SphericalCell& cj = mesh.cells[static_cast<size_t>(j)];
      acc += phase.eval_mu(si.dot(cj.center)) * v[j] * cj.area;
    }
    out[i] = acc;
  }
  return out;
}

Step1Operator::Step1Operator(const Eigen::VectorXd& angular_mass,
                             const Eigen::MatrixXd& scattering_mass,
                             const CrossSections& sections, double dt)
    : angular_mass_(angular_mass), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step-1 system requires dt > 0");
  if (scattering_mass.rows() != angular_mass.size() ||
      scattering_mass.cols() != angular_mass.size()) {
    throw std::invalid_argument("step-1 system: matrix dimensions disagree");
  }
  system_ = -dt * sections.scattering * scattering_mass;
  system_.diagonal() += (1.0 + dt * sections.total) * angular_mass;
  factorization_.emplace(system_);  // throws NumericalError with rcond if singular
}

Eigen::VectorXd Step1Operator::apply(const Eigen::VectorXd& u_old) const {
  if (u_old.size() != angular_mass_.size()) {
    throw std::invalid_argument("step-1 apply: coefficient vector length mismatch");
  }
  return factorization_->solve(angular_mass_.cwiseProduct(u_old));
}

double Step1Operator::residual(const Eigen::VectorXd& u_old,
                               const Eigen::VectorXd& u_new) const {
  const Eigen::VectorXd rhs = angular_mass_.cwiseProduct(u_old);
  const double denom = rhs.norm();
  const double num = (system_ * u_new - rhs).norm();
  return denom > 0.0 ? num / denom : num;
}

}  // namespace rtfem
