#pragma once

#include <Eigen/Dense>

#include <optional>

#include "rtfem/angular_mesh.hpp"
#include "rtfem/linalg.hpp"
#include "rtfem/phase_function.hpp"

namespace rtfem {

/// Diagonal angular mass matrix: entry i is the spherical area of cell i.
Eigen::VectorXd assemble_angular_mass(const AngularMesh& mesh);

/// Dense scattering mass matrix, entries Phi(s_i, s_j) |K_i| |K_j| (midpoint
/// quadrature on both integrals). Symmetric because Phi depends on s_i.s_j.
Eigen::MatrixXd assemble_scattering_matrix(const AngularMesh& mesh,
                                           const PhaseFunction& phase);

/// Applies the discrete scattering operator: (Kv)_i = sum_j Phi(s_i,s_j) v_j |K_j|.
/// Matrix-free; equals M1^{-1} M2 v when the matrices are assembled.
Eigen::VectorXd apply_scattering(const AngularMesh& mesh, const PhaseFunction& phase,
                                 const Eigen::VectorXd& v);

/// Factored system of the angular half-step:
///   (M1 + dt*sigma_t*M1 - dt*sigma_s*M2) u_new = M1 u_old,
/// reused for every spatial node and every time step.
class Step1Operator {
 public:
  Step1Operator(const Eigen::VectorXd& angular_mass, const Eigen::MatrixXd& scattering_mass,
                const CrossSections& sections, double dt);

  /// Solves for one spatial node's angular coefficient vector.
  Eigen::VectorXd apply(const Eigen::VectorXd& u_old) const;

  /// Relative residual ||M_s u_new - M1 u_old|| / ||M1 u_old|| of a computed step.
  double residual(const Eigen::VectorXd& u_old, const Eigen::VectorXd& u_new) const;

  double dt() const { return dt_; }
  int directions() const { return static_cast<int>(angular_mass_.size()); }
  const Eigen::VectorXd& angular_mass() const { return angular_mass_; }
  const Eigen::MatrixXd& system_matrix() const { return system_; }

 private:
  Eigen::VectorXd angular_mass_;
  Eigen::MatrixXd system_;
  std::optional<DenseFactorization> factorization_;
  double dt_ = 0.0;
};

inline Step1Operator build_step1_system(const Eigen::VectorXd& angular_mass,
                                        const Eigen::MatrixXd& scattering_mass,
                                        const CrossSections& sections, double dt) {
  return Step1Operator(angular_mass, scattering_mass, sections, dt);
}

}  // namespace rtfem
