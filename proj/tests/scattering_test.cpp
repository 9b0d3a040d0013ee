#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rtfem/scattering.hpp"

using namespace rtfem;

TEST_CASE("phase function point values") {
  const Vec3 up(0.0, 0.0, 1.0);
  const Vec3 side(1.0, 0.0, 0.0);
  CHECK(phase_eval(PhaseFunction::isotropic(), up, side) ==
        doctest::Approx(1.0 / kFourPi).epsilon(1e-14));
  // normalized linear kernel: (1 + mu) / 4pi
  CHECK(phase_eval(PhaseFunction::linear_anisotropic(), up, up) ==
        doctest::Approx(2.0 / kFourPi).epsilon(1e-14));
  CHECK(phase_eval(PhaseFunction::henyey_greenstein(0.0), up, side) ==
        doctest::Approx(1.0 / kFourPi).epsilon(1e-14));
  // direct arithmetic: (1 - 0.25) / (1.25 - 1)^{3/2} / 4pi = 6 / 4pi
  CHECK(phase_eval(PhaseFunction::henyey_greenstein(0.5), up, up) ==
        doctest::Approx(6.0 / kFourPi).epsilon(1e-12));
  CHECK_THROWS_AS(PhaseFunction::henyey_greenstein(1.2), std::invalid_argument);
  CHECK_THROWS_AS(phase_eval(PhaseFunction::isotropic(), Vec3(1.0, 1.0, 0.0), up),
                  std::invalid_argument);
}

TEST_CASE("phase kernels are nonnegative, symmetric, and normalized") {
  std::mt19937 rng(41);
  const std::vector<PhaseFunction> kinds = {PhaseFunction::isotropic(),
                                            PhaseFunction::linear_anisotropic(),
                                            PhaseFunction::henyey_greenstein(0.5),
                                            PhaseFunction::henyey_greenstein(-0.7)};
  for (const PhaseFunction& phase : kinds) {
    for (int k = 0; k < 20; ++k) {
      const Vec3 s = oracles::random_unit(rng);
      const Vec3 sp = oracles::random_unit(rng);
      const double forward = phase_eval(phase, s, sp);
      CHECK(forward >= 0.0);
      CHECK(forward == phase_eval(phase, sp, s));
    }
    const Vec3 s = oracles::random_unit(rng);
    const double integral = oracles::sphere_integral_adaptive(
        [&](const Vec3& sp) { return phase.eval_mu(s.dot(sp)); });
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("angular mass matrix") {
  const AngularMesh mesh = build_angular_mesh(0);
  const Eigen::VectorXd m1 = assemble_angular_mass(mesh);
  CHECK(m1.sum() == doctest::Approx(kFourPi).epsilon(1e-12));
  CHECK(m1.minCoeff() > 0.0);
  for (int i = 0; i < m1.size(); ++i) {
    CHECK(m1[i] == doctest::Approx(m1[0]).epsilon(1e-12));
  }
}

TEST_CASE("scattering matrix: symmetry, isotropic rank-1, normalization decay") {
  const AngularMesh mesh = build_angular_mesh(1);
  const Eigen::VectorXd m1 = assemble_angular_mass(mesh);

  const Eigen::MatrixXd iso = assemble_scattering_matrix(mesh, PhaseFunction::isotropic());
  const Eigen::MatrixXd expected = m1 * m1.transpose() / kFourPi;
  CHECK((iso - expected).cwiseAbs().maxCoeff() < 1e-14);

  for (const PhaseFunction& phase :
       {PhaseFunction::linear_anisotropic(), PhaseFunction::henyey_greenstein(0.5)}) {
    const Eigen::MatrixXd m2 = assemble_scattering_matrix(mesh, phase);
    CHECK((m2 - m2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }

  // the linear kernel is row-normalized exactly on this mesh: the odd term
  // cancels under the seed symmetry
  for (int level = 1; level <= 3; ++level) {
    const AngularMesh m = build_angular_mesh(level);
    const Eigen::VectorXd mass = assemble_angular_mass(m);
    const Eigen::MatrixXd lin =
        assemble_scattering_matrix(m, PhaseFunction::linear_anisotropic());
    const Eigen::VectorXd row_norm = (lin.rowwise().sum()).cwiseQuotient(mass);
    CHECK((row_norm.array() - 1.0).abs().maxCoeff() < 1e-12);
  }

  // the Henyey-Greenstein kernel shows the generic O(h_s^2) defect once past
  // the coarsest level
  std::vector<double> defects;
  for (int level = 2; level <= 4; ++level) {
    const AngularMesh m = build_angular_mesh(level);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.cell_count());
    const Eigen::VectorXd row =
        apply_scattering(m, PhaseFunction::henyey_greenstein(0.5), ones);
    defects.push_back((row.array() - 1.0).abs().maxCoeff());
  }
  for (size_t k = 0; k + 1 < defects.size(); ++k) {
    const double ratio = defects[k] / defects[k + 1];
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
  }
}

TEST_CASE("apply_scattering: normalization, mean cosine, operator norm") {
  const AngularMesh mesh = build_angular_mesh(2);
  const Eigen::VectorXd m1 = assemble_angular_mass(mesh);

  // constant field through the isotropic kernel stays constant up to the
  // quadrature defect
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.cell_count());
  const Eigen::VectorXd iso = apply_scattering(mesh, PhaseFunction::isotropic(), ones);
  CHECK((iso.array() - 1.0).abs().maxCoeff() < 1e-12);  // midpoint rule sums areas exactly

  // Henyey-Greenstein turns s3 into eta * s3, defect O(h^2); cross-checked
  // against the adaptive quadrature oracle at a few directions
  const double eta = 0.5;
  const PhaseFunction hg = PhaseFunction::henyey_greenstein(eta);
  std::vector<double> defects;
  for (int level = 2; level <= 4; ++level) {
    const AngularMesh m = build_angular_mesh(level);
    Eigen::VectorXd v(m.cell_count());
    for (int i = 0; i < m.cell_count(); ++i) v[i] = m.cells[static_cast<size_t>(i)].center.z();
    const Eigen::VectorXd kv = apply_scattering(m, hg, v);
    defects.push_back((kv - eta * v).cwiseAbs().maxCoeff());
  }
  for (size_t k = 0; k + 1 < defects.size(); ++k) {
    const double ratio = defects[k] / defects[k + 1];
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
  }
  for (int i = 0; i < 3; ++i) {
    const Vec3 s = mesh.cells[static_cast<size_t>(i * 37)].center;
    const double oracle = oracles::sphere_integral_adaptive(
        [&](const Vec3& sp) { return hg.eval_mu(s.dot(sp)) * sp.z(); });
    CHECK(oracle == doctest::Approx(eta * s.z()).epsilon(1e-8));
  }

  CHECK_THROWS_AS(apply_scattering(mesh, hg, Eigen::VectorXd::Ones(3)),
                  std::invalid_argument);

  // weighted operator norm stays within the row-sum defect of 1:
  // power iteration on the M1-symmetrized kernel matrix
  const Eigen::MatrixXd m2 = assemble_scattering_matrix(mesh, hg);
  const Eigen::VectorXd sqrt_mass = m1.cwiseSqrt();
  const Eigen::MatrixXd sym = sqrt_mass.asDiagonal().inverse() * m2 *
                              sqrt_mass.asDiagonal().inverse();
  Eigen::VectorXd y = Eigen::VectorXd::Ones(mesh.cell_count()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    y = (sym * y).normalized();
    lambda = y.dot(sym * y);
  }
  const double defect =
      ((m2.rowwise().sum()).cwiseQuotient(m1).array() - 1.0).abs().maxCoeff();
  CHECK(lambda <= 1.0 + 1.05 * defect);
  CHECK(defect < 0.05);  // O(h_s^2) at level 2
}

TEST_CASE("step-1 system") {
  const AngularMesh mesh = build_angular_mesh(1);
  const Eigen::VectorXd m1 = assemble_angular_mass(mesh);

  SUBCASE("pure absorption is a diagonal scale") {
    const Eigen::MatrixXd m2 =
        assemble_scattering_matrix(mesh, PhaseFunction::isotropic());
    const Step1Operator op(m1, m2, CrossSections::make(2.0, 0.0), 0.5);
    Eigen::VectorXd u(mesh.cell_count());
    u.setLinSpaced(mesh.cell_count(), -1.0, 2.0);
    CHECK((op.apply(u) - u / 2.0).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("constant mode sees the absorption coefficient") {
    const Eigen::MatrixXd m2 =
        assemble_scattering_matrix(mesh, PhaseFunction::isotropic());
    const CrossSections sections = CrossSections::make(2.0, 0.5);
    const double dt = 0.1;
    const Step1Operator op(m1, m2, sections, dt);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(mesh.cell_count(), 3.0);
    const Eigen::VectorXd tilde = op.apply(u);
    // eigenvalue oracle: dense solve of the same system
    Eigen::MatrixXd dense = -dt * sections.scattering * m2;
    dense.diagonal() += (1.0 + dt * sections.total) * m1;
    const Eigen::VectorXd oracle =
        Eigen::PartialPivLU<Eigen::MatrixXd>(dense).solve(m1.cwiseProduct(u));
    CHECK((tilde - oracle).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((tilde.array() - 3.0 / (1.0 + dt * sections.absorption())).abs().maxCoeff() <
          dt * sections.scattering * 1e-3);
  }

  SUBCASE("reference coefficients factor at every angular level") {
    for (int level = 1; level <= 4; ++level) {
      const AngularMesh m = build_angular_mesh(level);
      const Eigen::VectorXd mass = assemble_angular_mass(m);
      const Eigen::MatrixXd m2 =
          assemble_scattering_matrix(m, PhaseFunction::linear_anisotropic());
      CHECK_NOTHROW(Step1Operator(mass, m2, CrossSections::make(2.0, 0.5),
                                  1.0 / (1 << level)));
    }
  }

  SUBCASE("per-state norm decay and discrete ellipticity") {
    const AngularMesh m = build_angular_mesh(2);
    const Eigen::VectorXd mass = assemble_angular_mass(m);
    const Eigen::MatrixXd m2 =
        assemble_scattering_matrix(m, PhaseFunction::henyey_greenstein(0.5));
    const CrossSections sections = CrossSections::make(2.0, 0.5);
    const Step1Operator op(mass, m2, sections, 0.25);
    std::mt19937 rng(53);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd u(m.cell_count());
      for (int i = 0; i < u.size(); ++i) u[i] = uniform(rng);
      const Eigen::VectorXd tilde = op.apply(u);
      const double before = std::sqrt(u.dot(mass.cwiseProduct(u)));
      const double after = std::sqrt(tilde.dot(mass.cwiseProduct(tilde)));
      CHECK(after <= before * (1.0 + 1e-12));

      // removal-operator ellipticity with the level-2 quadrature slack
      const double quad_form =
          sections.total * u.dot(mass.cwiseProduct(u)) - sections.scattering * u.dot(m2 * u);
      CHECK(quad_form >= (sections.absorption() - 0.05) * u.dot(mass.cwiseProduct(u)));
    }
  }

  SUBCASE("bad inputs") {
    const Eigen::MatrixXd m2 =
        assemble_scattering_matrix(mesh, PhaseFunction::isotropic());
    CHECK_THROWS_AS(Step1Operator(m1, m2, CrossSections::make(2.0, 0.5), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(CrossSections::make(1.0, 2.0), std::invalid_argument);
    const Step1Operator op(m1, m2, CrossSections::make(2.0, 0.5), 0.25);
    CHECK_THROWS_AS(op.apply(Eigen::VectorXd::Ones(5)), std::invalid_argument);
  }
}
