#pragma once

#include <cmath>

#include "rtfem/core.hpp"

namespace rtfem {

/// Scattering phase function Phi(s, s'). All kinds depend only on the
/// scattering cosine mu = s.s', are nonnegative, symmetric, and integrate to
/// exactly 1 over the sphere of outgoing directions.
struct PhaseFunction {
  enum class Kind { Isotropic, LinearAnisotropic, HenyeyGreenstein };

  Kind kind = Kind::Isotropic;
  double anisotropy = 0.0;  // eta, Henyey-Greenstein only, in (-1, 1)

  static PhaseFunction isotropic() { return {Kind::Isotropic, 0.0}; }
  static PhaseFunction linear_anisotropic() { return {Kind::LinearAnisotropic, 0.0}; }
  static PhaseFunction henyey_greenstein(double eta) {
    if (!(eta > -1.0 && eta < 1.0)) {
      throw std::invalid_argument("anisotropy factor eta must lie in (-1, 1)");
    }
    return {Kind::HenyeyGreenstein, eta};
  }

  /// Density per steradian at scattering cosine mu.
  double eval_mu(double mu) const {
    switch (kind) {
      case Kind::Isotropic:
        return 1.0 / kFourPi;
      case Kind::LinearAnisotropic:
        return (1.0 + mu) / kFourPi;
      case Kind::HenyeyGreenstein: {
        const double g = anisotropy;
        const double t = 1.0 + g * g - 2.0 * g * mu;
        return (1.0 - g * g) / (kFourPi * t * std::sqrt(t));
      }
    }
    return 0.0;
  }

  /// Mean scattering cosine: eta for Henyey-Greenstein, 1/3 for the linear
  /// kernel, 0 for isotropic.
  double mean_cosine() const {
    switch (kind) {
      case Kind::Isotropic:
        return 0.0;
      case Kind::LinearAnisotropic:
        return 1.0 / 3.0;
      case Kind::HenyeyGreenstein:
        return anisotropy;
    }
    return 0.0;
  }
};

inline double phase_eval(const PhaseFunction& phase, const Vec3& s, const Vec3& s_prime) {
  require_unit(s, "phase_eval s");
  require_unit(s_prime, "phase_eval s'");
  return phase.eval_mu(s.dot(s_prime));
}

/// Total sigma_t = sigma_a + sigma_s and scattering sigma_s coefficients,
/// spatially constant. Absorption is derived.
struct CrossSections {
  double total = 0.0;
  double scattering = 0.0;

  double absorption() const { return total - scattering; }

  static CrossSections make(double total, double scattering) {
    if (scattering < 0.0) throw std::invalid_argument("sigma_s must be >= 0");
    if (total < scattering) throw std::invalid_argument("sigma_t must be >= sigma_s");
    return {total, scattering};
  }

  /// The convergence analysis assumes absorption >= 1/8; smaller values are
  /// legal but worth a warning.
  bool below_analysis_floor() const { return absorption() < 0.125; }
};

}  // namespace rtfem
