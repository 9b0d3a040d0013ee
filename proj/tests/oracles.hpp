// Test-side oracles, kept independent of the implementation paths they check:
// Gauss-Legendre sphere quadrature with adaptive order doubling, and a
// finite-difference / quadrature residual of the transport equation.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "rtfem/core.hpp"
#include "rtfem/verification.hpp"

namespace oracles {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Nodes by Newton iteration on the Legendre recurrence.
inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(rtfem::kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<size_t>(i)] = x;
    rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Integral over the unit sphere: Gauss-Legendre in cos(theta) x trapezoid in
// phi (spectrally accurate for smooth integrands).
inline double sphere_integral_fixed(const std::function<double(const rtfem::Vec3&)>& fn,
                                    int order) {
  const GaussLegendre gl = gauss_legendre(order);
  const int n_phi = 2 * order;
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    const double mu = gl.nodes[static_cast<size_t>(i)];
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * rtfem::kPi * j / n_phi;
      ring += fn(rtfem::Vec3(sin_theta * std::cos(phi), sin_theta * std::sin(phi), mu));
    }
    total += gl.weights[static_cast<size_t>(i)] * ring * (2.0 * rtfem::kPi / n_phi);
  }
  return total;
}

inline double sphere_integral_adaptive(const std::function<double(const rtfem::Vec3&)>& fn,
                                       double tol = 1e-10) {
  double previous = sphere_integral_fixed(fn, 8);
  for (int order = 16; order <= 256; order *= 2) {
    const double current = sphere_integral_fixed(fn, order);
    if (std::abs(current - previous) <= tol * std::max(1.0, std::abs(current))) {
      return current;
    }
    previous = current;
  }
  throw std::runtime_error("sphere_integral_adaptive did not converge");
}

// residual of  u_t + s.grad(u) + sigma_t u - sigma_s K u - f  at one point,
// with finite-difference derivatives and adaptive scattering quadrature
inline double pde_residual(const rtfem::ManufacturedCase& mcase, const rtfem::Vec3& x,
                           const rtfem::Vec3& s, double t) {
  const double ht = 1e-5;
  const double hx = 1e-5;
  const auto& u = mcase.exact;

  const double u_t = (u(x, s, t + ht) - u(x, s, t - ht)) / (2.0 * ht);
  double convection = 0.0;
  for (int a = 0; a < 3; ++a) {
    rtfem::Vec3 xp = x;
    rtfem::Vec3 xm = x;
    xp[a] += hx;
    xm[a] -= hx;
    convection += s[a] * (u(xp, s, t) - u(xm, s, t)) / (2.0 * hx);
  }
  const double scattered = sphere_integral_adaptive(
      [&](const rtfem::Vec3& s_prime) {
        return mcase.phase.eval_mu(s.dot(s_prime)) * u(x, s_prime, t);
      },
      1e-11);
  return u_t + convection + mcase.sections.total * u(x, s, t) -
         mcase.sections.scattering * scattered - mcase.source(x, s, t);
}

inline rtfem::Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  rtfem::Vec3 v;
  do {
    v = rtfem::Vec3(normal(rng), normal(rng), normal(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

// interior point with margin for the finite-difference stencils
inline rtfem::Vec3 random_interior_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> uniform(0.05, 0.95);
  return {uniform(rng), uniform(rng), uniform(rng)};
}

}  // namespace oracles
