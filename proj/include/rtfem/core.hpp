#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <stdexcept>
#include <string>

namespace rtfem {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// Invalid configuration or violated precondition. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request exceeding a built-in resource guard (mesh level, monolithic size).
class ResourceLimitError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Linear-algebra breakdown or residual-contract violation. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_unit(const Vec3& s, const char* what) {
  if (std::abs(s.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument(std::string(what) +
                                " must be a unit vector (|s| = " +
                                std::to_string(s.norm()) + ")");
  }
}

}  // namespace rtfem
