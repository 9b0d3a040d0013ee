#pragma once

#include <Eigen/Dense>

#include <vector>

#include "rtfem/core.hpp"

namespace rtfem {

/// Coefficient array u_{i,l} over directions i and spatial nodes l, stored in
/// one of two layouts:
///   AngularMajor: the angular vector of each spatial node is contiguous
///                 (value(i,l) = data[l*Ns + i]), Step-1 order;
///   SpatialMajor: the nodal vector of each direction is contiguous
///                 (value(i,l) = data[i*Nx + l]), Step-2 order.
struct SolutionField {
  enum class Layout { AngularMajor, SpatialMajor };

  int directions = 0;
  int nodes = 0;
  Layout layout = Layout::AngularMajor;
  std::vector<double> data;

  static SolutionField zeros(int directions, int nodes,
                             Layout layout = Layout::AngularMajor) {
    SolutionField f;
    f.directions = directions;
    f.nodes = nodes;
    f.layout = layout;
    f.data.assign(static_cast<size_t>(directions) * static_cast<size_t>(nodes), 0.0);
    return f;
  }

  double& at(int direction, int node) {
    return data[index(direction, node)];
  }
  double at(int direction, int node) const {
    return data[index(direction, node)];
  }

  size_t index(int direction, int node) const {
    return layout == Layout::AngularMajor
               ? static_cast<size_t>(node) * static_cast<size_t>(directions) +
                     static_cast<size_t>(direction)
               : static_cast<size_t>(direction) * static_cast<size_t>(nodes) +
                     static_cast<size_t>(node);
  }

  /// Contiguous angular vector of one spatial node (AngularMajor only).
  Eigen::Map<const Eigen::VectorXd> node_slice(int node) const;
  Eigen::Map<Eigen::VectorXd> node_slice(int node);
  /// Contiguous nodal vector of one direction (SpatialMajor only).
  Eigen::Map<const Eigen::VectorXd> direction_slice(int direction) const;
  Eigen::Map<Eigen::VectorXd> direction_slice(int direction);
};

/// Permutes the coefficients into the other layout. An involution: applying
/// it twice restores the field bitwise.
SolutionField transpose_layout(const SolutionField& field);

}  // namespace rtfem
