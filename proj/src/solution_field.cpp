#include "rtfem/solution_field.hpp"

#include <string>

namespace rtfem {

namespace {

void require_layout(const SolutionField& f, SolutionField::Layout expected, const char* op) {
  if (f.layout != expected) {
    throw std::invalid_argument(std::string(op) + ": field is in the wrong layout");
  }
}

}  // namespace

Eigen::Map<const Eigen::VectorXd> SolutionField::node_slice(int node) const {
  require_layout(*this, Layout::AngularMajor, "node_slice");
  return {data.data() + static_cast<size_t>(node) * static_cast<size_t>(directions),
          directions};
}

Eigen::Map<Eigen::VectorXd> SolutionField::node_slice(int node) {
  require_layout(*this, Layout::AngularMajor, "node_slice");
  return {data.data() + static_cast<size_t>(node) * static_cast<size_t>(directions),
          directions};
}

Eigen::Map<const Eigen::VectorXd> SolutionField::direction_slice(int direction) const {
  require_layout(*this, Layout::SpatialMajor, "direction_slice");
  return {data.data() + static_cast<size_t>(direction) * static_cast<size_t>(nodes),
          nodes};
}

Eigen::Map<Eigen::VectorXd> SolutionField::direction_slice(int direction) {
  require_layout(*this, Layout::SpatialMajor, "direction_slice");
  return {data.data() + static_cast<size_t>(direction) * static_cast<size_t>(nodes),
          nodes};
}

SolutionField transpose_layout(const SolutionField& field) {
  SolutionField out;
  out.directions = field.directions;
  out.nodes = field.nodes;
  out.layout = field.layout == SolutionField::Layout::AngularMajor
                   ? SolutionField::Layout::SpatialMajor
                   : SolutionField::Layout::AngularMajor;
  out.data.resize(field.data.size());
  for (int i = 0; i < field.directions; ++i) {
    for (int l = 0; l < field.nodes; ++l) {
      out.data[out.index(i, l)] = field.data[field.index(i, l)];
    }
  }
  return out;
}

}  // namespace rtfem
