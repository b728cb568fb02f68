#pragma once

#include <Eigen/Dense>

namespace bolab {

/// Axis-aligned box in raw units. Scaled space is always [0,1]^D.
struct SearchBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  SearchBox() = default;
  SearchBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  Eigen::Index dims() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& x) const;

  /// Affine map into [0,1]^D.
  Eigen::VectorXd to_unit(const Eigen::VectorXd& raw) const;
  /// Inverse of to_unit, clamped so unit-cube points land inside the box exactly.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& unit) const;
};

}  // namespace bolab
