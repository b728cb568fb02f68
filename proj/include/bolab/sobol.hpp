#pragma once

#include <Eigen/Dense>

namespace bolab::local {

inline constexpr int kSobolMaxDims = 16;

/// First n points (rows) of the unscrambled Sobol sequence in d dimensions,
/// Joe-Kuo direction numbers, Gray-code order, starting after the origin.
/// Throws DimensionTooLarge for d > 16.
Eigen::MatrixXd sobol_points(int n, int d);

}  // namespace bolab::local
