#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace bolab::bench {

using Vec = Eigen::VectorXd;

struct GklsParams {
  int dims = 2;
  double distance = 0.9;  ///< global minimizer to paraboloid vertex
  double radius = 0.4;    ///< attraction radius of the global minimizer
  int num_minima = 10;    ///< local minima including the vertex and the global one
  std::uint64_t seed = 12;
  double vertex_value = 0.0;
  double global_value = -1.0;
};

/// Twice continuously differentiable GKLS-type function on [-1,1]^D: a
/// paraboloid ||x - T||^2 + t with quintic pits carved into disjoint balls.
/// Ball 0 holds the global minimizer.
struct GklsInstance {
  GklsParams params;
  Vec vertex;
  std::vector<Vec> minimizers;
  std::vector<double> values;
  std::vector<double> radii;
  std::vector<double> curvature;  ///< quadratic coefficient of each pit

  double evaluate(const Vec& x) const;
  const Vec& global_minimizer() const { return minimizers.front(); }
  double global_value() const { return values.front(); }
};

/// Draws an instance from its own seeded stream. Every pit is certified on a
/// ray grid (value above its minimum and single-peaked along rays) before the
/// instance is accepted. Throws InfeasibleGeometry when no admissible layout is
/// found within the retry budget.
GklsInstance gkls_generate(const GklsParams& params);

}  // namespace bolab::bench
