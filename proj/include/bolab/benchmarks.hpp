#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bolab/gkls.hpp"
#include "bolab/rng.hpp"
#include "bolab/search_box.hpp"

namespace bolab::bench {

using Mat = Eigen::MatrixXd;

struct MuellerBrownCoefficients {
  std::array<double, 4> A{-200.0, -100.0, -170.0, 15.0};
  std::array<double, 4> a{-1.0, -1.0, -6.5, 0.7};
  std::array<double, 4> b{0.0, 0.0, 11.0, 0.6};
  std::array<double, 4> c{-10.0, -10.0, -6.5, 0.7};
  std::array<double, 4> w1{1.0, 0.0, -0.5, -1.0};
  std::array<double, 4> w2{0.0, 0.5, 1.5, 1.0};
};

double mueller_brown(const Vec& x);
/// Six-hump camelback.
double camelback(const Vec& x);
double ackley3(const Vec& x);
double hartmann4(const Vec& x);

struct ReferenceOptimum {
  std::vector<Vec> minimizers;
  double f_star = 0.0;
  double success_tol = 0.0;
};

/// Raw-unit black box with its domain and certified optima.
struct BenchmarkHandle {
  std::string id;
  std::function<double(const Vec&)> evaluate;
  SearchBox box;
  std::vector<Vec> minimizers;
  double f_star = 0.0;
  double success_tol = 0.0;

  ReferenceOptimum reference() const { return {minimizers, f_star, success_tol}; }
};

/// Options for the generated benchmarks; ignored by the closed-form ones.
struct BenchmarkOptions {
  std::uint64_t gkls_seed = 12;
  double gkls_vertex_value = 0.0;
  std::optional<double> success_tol;
};

/// Stable identifiers, in registry order.
const std::vector<std::string>& benchmark_ids();

/// Input dimension of a registered benchmark, without constructing it.
int benchmark_dims(std::string_view id);

/// Throws bolab::Error for an unknown id.
BenchmarkHandle make_benchmark(std::string_view id, const BenchmarkOptions& options = {});

ReferenceOptimum reference_optimum(std::string_view id, const BenchmarkOptions& options = {});

/// GKLS parameters registered under "gkls-2d", "gkls-3d" and "gkls-4d".
GklsParams gkls_preset(int dims, std::uint64_t seed = 12);

/// N x D design: each dimension is split into N equal strata, a random
/// permutation assigns strata to rows, and each point is uniform in its stratum.
Mat latin_hypercube(int n, const SearchBox& box, Rng& rng);

}  // namespace bolab::bench
