#pragma once
// Small models and helpers shared by the test executables.

#include <memory>
#include <random>

#include "bolab/acquisition.hpp"
#include "bolab/rng.hpp"
#include "bolab/search_box.hpp"
#include "bolab/surrogate_gp.hpp"

namespace fixtures {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bolab::SearchBox unit_box(Eigen::Index d) { return {Vec::Zero(d), Vec::Ones(d)}; }

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// GP on inputs already in the unit cube with fixed hyperparameters.
inline std::shared_ptr<const bolab::gp::GpModel> model_on_unit(const Mat& X, const Vec& y, const Vec& ls,
                                                               double s2) {
  auto data = bolab::gp::ScaledDataset::from_raw(X, y, unit_box(X.cols()));
  return std::make_shared<const bolab::gp::GpModel>(std::move(data), bolab::gp::KernelHyper{ls, s2});
}

/// 1D model whose LCB with kappa = kBimodalKappa has two basins split by one ridge.
inline constexpr double kBimodalKappa = 0.5;
inline std::shared_ptr<const bolab::gp::GpModel> bimodal_1d() {
  Mat X(3, 1);
  X << 0.15, 0.5, 0.85;
  return model_on_unit(X, vec({-1.0, 1.0, -1.1}), vec({0.25}), 1.0);
}

/// 1D toy: x = 0, 0.5, 1 with sin-shaped outputs.
inline std::shared_ptr<const bolab::gp::GpModel> sin_toy(double ls = 0.3, double s2 = 1.0) {
  Mat X(3, 1);
  X << 0.0, 0.5, 1.0;
  return model_on_unit(X, vec({std::sin(0.0), std::sin(3.0), std::sin(6.0)}), vec({ls}), s2);
}

/// Random model with n points in [0,1]^d and moderate hyperparameters.
inline std::shared_ptr<const bolab::gp::GpModel> random_model(bolab::Rng& rng, int d, int n) {
  Mat X(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) X(i, k) = rng.uniform();
  Vec y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  Vec ls(d);
  for (int k = 0; k < d; ++k) ls[k] = rng.uniform(0.1, 0.6);
  return model_on_unit(X, y, ls, rng.uniform(0.5, 2.0));
}

inline Vec random_point(bolab::Rng& rng, Eigen::Index d) {
  Vec x(d);
  for (Eigen::Index k = 0; k < d; ++k) x[k] = rng.uniform();
  return x;
}

}  // namespace fixtures
