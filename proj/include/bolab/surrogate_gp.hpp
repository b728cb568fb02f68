#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "bolab/search_box.hpp"

namespace bolab::gp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Matern-5/2 hyperparameters in scaled units. The smoothness is fixed.
struct KernelHyper {
  Vec lengthscales;
  double signal_variance = 1.0;
};

/// Box for the marginal-likelihood search and its iteration budget.
struct HyperBounds {
  double min_lengthscale = 1e-2;
  double max_lengthscale = 1e2;
  double min_signal_variance = 1e-3;
  double max_signal_variance = 1e3;
  int max_iter = 100;
  double tol = 1e-5;
};

/// Jitter tried in order when the Cholesky factorization fails.
inline constexpr std::array<double, 3> kJitterLadder{1e-8, 1e-6, 1e-4};

/// k(r) = s2 (1 + sqrt5 r + 5/3 r^2) exp(-sqrt5 r) with r already divided by the lengthscales.
double kernel_matern52(double r, double signal_variance);

/// Lengthscale-weighted Euclidean distance.
double scaled_distance(const Vec& a, const Vec& b, const Vec& lengthscales);

struct OutputScaler {
  double mean = 0.0;
  double std = 1.0;
  double scale(double raw) const { return (raw - mean) / std; }
  double unscale(double scaled) const { return scaled * std + mean; }
};

/// Training data mapped to the unit cube with standardized outputs.
struct ScaledDataset {
  Mat X;  ///< n x D, every entry in [0,1]
  Vec y;  ///< zero mean, unit (population) variance when n >= 2
  SearchBox box;
  OutputScaler output;

  /// Raw inputs are rows of `raw_x`. Output std falls back to 1 below 1e-12.
  static ScaledDataset from_raw(const Mat& raw_x, const Vec& raw_y, const SearchBox& box);

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dims() const { return X.cols(); }
};

Mat covariance(const Mat& X, const KernelHyper& hyper);

/// Lower Cholesky factor of K + jitter I using the first ladder rung that works.
struct Factorization {
  Mat lower;
  double jitter = 0.0;
};

/// Throws NotPositiveDefinite once every rung of kJitterLadder fails.
Factorization factorize(const Mat& K);

/// -1/2 y'K^-1 y - 1/2 log|K| - n/2 log 2pi, with K including the jitter.
/// When `grad_log` is given it receives d/d(log lengthscale_d) for each d
/// followed by d/d(log signal_variance).
double log_marginal_likelihood(const KernelHyper& hyper, const ScaledDataset& data,
                               Vec* grad_log = nullptr);

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
  Vec grad_mean;
  Vec grad_std;
};

/// Noiseless zero-mean GP conditioned on a scaled dataset. Immutable after
/// construction, so one instance can be shared by concurrent readers.
class GpModel {
 public:
  /// Conditions on `data` with fixed hyperparameters.
  GpModel(ScaledDataset data, KernelHyper hyper);

  /// Scales the data, maximizes the marginal likelihood with one bounded
  /// quasi-Newton run in log space starting from `warm_start` (or lengthscale
  /// 0.5, signal variance 1), and conditions on the result.
  static GpModel fit(const Mat& raw_x, const Vec& raw_y, const SearchBox& box,
                     const std::optional<KernelHyper>& warm_start = std::nullopt,
                     const HyperBounds& bounds = {});

  /// Mean, std and their gradients at a scaled input.
  Posterior posterior(const Vec& x) const;
  /// Mean and std only.
  std::pair<double, double> mean_std(const Vec& x) const;

  const KernelHyper& hyper() const { return hyper_; }
  const ScaledDataset& data() const { return data_; }
  const Mat& chol() const { return chol_; }
  /// Solution of K w = y, refined from the jittered factorization.
  const Vec& weights() const { return weights_; }
  /// (K + jitter I)^-1, precomputed for bounding.
  const Mat& inverse() const { return inverse_; }
  double jitter() const { return jitter_; }
  double log_likelihood() const { return log_likelihood_; }
  Eigen::Index dims() const { return data_.dims(); }

 private:
  ScaledDataset data_;
  KernelHyper hyper_;
  Mat chol_;
  Vec weights_;
  Mat inverse_;
  Vec inv_sq_lengthscales_;
  double jitter_ = 0.0;
  double log_likelihood_ = 0.0;
};

}  // namespace bolab::gp
