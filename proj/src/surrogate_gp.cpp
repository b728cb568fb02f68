#include "bolab/surrogate_gp.hpp"

#include <cmath>
#include <limits>

#include "bolab/errors.hpp"
#include "bolab/qn_minimizer.hpp"

namespace bolab::gp {
namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;
constexpr double kLog2Pi = 1.83787706640934548356065947281123;

}  // namespace

double kernel_matern52(double r, double signal_variance) {
  const double sr = kSqrt5 * r;
  return signal_variance * (1.0 + sr + sr * sr / 3.0) * std::exp(-sr);
}

double scaled_distance(const Vec& a, const Vec& b, const Vec& lengthscales) {
  return ((a - b).array() / lengthscales.array()).matrix().norm();
}

ScaledDataset ScaledDataset::from_raw(const Mat& raw_x, const Vec& raw_y, const SearchBox& box) {
  if (raw_x.rows() != raw_y.size() || raw_x.rows() == 0)
    throw Error("dataset: need at least one point and matching x/y counts");
  if (raw_x.cols() != box.dims()) throw Error("dataset: dimension does not match box");
  ScaledDataset data;
  data.box = box;
  data.X.resize(raw_x.rows(), raw_x.cols());
  for (Eigen::Index i = 0; i < raw_x.rows(); ++i) {
    const Vec row = raw_x.row(i).transpose();
    if (!box.contains(row)) throw Error("dataset: point outside the search box");
    data.X.row(i) = box.to_unit(row).transpose();
  }
  const double mean = raw_y.mean();
  const double var = (raw_y.array() - mean).square().mean();
  const double std = std::sqrt(var);
  data.output.mean = mean;
  data.output.std = std < 1e-12 ? 1.0 : std;
  data.y = (raw_y.array() - mean) / data.output.std;
  return data;
}

Mat covariance(const Mat& X, const KernelHyper& hyper) {
  const Eigen::Index n = X.rows();
  const Vec inv_l = hyper.lengthscales.cwiseInverse();
  Mat K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = hyper.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = ((X.row(i) - X.row(j)).transpose().array() * inv_l.array()).matrix().norm();
      K(i, j) = K(j, i) = kernel_matern52(r, hyper.signal_variance);
    }
  }
  return K;
}

Factorization factorize(const Mat& K) {
  const Eigen::Index n = K.rows();
  for (double jitter : kJitterLadder) {
    Mat A = K;
    A.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success) continue;
    Mat lower = llt.matrixL();
    if (lower.diagonal().minCoeff() > 0.0 && lower.allFinite()) return {std::move(lower), jitter};
  }
  throw NotPositiveDefinite("Cholesky failed after jitter " + std::to_string(kJitterLadder.back()) +
                            " with n=" + std::to_string(n));
}

double log_marginal_likelihood(const KernelHyper& hyper, const ScaledDataset& data, Vec* grad_log) {
  const Eigen::Index n = data.size();
  const Eigen::Index D = data.dims();
  const Mat K = covariance(data.X, hyper);
  const Factorization fac = factorize(K);
  const auto L = fac.lower.triangularView<Eigen::Lower>();
  Vec alpha = L.solve(data.y);
  const double quad = alpha.squaredNorm();
  L.transpose().solveInPlace(alpha);
  const double logdet = 2.0 * fac.lower.diagonal().array().log().sum();
  const double mll = -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * kLog2Pi;

  if (grad_log != nullptr) {
    Mat W = Mat::Identity(n, n);
    L.solveInPlace(W);
    L.transpose().solveInPlace(W);
    const Mat M = alpha * alpha.transpose() - W;
    grad_log->setZero(D + 1);
    const double s2 = hyper.signal_variance;
    const Vec inv_l2 = hyper.lengthscales.array().square().inverse();
    for (Eigen::Index i = 0; i < n; ++i) {
      (*grad_log)[D] += 0.5 * M(i, i) * s2;
      for (Eigen::Index j = 0; j < i; ++j) {
        const Vec diff2 = (data.X.row(i) - data.X.row(j)).transpose().array().square();
        const double r = std::sqrt(diff2.dot(inv_l2));
        const double e = std::exp(-kSqrt5 * r);
        const double common = s2 * (5.0 / 3.0) * (1.0 + kSqrt5 * r) * e;
        // Off-diagonal pairs appear twice in the trace.
        (*grad_log)[D] += M(i, j) * K(i, j);
        for (Eigen::Index d = 0; d < D; ++d) (*grad_log)[d] += M(i, j) * common * diff2[d] * inv_l2[d];
      }
    }
  }
  return mll;
}

GpModel::GpModel(ScaledDataset data, KernelHyper hyper)
    : data_(std::move(data)), hyper_(std::move(hyper)) {
  if (hyper_.lengthscales.size() != data_.dims())
    throw Error("gp: lengthscale count does not match input dimension");
  const Eigen::Index n = data_.size();
  const Mat K = covariance(data_.X, hyper_);
  Factorization fac = factorize(K);
  chol_ = std::move(fac.lower);
  jitter_ = fac.jitter;
  const Mat& chol = chol_;
  const auto L = chol.triangularView<Eigen::Lower>();
  weights_ = L.solve(data_.y);
  const double quad = weights_.squaredNorm();
  L.transpose().solveInPlace(weights_);
  // Refine towards K w = y without the jitter.
  double residual_norm = (data_.y - K * weights_).norm();
  for (int step = 0; step < 8 && residual_norm > 0.0; ++step) {
    Vec correction = L.solve(data_.y - K * weights_);
    L.transpose().solveInPlace(correction);
    const Vec candidate = weights_ + correction;
    const double candidate_norm = (data_.y - K * candidate).norm();
    if (!(candidate_norm < residual_norm)) break;
    weights_ = candidate;
    residual_norm = candidate_norm;
  }
  inverse_ = Mat::Identity(n, n);
  L.solveInPlace(inverse_);
  L.transpose().solveInPlace(inverse_);
  inverse_ = 0.5 * (inverse_ + inverse_.transpose());
  log_likelihood_ = -0.5 * quad - chol_.diagonal().array().log().sum() -
                    0.5 * static_cast<double>(n) * kLog2Pi;
  inv_sq_lengthscales_ = hyper_.lengthscales.array().square().inverse();
}

GpModel GpModel::fit(const Mat& raw_x, const Vec& raw_y, const SearchBox& box,
                     const std::optional<KernelHyper>& warm_start, const HyperBounds& bounds) {
  ScaledDataset data = ScaledDataset::from_raw(raw_x, raw_y, box);
  const Eigen::Index D = data.dims();

  Vec lower(D + 1), upper(D + 1), theta(D + 1);
  lower.head(D).setConstant(std::log(bounds.min_lengthscale));
  upper.head(D).setConstant(std::log(bounds.max_lengthscale));
  lower[D] = std::log(bounds.min_signal_variance);
  upper[D] = std::log(bounds.max_signal_variance);
  if (warm_start && warm_start->lengthscales.size() == D) {
    theta.head(D) = warm_start->lengthscales.array().log();
    theta[D] = std::log(warm_start->signal_variance);
  } else {
    theta.head(D).setConstant(std::log(0.5));
    theta[D] = 0.0;
  }
  theta = theta.cwiseMax(lower).cwiseMin(upper);

  auto unpack = [D](const Vec& t) {
    KernelHyper h;
    h.lengthscales = t.head(D).array().exp();
    h.signal_variance = std::exp(t[D]);
    return h;
  };
  local::Objective negative_mll = [&](const Vec& t, Vec& grad) {
    try {
      Vec g;
      const double v = log_marginal_likelihood(unpack(t), data, &g);
      grad = -g;
      return -v;
    } catch (const NotPositiveDefinite&) {
      grad.setZero();
      return std::numeric_limits<double>::infinity();
    }
  };
  local::QnOptions opt;
  opt.max_iter = bounds.max_iter;
  opt.tol = bounds.tol;
  const local::LocalSolveResult best = local::box_qn_minimize(negative_mll, theta, lower, upper, opt);
  return GpModel(std::move(data), unpack(std::isfinite(best.value) ? best.x : theta));
}

std::pair<double, double> GpModel::mean_std(const Vec& x) const {
  const Eigen::Index n = data_.size();
  Vec k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r2 = ((x - data_.X.row(i).transpose()).array().square() *
                       inv_sq_lengthscales_.array()).sum();
    k[i] = kernel_matern52(std::sqrt(r2), hyper_.signal_variance);
  }
  const double mean = k.dot(weights_);
  chol_.triangularView<Eigen::Lower>().solveInPlace(k);
  const double var = std::max(0.0, hyper_.signal_variance - k.squaredNorm());
  return {mean, std::sqrt(var)};
}

Posterior GpModel::posterior(const Vec& x) const {
  const Eigen::Index n = data_.size();
  const Eigen::Index D = data_.dims();
  const double s2 = hyper_.signal_variance;
  Vec k(n);
  Mat dk(n, D);  // d k(x, x_i) / dx
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec diff = x - data_.X.row(i).transpose();
    const double r = std::sqrt((diff.array().square() * inv_sq_lengthscales_.array()).sum());
    const double e = std::exp(-kSqrt5 * r);
    k[i] = s2 * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r * r) * e;
    const double coef = -(5.0 / 3.0) * s2 * (1.0 + kSqrt5 * r) * e;
    dk.row(i) = (coef * diff.array() * inv_sq_lengthscales_.array()).transpose();
  }
  Posterior p;
  p.mean = k.dot(weights_);
  p.grad_mean = dk.transpose() * weights_;
  const auto L = chol_.triangularView<Eigen::Lower>();
  Vec v = L.solve(k);
  const double var = s2 - v.squaredNorm();
  L.transpose().solveInPlace(v);  // v = K^-1 k
  const Vec grad_var = -2.0 * (dk.transpose() * v);
  if (var > 0.0) {
    p.std = std::sqrt(var);
    p.grad_std = grad_var / (2.0 * p.std);
  } else {
    p.std = 0.0;
    p.grad_std = Vec::Zero(D);
  }
  return p;
}

}  // namespace bolab::gp
