#include "bolab/local_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bolab/errors.hpp"
#include "bolab/sobol.hpp"

namespace bolab::local {

std::vector<double> softmax_weights(std::span<const double> scores) {
  std::vector<double> w(scores.begin(), scores.end());
  if (w.empty()) return w;
  const double top = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  // Rounding left the total slightly below one; fall back to the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return 0;
}

std::vector<double> standardized_scores(std::span<const double> lcb_values) {
  const auto n = static_cast<double>(lcb_values.size());
  if (lcb_values.size() < 2) return {};
  const double mean = std::accumulate(lcb_values.begin(), lcb_values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : lcb_values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd >= 1e-12)) return {};
  std::vector<double> scores;
  scores.reserve(lcb_values.size());
  for (double v : lcb_values) scores.push_back((mean - v) / sd);
  return scores;
}

Vec informed_initial_point(const acq::AcquisitionContext& ctx, Rng& rng) {
  const Eigen::MatrixXd candidates =
      sobol_points(kInformedCandidates, static_cast<int>(ctx.dims()));
  std::vector<double> values(kInformedCandidates);
  for (int i = 0; i < kInformedCandidates; ++i) values[i] = ctx.value(candidates.row(i).transpose());
  const std::vector<double> scores = standardized_scores(values);
  std::size_t pick = 0;
  if (scores.empty()) {
    pick = rng.below(kInformedCandidates);
  } else {
    pick = sample_index(softmax_weights(scores), rng);
  }
  return candidates.row(static_cast<Eigen::Index>(pick)).transpose();
}

LocalSolveResult ils_minimize(const acq::AcquisitionContext& ctx, Rng& rng,
                              const QnOptions& options) {
  const Vec start = informed_initial_point(ctx, rng);
  const Objective f = [&ctx](const Vec& x, Vec& grad) { return ctx.value_grad(x, grad); };
  return bounded_qn_minimize(f, start, options);
}

LocalSolveResult ims_minimize(const acq::AcquisitionContext& ctx, Rng& rng, int restarts,
                              const QnOptions& options) {
  if (restarts < 1) throw Error("ims: restarts must be >= 1");
  LocalSolveResult best = ils_minimize(ctx, rng, options);
  for (int r = 1; r < restarts; ++r) {
    LocalSolveResult next = ils_minimize(ctx, rng, options);
    best.n_evals += next.n_evals;
    if (next.value < best.value || (!std::isfinite(best.value) && std::isfinite(next.value))) {
      next.n_evals = best.n_evals;
      best = std::move(next);
    }
  }
  return best;
}

}  // namespace bolab::local
