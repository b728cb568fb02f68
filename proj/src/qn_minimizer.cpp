#include "bolab/qn_minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace bolab::local {
namespace {

struct Pair {
  Vec s;
  Vec y;
};

struct Probe {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Vec x;
  Vec grad;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const Vec& x, const Vec& dir, const Vec& lower, const Vec& upper,
             double f0, double slope0, const QnOptions& opt, int& evals)
      : f_(f), x_(x), dir_(dir), lower_(lower), upper_(upper), f0_(f0), slope0_(slope0),
        opt_(opt), evals_(evals) {}

  /// Returns true and fills `out` when a step satisfying the Armijo condition
  /// (and, unless the step was capped by a bound, the curvature condition) is found.
  bool run(double alpha_init, double alpha_max, Probe& out) {
    Probe prev;
    prev.alpha = 0.0;
    prev.value = f0_;
    prev.slope = slope0_;
    double alpha = std::min(alpha_init, alpha_max);
    for (int i = 0; i < opt_.max_line_search; ++i) {
      Probe cur = probe(alpha, alpha >= alpha_max);
      if (!std::isfinite(cur.value) || cur.value > f0_ + opt_.c1 * alpha * slope0_ ||
          (i > 0 && cur.value >= prev.value)) {
        return zoom(prev, cur, out);
      }
      if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      if (alpha >= alpha_max) {
        out = std::move(cur);
        return true;
      }
      prev = std::move(cur);
      alpha = std::min(2.0 * alpha, alpha_max);
    }
    return false;
  }

 private:
  Probe probe(double alpha, bool at_cap) {
    Probe p;
    p.alpha = alpha;
    p.x = (x_ + alpha * dir_).cwiseMax(lower_).cwiseMin(upper_);
    if (at_cap) {
      // Snap the variables that reach a bound so they sit on it exactly.
      for (Eigen::Index i = 0; i < p.x.size(); ++i) {
        if (dir_[i] > 0.0 && upper_[i] - p.x[i] <= 1e-14 * (1.0 + std::abs(upper_[i])))
          p.x[i] = upper_[i];
        if (dir_[i] < 0.0 && p.x[i] - lower_[i] <= 1e-14 * (1.0 + std::abs(lower_[i])))
          p.x[i] = lower_[i];
      }
    }
    p.grad.resize(x_.size());
    p.value = f_(p.x, p.grad);
    ++evals_;
    p.slope = std::isfinite(p.value) ? p.grad.dot(dir_) : 0.0;
    return p;
  }

  bool zoom(Probe lo, Probe hi, Probe& out) {
    for (int i = 0; i < opt_.max_line_search; ++i) {
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double width = b - a;
      if (width <= 1e-16 * std::max(1.0, b)) break;
      double alpha = 0.5 * (a + b);
      if (std::isfinite(hi.value)) {
        // Quadratic through (lo.value, lo.slope) and hi.value.
        const double d = hi.alpha - lo.alpha;
        const double denom = 2.0 * (hi.value - lo.value - lo.slope * d);
        if (denom > 0.0) {
          const double trial = lo.alpha - lo.slope * d * d / denom;
          if (std::isfinite(trial)) alpha = std::clamp(trial, a + 0.1 * width, b - 0.1 * width);
        }
      }
      Probe cur = probe(alpha, false);
      if (!std::isfinite(cur.value) || cur.value > f0_ + opt_.c1 * alpha * slope0_ ||
          cur.value >= lo.value) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -opt_.c2 * slope0_) {
          out = std::move(cur);
          return true;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    // Interval collapsed: accept the best sufficient-decrease point if any.
    if (lo.alpha > 0.0 && lo.value < f0_) {
      out = std::move(lo);
      return true;
    }
    return false;
  }

  const Objective& f_;
  const Vec& x_;
  const Vec& dir_;
  const Vec& lower_;
  const Vec& upper_;
  double f0_;
  double slope0_;
  const QnOptions& opt_;
  int& evals_;
};

Vec two_loop(const std::deque<Pair>& memory, const Vec& grad, const std::vector<bool>& free) {
  const Eigen::Index n = grad.size();
  auto masked_dot = [&](const Vec& a, const Vec& b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (free[i]) s += a[i] * b[i];
    return s;
  };
  Vec q = grad;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!free[i]) q[i] = 0.0;

  std::vector<double> alphas(memory.size(), 0.0);
  std::vector<double> rhos(memory.size(), 0.0);
  double gamma = 1.0;
  bool have_gamma = false;
  for (std::size_t k = memory.size(); k-- > 0;) {
    const double sy = masked_dot(memory[k].s, memory[k].y);
    const double yy = masked_dot(memory[k].y, memory[k].y);
    if (sy <= 1e-12 * yy || yy <= 0.0) continue;
    rhos[k] = 1.0 / sy;
    if (!have_gamma) {
      gamma = sy / yy;
      have_gamma = true;
    }
    alphas[k] = rhos[k] * masked_dot(memory[k].s, q);
    for (Eigen::Index i = 0; i < n; ++i)
      if (free[i]) q[i] -= alphas[k] * memory[k].y[i];
  }
  q *= gamma;
  for (std::size_t k = 0; k < memory.size(); ++k) {
    if (rhos[k] == 0.0) continue;
    const double beta = rhos[k] * masked_dot(memory[k].y, q);
    for (Eigen::Index i = 0; i < n; ++i)
      if (free[i]) q[i] += (alphas[k] - beta) * memory[k].s[i];
  }
  return -q;
}

}  // namespace

LocalSolveResult box_qn_minimize(const Objective& f, const Vec& x0, const Vec& lower,
                                 const Vec& upper, const QnOptions& options) {
  const Eigen::Index n = x0.size();
  LocalSolveResult result;
  Vec x = x0.cwiseMax(lower).cwiseMin(upper);
  Vec grad(n);
  double fx = f(x, grad);
  result.n_evals = 1;
  result.x = x;
  result.value = fx;
  if (!std::isfinite(fx) || !grad.allFinite()) return result;

  std::deque<Pair> memory;
  bool fresh_direction = true;
  std::vector<bool> free(static_cast<std::size_t>(n));

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Vec projected = (x - grad).cwiseMax(lower).cwiseMin(upper) - x;
    if (projected.lpNorm<Eigen::Infinity>() <= options.tol) {
      result.converged = true;
      break;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool pinned_low = x[i] <= lower[i] && grad[i] > 0.0;
      const bool pinned_high = x[i] >= upper[i] && grad[i] < 0.0;
      free[static_cast<std::size_t>(i)] = !(pinned_low || pinned_high);
    }

    Vec dir = two_loop(memory, grad, free);
    auto drop_outward = [&](Vec& d) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((x[i] <= lower[i] && d[i] < 0.0) || (x[i] >= upper[i] && d[i] > 0.0)) d[i] = 0.0;
      }
    };
    drop_outward(dir);
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      fresh_direction = true;
      dir = -grad;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!free[static_cast<std::size_t>(i)]) dir[i] = 0.0;
      drop_outward(dir);
      slope = grad.dot(dir);
      if (!(slope < 0.0)) {
        result.converged = true;
        break;
      }
    }

    double alpha_max = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (dir[i] > 0.0) alpha_max = std::min(alpha_max, (upper[i] - x[i]) / dir[i]);
      if (dir[i] < 0.0) alpha_max = std::min(alpha_max, (lower[i] - x[i]) / dir[i]);
    }
    const double alpha_init = fresh_direction ? 1.0 / std::max(dir.norm(), 1e-300) : 1.0;

    Probe step;
    LineSearch search(f, x, dir, lower, upper, fx, slope, options, result.n_evals);
    if (!search.run(alpha_init, alpha_max, step)) {
      if (!fresh_direction) {
        memory.clear();
        fresh_direction = true;
        continue;
      }
      break;
    }
    fresh_direction = false;

    Pair pair{step.x - x, step.grad - grad};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.y.squaredNorm() && sy > 0.0) {
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    x = std::move(step.x);
    grad = std::move(step.grad);
    fx = step.value;
    result.iterations = iter + 1;
    result.x = x;
    result.value = fx;
  }
  return result;
}

LocalSolveResult bounded_qn_minimize(const Objective& f, const Vec& x0,
                                     const QnOptions& options) {
  const Eigen::Index n = x0.size();
  return box_qn_minimize(f, x0, Vec::Zero(n), Vec::Ones(n), options);
}

}  // namespace bolab::local
