#pragma once

#include <Eigen/Dense>
#include <functional>

namespace bolab::local {

using Vec = Eigen::VectorXd;

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized to x.size()).
using Objective = std::function<double(const Vec& x, Vec& grad)>;

struct QnOptions {
  int max_iter = 200;
  double tol = 1e-8;  ///< infinity norm of the projected gradient
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
};

struct LocalSolveResult {
  Vec x;
  double value = 0.0;
  int n_evals = 0;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory quasi-Newton over the box [lower, upper]. Variables pinned at
/// a bound by the gradient are frozen for the iteration (gradient projection);
/// the remaining free subspace takes an L-BFGS direction and a strong-Wolfe
/// line search whose step is capped at the first bound hit.
///
/// Accepted steps never increase the objective, so the returned value is at
/// most f(x0). A failing line search ends the solve with `converged = false`
/// and the best iterate seen.
LocalSolveResult box_qn_minimize(const Objective& f, const Vec& x0, const Vec& lower,
                                 const Vec& upper, const QnOptions& options = {});

/// box_qn_minimize on the unit cube [0,1]^D.
LocalSolveResult bounded_qn_minimize(const Objective& f, const Vec& x0,
                                     const QnOptions& options = {});

}  // namespace bolab::local
