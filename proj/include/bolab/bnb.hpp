#pragma once

#include <functional>
#include <vector>

#include "bolab/acquisition.hpp"
#include "bolab/interval.hpp"
#include "bolab/qn_minimizer.hpp"

namespace bolab::global {

using Vec = gp::Vec;

/// Axis-aligned box in scaled coordinates.
struct Box {
  Vec lo;
  Vec hi;

  static Box unit(Eigen::Index dims) { return {Vec::Zero(dims), Vec::Ones(dims)}; }
  Vec mid() const { return 0.5 * (lo + hi); }
  Eigen::Index dims() const { return lo.size(); }
};

/// Enclosure of k(x, point) for x in `box`, from the nearest and farthest
/// lengthscale-weighted distances and the monotone decay of the kernel.
Interval interval_kernel_over_box(const Box& box, const Vec& point, const gp::KernelHyper& hyper);

struct PosteriorEnclosure {
  Interval mean;
  Interval std;
};

/// Enclosures of the posterior mean and std over `box`. The mean combines a
/// sign-split natural extension with a mean-value form; the variance combines
/// the interval quadratic form k' K^-1 k, a mean-value form, and the
/// single-point conditioning bound, clamped to [0, signal variance].
PosteriorEnclosure interval_posterior(const gp::GpModel& model, const Box& box);

/// mean.lo - kappa * std.hi, a lower bound on the LCB over `box`.
double lcb_lower_bound(const gp::GpModel& model, const Box& box, double kappa);

enum class BnbStatus { Optimal, TimeLimit };

struct BnbOptions {
  double eps_r = 0.01;
  double eps_a = 1e-6;
  double time_limit_s = 10.0;
  long node_cap = 20000;
  /// Budget for the incumbent polish run from each child midpoint.
  local::QnOptions polish{50, 1e-8, 10, 1e-4, 0.9, 40};
};

struct BnbResult {
  Vec x_best;
  double ub = 0.0;
  double lb = 0.0;
  double gap_rel = 0.0;
  BnbStatus status = BnbStatus::TimeLimit;
  long nodes_processed = 0;
  bool node_cap_hit = false;
};

/// Optional observer called after every processed node with (global lb, ub).
using BnbTrace = std::function<void(double lb, double ub)>;

/// Best-first branch-and-bound minimization of the LCB over [0,1]^D.
/// Branches by bisecting the widest dimension, polishes the incumbent from
/// each child midpoint inside the child box, and fathoms nodes whose bound
/// is within max(eps_a, eps_r |ub|) of the incumbent. Uses no randomness, so
/// identical inputs give identical results unless the wall-clock limit fires.
BnbResult bnb_minimize(const acq::AcquisitionContext& ctx, const BnbOptions& options = {},
                       const BnbTrace& trace = {});

/// Relative optimality tolerance carried across the iterates of one BO run.
struct LoosenState {
  double eps_r_current = 0.01;
};

/// Loosens eps_r tenfold after a time-limited iterate whose remaining gap is
/// at least ten times the current tolerance.
LoosenState loosen_policy_update(LoosenState state, const BnbResult& result);

}  // namespace bolab::global
