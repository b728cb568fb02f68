#include "bolab/bnb.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#include "bolab/errors.hpp"

namespace bolab::global {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kSqrt5 = 2.23606797749978969640917366873128;

double phi(double r) { return (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r); }

/// Interval of the lengthscale-weighted distance from `point` to the box.
Interval distance_over_box(const Box& box, const Vec& point, const Vec& inv_sq_lengthscales) {
  double r2_lo = 0.0;
  double r2_hi = 0.0;
  for (Eigen::Index d = 0; d < point.size(); ++d) {
    const double a = std::abs(box.lo[d] - point[d]);
    const double b = std::abs(box.hi[d] - point[d]);
    const bool inside = box.lo[d] <= point[d] && point[d] <= box.hi[d];
    const double near = inside ? 0.0 : std::min(a, b);
    const double far = std::max(a, b);
    r2_lo += near * near * inv_sq_lengthscales[d];
    r2_hi += far * far * inv_sq_lengthscales[d];
  }
  const double rel = 4.0 * static_cast<double>(point.size() + 4) * kEps;
  return sqrt(Interval{r2_lo * (1.0 - rel), r2_hi * (1.0 + rel)});
}

struct KernelEnclosure {
  Interval k;
  Interval phi;
};

KernelEnclosure kernel_enclosure(const Box& box, const Vec& point, const Vec& inv_sq_lengthscales,
                                 double signal_variance) {
  const Interval r = distance_over_box(box, point, inv_sq_lengthscales);
  constexpr double rel = 16.0 * kEps;
  KernelEnclosure out;
  out.k = {gp::kernel_matern52(r.hi, signal_variance) * (1.0 - rel) - kTiny,
           gp::kernel_matern52(r.lo, signal_variance) * (1.0 + rel) + kTiny};
  out.phi = {phi(r.hi) * (1.0 - rel) - kTiny, phi(r.lo) * (1.0 + rel) + kTiny};
  out.k.lo = std::max(0.0, out.k.lo);
  out.phi.lo = std::max(0.0, out.phi.lo);
  return out;
}

/// Product of an interval with a non-negative interval.
Interval times_nonneg(Interval a, Interval nonneg) {
  return {a.lo >= 0.0 ? a.lo * nonneg.lo : a.lo * nonneg.hi,
          a.hi >= 0.0 ? a.hi * nonneg.hi : a.hi * nonneg.lo};
}

Interval scalar_times(double s, Interval a) {
  return s >= 0.0 ? Interval{s * a.lo, s * a.hi} : Interval{s * a.hi, s * a.lo};
}

}  // namespace

Interval interval_kernel_over_box(const Box& box, const Vec& point, const gp::KernelHyper& hyper) {
  const Vec inv_l2 = hyper.lengthscales.array().square().inverse();
  return kernel_enclosure(box, point, inv_l2, hyper.signal_variance).k;
}

PosteriorEnclosure interval_posterior(const gp::GpModel& model, const Box& box) {
  const gp::ScaledDataset& data = model.data();
  const Eigen::Index n = data.size();
  const Eigen::Index D = data.dims();
  const double s2 = model.hyper().signal_variance;
  const Vec inv_l2 = model.hyper().lengthscales.array().square().inverse();
  const Vec& w = model.weights();
  const gp::Mat& A = model.inverse();
  const double gamma = static_cast<double>(n + 4) * kEps;

  std::vector<KernelEnclosure> kern(static_cast<std::size_t>(n));
  double mean_lo = 0.0, mean_hi = 0.0, mean_mag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    kern[i] = kernel_enclosure(box, data.X.row(i).transpose(), inv_l2, s2);
    const Interval t = scalar_times(w[i], kern[i].k);
    mean_lo += t.lo;
    mean_hi += t.hi;
    mean_mag += std::abs(w[i]) * kern[i].k.hi;
  }
  const double mean_pad = 4.0 * gamma * mean_mag + kTiny;

  // Gradient enclosures of k(., x_i) per dimension.
  const Vec c = box.mid();
  std::vector<Interval> grad_k(static_cast<std::size_t>(n * D));
  for (Eigen::Index d = 0; d < D; ++d) {
    const double coef = -(5.0 / 3.0) * s2 * inv_l2[d];
    for (Eigen::Index i = 0; i < n; ++i) {
      const Interval delta{box.lo[d] - data.X(i, d), box.hi[d] - data.X(i, d)};
      grad_k[static_cast<std::size_t>(i * D + d)] =
          scalar_times(coef, times_nonneg(delta, kern[i].phi));
    }
  }

  // u = K^-1 k over the box.
  std::vector<Interval> u(static_cast<std::size_t>(n));
  double quad_mag = s2;
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = 0.0, hi = 0.0, mag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Interval t = scalar_times(A(i, j), kern[j].k);
      lo += t.lo;
      hi += t.hi;
      mag += std::abs(A(i, j)) * kern[j].k.hi;
    }
    const double pad = 2.0 * gamma * mag + kTiny;
    u[i] = {lo - pad, hi + pad};
    quad_mag += kern[i].k.hi * mag;
  }
  const double var_pad = 4.0 * gamma * quad_mag + kTiny;

  double q_lo = 0.0, q_hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Interval t = times_nonneg(u[i], kern[i].k);
    q_lo += t.lo;
    q_hi += t.hi;
  }
  Interval var_natural{s2 - q_hi, s2 - q_lo};

  const auto [mean_c, std_c] = model.mean_std(c);
  double mean_cf_lo = mean_c, mean_cf_hi = mean_c;
  for (Eigen::Index d = 0; d < D; ++d) {
    double g_lo = 0.0, g_hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Interval gm = scalar_times(w[i], grad_k[static_cast<std::size_t>(i * D + d)]);
      g_lo += gm.lo;
      g_hi += gm.hi;
    }
    const double g_pad = 4.0 * gamma * (std::abs(g_lo) + std::abs(g_hi)) + kTiny;
    const Interval step{box.lo[d] - c[d], box.hi[d] - c[d]};
    const Interval dm = Interval{g_lo - g_pad, g_hi + g_pad} * step;
    mean_cf_lo += dm.lo;
    mean_cf_hi += dm.hi;
  }

  // Expansion about the center: with k = k_c + delta and u_c = K^-1 k_c,
  // k'K^-1 k = q_c + 2 u_c'delta + delta'K^-1 delta, and the last term is >= 0.
  Vec k_c(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k_c[i] = gp::kernel_matern52(gp::scaled_distance(c, data.X.row(i).transpose(), model.hyper().lengthscales), s2);
  const Vec u_c = A * k_c;
  const double q_c = k_c.dot(u_c);
  std::vector<Interval> delta(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = 0.0, hi = 0.0;
    for (Eigen::Index d = 0; d < D; ++d) {
      const Interval step{box.lo[d] - c[d], box.hi[d] - c[d]};
      const Interval t = grad_k[static_cast<std::size_t>(i * D + d)] * step;
      lo += t.lo;
      hi += t.hi;
    }
    const double pad = 4.0 * gamma * (std::abs(lo) + std::abs(hi)) + 16.0 * kEps * std::abs(k_c[i]) + kTiny;
    delta[i] = intersect(Interval{lo - pad, hi + pad},
                         Interval{kern[i].k.lo - k_c[i] - pad, kern[i].k.hi - k_c[i] + pad});
  }
  // u_c' delta, once through the per-dimension gradient sums and once directly.
  double lin_lo = 0.0, lin_hi = 0.0, lin_mag = 0.0;
  for (Eigen::Index d = 0; d < D; ++d) {
    double g_lo = 0.0, g_hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Interval t = scalar_times(u_c[i], grad_k[static_cast<std::size_t>(i * D + d)]);
      g_lo += t.lo;
      g_hi += t.hi;
      lin_mag += std::abs(t.lo) + std::abs(t.hi);
    }
    const Interval t = Interval{g_lo, g_hi} * Interval{box.lo[d] - c[d], box.hi[d] - c[d]};
    lin_lo += t.lo;
    lin_hi += t.hi;
  }
  double dir_lo = 0.0, dir_hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Interval t = scalar_times(u_c[i], delta[i]);
    dir_lo += t.lo;
    dir_hi += t.hi;
    lin_mag += std::abs(t.lo) + std::abs(t.hi);
  }
  // Rounding in u_c itself: |err_i| <= gamma sum_j |A_ij| k_c_j.
  double u_err = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err = 2.0 * gamma * (A.row(i).cwiseAbs() * k_c.cwiseAbs())(0) + kTiny;
    u_err += err * std::max(std::abs(delta[i].lo), std::abs(delta[i].hi));
  }
  const double lin_pad = 4.0 * gamma * lin_mag + u_err + kTiny;
  const Interval lin = intersect(Interval{lin_lo - lin_pad, lin_hi + lin_pad},
                                 Interval{dir_lo - lin_pad, dir_hi + lin_pad});
  double quad_hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double di = std::max(std::abs(delta[i].lo), std::abs(delta[i].hi));
    for (Eigen::Index j = 0; j < n; ++j)
      quad_hi += std::abs(A(i, j)) * di * std::max(std::abs(delta[j].lo), std::abs(delta[j].hi));
  }
  quad_hi *= 1.0 + 4.0 * gamma;
  const double var_cf_lo = s2 - q_c - 2.0 * lin.hi - quad_hi;
  const double var_cf_hi = s2 - q_c - 2.0 * lin.lo;
  const double cf_pad = 4.0 * gamma * (std::abs(mean_cf_lo) + std::abs(mean_cf_hi)) + mean_pad;

  PosteriorEnclosure out;
  out.mean = intersect(Interval{mean_lo - mean_pad, mean_hi + mean_pad},
                       Interval{mean_cf_lo - cf_pad, mean_cf_hi + cf_pad});

  // Conditioning on a single training point can only raise the variance.
  double var_subset = s2;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double kl = kern[j].k.lo;
    var_subset = std::min(var_subset, s2 - kl * kl / (s2 + model.jitter()));
  }
  double var_lo = std::max(var_natural.lo, var_cf_lo) - var_pad;
  double var_hi = std::min({var_natural.hi, var_cf_hi, var_subset}) + var_pad;
  var_lo = std::clamp(var_lo, 0.0, s2);
  var_hi = std::clamp(var_hi, 0.0, s2);
  if (var_lo > var_hi) var_lo = var_hi;
  const Interval sd = sqrt(Interval{var_lo, var_hi});
  out.std = {sd.lo, std::min(sd.hi, std::sqrt(s2))};
  return out;
}

double lcb_lower_bound(const gp::GpModel& model, const Box& box, double kappa) {
  const PosteriorEnclosure e = interval_posterior(model, box);
  if (kappa == 0.0) return e.mean.lo;
  return down(e.mean.lo - up(kappa * e.std.hi));
}

namespace {

struct Node {
  Box box;
  double lb;
  int depth;
  long id;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.lb != b.lb) return a.lb > b.lb;
    return a.id > b.id;
  }
};

}  // namespace

BnbResult bnb_minimize(const acq::AcquisitionContext& ctx, const BnbOptions& options,
                       const BnbTrace& trace) {
  if (!(options.eps_r > 0.0)) throw Error("bnb: eps_r must be > 0");
  const auto start = std::chrono::steady_clock::now();
  const gp::GpModel& model = ctx.model();
  const double kappa = ctx.kappa();
  const Eigen::Index D = ctx.dims();
  const Vec inv_lengthscales = model.hyper().lengthscales.cwiseInverse();
  const local::Objective lcb = [&ctx](const Vec& x, Vec& grad) { return ctx.value_grad(x, grad); };

  BnbResult result;
  result.ub = std::numeric_limits<double>::infinity();
  auto polish = [&](const Box& box) {
    const local::LocalSolveResult r = local::box_qn_minimize(lcb, box.mid(), box.lo, box.hi, options.polish);
    if (std::isfinite(r.value) && r.value < result.ub) {
      result.ub = r.value;
      result.x_best = r.x;
    }
  };
  auto tolerance = [&] { return std::max(options.eps_a, options.eps_r * std::abs(result.ub)); };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  double fathomed_lb = std::numeric_limits<double>::infinity();
  const Box root = Box::unit(D);
  polish(root);
  open.push({root, lcb_lower_bound(model, root, kappa), 0, next_id++});

  auto global_lb = [&] {
    const double open_lb = open.empty() ? std::numeric_limits<double>::infinity() : open.top().lb;
    return std::min({open_lb, fathomed_lb, result.ub});
  };

  bool certified = false;
  while (true) {
    if (open.empty() || open.top().lb >= result.ub - tolerance()) {
      certified = true;
      break;
    }
    if (result.nodes_processed >= options.node_cap) {
      result.node_cap_hit = true;
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > options.time_limit_s) break;

    Node node = open.top();
    open.pop();
    ++result.nodes_processed;

    Eigen::Index split = 0;
    (node.box.hi - node.box.lo).cwiseProduct(inv_lengthscales).maxCoeff(&split);
    const double cut = 0.5 * (node.box.lo[split] + node.box.hi[split]);
    if (!(cut > node.box.lo[split] && cut < node.box.hi[split])) {
      // Too narrow to bisect in floating point; its bound stays in the global bound.
      fathomed_lb = std::min(fathomed_lb, node.lb);
      continue;
    }
    Box left = node.box, right = node.box;
    left.hi[split] = cut;
    right.lo[split] = cut;
    for (Box* child : {&left, &right}) {
      polish(*child);
      const double lb = std::max(node.lb, lcb_lower_bound(model, *child, kappa));
      if (lb >= result.ub - tolerance()) {
        fathomed_lb = std::min(fathomed_lb, lb);
      } else {
        open.push({*child, lb, node.depth + 1, next_id++});
      }
    }
    if (trace) trace(global_lb(), result.ub);
  }

  result.lb = global_lb();
  result.gap_rel = (result.ub - result.lb) / std::max(std::abs(result.ub), 1e-12);
  result.status = certified && result.ub - result.lb <= tolerance() ? BnbStatus::Optimal
                                                                    : BnbStatus::TimeLimit;
  return result;
}

LoosenState loosen_policy_update(LoosenState state, const BnbResult& result) {
  if (result.status == BnbStatus::TimeLimit && result.gap_rel >= 10.0 * state.eps_r_current)
    state.eps_r_current *= 10.0;
  return state;
}

}  // namespace bolab::global
