#include "bolab/analysis_stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "bolab/errors.hpp"
#include "bolab/rng.hpp"

namespace bolab::stats {
namespace {

constexpr double kAlphaLimit = 20.0;

double log_choose(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double normal_two_sided(double z) {
  static const boost::math::normal standard;
  return 2.0 * boost::math::cdf(boost::math::complement(standard, std::abs(z)));
}

// Support, log weights and observed value of one dataset's conditional law.
struct ConditionalLaw {
  int lo = 0;
  std::vector<double> log_w;
  int observed = 0;
};

ConditionalLaw make_law(const PairCounts& c) {
  const int T = c.successes_a + c.successes_ref;
  ConditionalLaw law;
  law.lo = std::max(0, T - c.runs_ref);
  const int hi = std::min(c.runs_a, T);
  for (int a = law.lo; a <= hi; ++a)
    law.log_w.push_back(log_choose(c.runs_a, a) + log_choose(c.runs_ref, T - a));
  law.observed = c.successes_a;
  return law;
}

// Mean and variance of a under the tilted law.
std::pair<double, double> law_moments(const ConditionalLaw& law, double alpha) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < law.log_w.size(); ++i)
    top = std::max(top, law.log_w[i] + alpha * static_cast<double>(law.lo + static_cast<int>(i)));
  double z = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < law.log_w.size(); ++i) {
    const double a = law.lo + static_cast<double>(i);
    const double w = std::exp(law.log_w[i] + alpha * a - top);
    z += w;
    s1 += w * a;
    s2 += w * a * a;
  }
  const double mean = s1 / z;
  return {mean, std::max(0.0, s2 / z - mean * mean)};
}

std::pair<double, double> score_info(const std::vector<ConditionalLaw>& laws, double alpha) {
  double score = 0.0, info = 0.0;
  for (const ConditionalLaw& law : laws) {
    const auto [mean, var] = law_moments(law, alpha);
    score += law.observed - mean;
    info += var;
  }
  return {score, info};
}

double median_lower(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> dataset_proportions(const SuccessTable& table, const std::string& solver) {
  std::vector<double> p;
  int runs = -1;
  for (int d : table.datasets) {
    const SuccessCell* c = table.cell(d, solver);
    if (c == nullptr || c->n_runs == 0)
      throw UnequalRunCounts("solver " + solver + " has no runs on dataset " + std::to_string(d));
    if (runs >= 0 && c->n_runs != runs)
      throw UnequalRunCounts("solver " + solver + " has unequal run counts across datasets");
    runs = c->n_runs;
    p.push_back(c->p_hat());
  }
  return p;
}

std::string tag(const bo::RunRecord& r) { return std::string(bo::solver_tag(r.solver)); }

}  // namespace

const SuccessCell* SuccessTable::cell(int dataset, const std::string& solver) const {
  const auto it = cells.find({dataset, solver});
  return it == cells.end() ? nullptr : &it->second;
}

double SuccessTable::overall(const std::string& solver) const {
  int runs = 0, succ = 0;
  for (const auto& [key, c] : cells) {
    if (key.second != solver) continue;
    runs += c.n_runs;
    succ += c.n_success;
  }
  return runs > 0 ? static_cast<double>(succ) / runs : 0.0;
}

SuccessTable build_success_table(std::span<const bo::RunRecord> records) {
  SuccessTable t;
  std::set<int> datasets;
  std::set<std::string> solvers;
  for (const bo::RunRecord& r : records) {
    const std::string s = tag(r);
    datasets.insert(r.experiment_id);
    solvers.insert(s);
    SuccessCell& c = t.cells[{r.experiment_id, s}];
    ++c.n_runs;
    c.n_success += r.success ? 1 : 0;
    if (!r.replicated) {
      ++c.n_unique;
      c.n_unique_success += r.success ? 1 : 0;
    }
  }
  t.datasets.assign(datasets.begin(), datasets.end());
  t.solvers.assign(solvers.begin(), solvers.end());
  return t;
}

bool rows_are_degenerate(const SuccessTable& table, const std::string& solver) {
  for (const auto& [key, c] : table.cells)
    if (key.second == solver && c.n_success != 0 && c.n_success != c.n_runs) return false;
  return true;
}

double single_run_conditional_probability(double alpha, int total_successes, int n_ref) {
  const double e = std::exp(alpha) * total_successes;
  return e / (e + (n_ref + 1 - total_successes));
}

std::vector<double> conditional_distribution(double alpha, int m, int n, int total_successes) {
  const ConditionalLaw law = make_law({0, m, total_successes, n});
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logp(law.log_w.size());
  for (std::size_t i = 0; i < logp.size(); ++i) {
    logp[i] = law.log_w[i] + alpha * static_cast<double>(law.lo + static_cast<int>(i));
    top = std::max(top, logp[i]);
  }
  double z = 0.0;
  for (double& v : logp) z += (v = std::exp(v - top));
  for (double& v : logp) v /= z;
  return logp;
}

CmleFit cmle_fit_counts(std::span<const PairCounts> datasets) {
  std::vector<ConditionalLaw> laws;
  for (const PairCounts& c : datasets) {
    const int T = c.successes_a + c.successes_ref;
    if (c.runs_a <= 0 || c.runs_ref <= 0 || T <= 0 || T >= c.runs_a + c.runs_ref) continue;
    laws.push_back(make_law(c));
  }
  if (laws.empty()) throw AllDegenerate("every dataset is concordant; the conditional likelihood is flat");

  CmleFit fit;
  fit.informative_datasets = static_cast<int>(laws.size());
  double lo = -kAlphaLimit, hi = kAlphaLimit;
  if (score_info(laws, lo).first <= 0.0) {
    fit.alpha_hat = lo;
  } else if (score_info(laws, hi).first >= 0.0) {
    fit.alpha_hat = hi;
  } else {
    double alpha = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      const auto [score, info] = score_info(laws, alpha);
      if (std::abs(score) < 1e-12) break;
      if (score > 0.0) lo = alpha;
      else hi = alpha;
      double next = info > 0.0 ? alpha + score / info : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - alpha) < 1e-13) {
        alpha = next;
        break;
      }
      alpha = next;
    }
    fit.alpha_hat = alpha;
    fit.converged = true;
  }
  const double info = score_info(laws, fit.alpha_hat).second;
  fit.se = info > 0.0 ? 1.0 / std::sqrt(info) : std::numeric_limits<double>::infinity();
  if (!(info > 0.0)) fit.converged = false;
  fit.wald_z = fit.alpha_hat / fit.se;
  fit.wald_p = normal_two_sided(fit.wald_z);
  return fit;
}

CmleFit cmle_fit(const SuccessTable& table, const std::string& solver_a, const std::string& solver_ref) {
  std::vector<PairCounts> counts;
  for (int d : table.datasets) {
    const SuccessCell* a = table.cell(d, solver_a);
    const SuccessCell* r = table.cell(d, solver_ref);
    if (a == nullptr || r == nullptr) continue;
    counts.push_back({a->n_unique_success, a->n_unique, r->n_unique_success, r->n_unique});
  }
  return cmle_fit_counts(counts);
}

namespace {

// Multi-group conditional law: tuples of successes for the non-reference groups.
struct JointLaw {
  std::vector<std::vector<int>> tuples;
  std::vector<double> log_w;
  std::vector<int> observed;
};

JointLaw make_joint_law(const std::vector<int>& runs, const std::vector<int>& successes) {
  // Group 0 is the reference.
  const std::size_t k = runs.size() - 1;
  const int T = std::accumulate(successes.begin(), successes.end(), 0);
  JointLaw law;
  law.observed.assign(successes.begin() + 1, successes.end());
  std::vector<int> a(k, 0);
  while (true) {
    const int rest = T - std::accumulate(a.begin(), a.end(), 0);
    if (rest >= 0 && rest <= runs[0]) {
      double lw = log_choose(runs[0], rest);
      for (std::size_t g = 0; g < k; ++g) lw += log_choose(runs[g + 1], a[g]);
      law.tuples.push_back(a);
      law.log_w.push_back(lw);
    }
    std::size_t g = 0;
    while (g < k && ++a[g] > runs[g + 1]) a[g++] = 0;
    if (g == k) break;
  }
  return law;
}

double joint_loglik(const std::vector<JointLaw>& laws, const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                    Eigen::MatrixXd* hess) {
  const Eigen::Index k = theta.size();
  double ll = 0.0;
  if (grad) grad->setZero(k);
  if (hess) hess->setZero(k, k);
  for (const JointLaw& law : laws) {
    std::vector<double> e(law.tuples.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e.size(); ++i) {
      double v = law.log_w[i];
      for (Eigen::Index g = 0; g < k; ++g) v += theta[g] * law.tuples[i][static_cast<std::size_t>(g)];
      e[i] = v;
      top = std::max(top, v);
    }
    double z = 0.0;
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double w = std::exp(e[i] - top);
      z += w;
      Eigen::VectorXd a(k);
      for (Eigen::Index g = 0; g < k; ++g) a[g] = law.tuples[i][static_cast<std::size_t>(g)];
      m1 += w * a;
      m2 += w * a * a.transpose();
    }
    m1 /= z;
    m2 /= z;
    double obs = 0.0;
    Eigen::VectorXd ao(k);
    for (Eigen::Index g = 0; g < k; ++g) ao[g] = law.observed[static_cast<std::size_t>(g)];
    for (std::size_t i = 0; i < e.size(); ++i)
      if (law.tuples[i] == law.observed) obs = law.log_w[i];
    ll += obs + theta.dot(ao) - (top + std::log(z));
    if (grad) *grad += ao - m1;
    if (hess) *hess -= m2 - m1 * m1.transpose();
  }
  return ll;
}

}  // namespace

JointTest joint_lr_test(const SuccessTable& table, const std::string& solver_ref,
                        const std::vector<std::string>& others) {
  JointTest out;
  out.solvers = others;
  out.df = static_cast<int>(others.size());
  std::vector<JointLaw> laws;
  for (int d : table.datasets) {
    std::vector<int> runs, succ;
    bool complete = true;
    for (std::size_t g = 0; g <= others.size() && complete; ++g) {
      const SuccessCell* c = table.cell(d, g == 0 ? solver_ref : others[g - 1]);
      if (c == nullptr || c->n_unique == 0) complete = false;
      else {
        runs.push_back(c->n_unique);
        succ.push_back(c->n_unique_success);
      }
    }
    if (!complete) continue;
    const int T = std::accumulate(succ.begin(), succ.end(), 0);
    if (T == 0 || T == std::accumulate(runs.begin(), runs.end(), 0)) continue;
    laws.push_back(make_joint_law(runs, succ));
  }
  if (laws.empty()) throw AllDegenerate("every dataset is concordant; the conditional likelihood is flat");

  const Eigen::Index k = static_cast<Eigen::Index>(others.size());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  const double ll0 = joint_loglik(laws, theta, nullptr, nullptr);
  double ll = ll0;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    ll = joint_loglik(laws, theta, &g, &h);
    if (g.lpNorm<Eigen::Infinity>() < 1e-10) {
      out.converged = true;
      break;
    }
    Eigen::VectorXd step = (-h).ldlt().solve(g);
    if (!step.allFinite()) step = g;
    double scale = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Eigen::VectorXd trial = (theta + scale * step).cwiseMax(-kAlphaLimit).cwiseMin(kAlphaLimit);
      const double lt = joint_loglik(laws, trial, nullptr, nullptr);
      if (lt > ll) {
        theta = trial;
        ll = lt;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) {
      out.converged = g.lpNorm<Eigen::Infinity>() < 1e-6;
      break;
    }
  }
  out.log_odds.assign(theta.data(), theta.data() + k);
  out.lr_statistic = std::max(0.0, 2.0 * (ll - ll0));
  const boost::math::chi_squared chi(static_cast<double>(out.df));
  out.p_value = boost::math::cdf(boost::math::complement(chi, out.lr_statistic));
  return out;
}

double worst_subset_mean(std::vector<double> proportions, int half_size) {
  if (half_size < 1 || half_size > static_cast<int>(proportions.size()))
    throw Error("minimax: half_size out of range");
  std::sort(proportions.begin(), proportions.end());
  return std::accumulate(proportions.begin(), proportions.begin() + half_size, 0.0) / half_size;
}

MinimaxQ1 minimax_q1(const SuccessTable& table, const std::vector<std::string>& solvers, int half_size) {
  MinimaxQ1 out;
  double best = -1.0;
  for (const std::string& s : solvers) {
    const std::vector<double> p = dataset_proportions(table, s);
    out.value[s] = worst_subset_mean(p, half_size);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<int> subset;
    for (int i = 0; i < half_size; ++i) subset.push_back(table.datasets[order[static_cast<std::size_t>(i)]]);
    std::sort(subset.begin(), subset.end());
    out.worst_subset[s] = subset;
    if (out.value[s] > best) {
      best = out.value[s];
      out.best_solver = s;
    }
  }
  return out;
}

MinimaxQ2 minimax_q2_matrix(const std::vector<std::vector<double>>& P, int half_size, std::uint64_t seed) {
  if (P.empty()) throw Error("minimax: no solvers");
  const int C = static_cast<int>(P.front().size());
  if (half_size < 1 || half_size > C) throw Error("minimax: half_size out of range");

  const auto objective = [&](const std::vector<int>& subset) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : P) {
      double s = 0.0;
      for (int j : subset) s += row[static_cast<std::size_t>(j)];
      worst = std::min(worst, s / half_size);
    }
    return worst;
  };

  // log C(C, half) decides between enumeration and local search.
  const double log_count = log_choose(C, half_size);
  MinimaxQ2 out;
  if (log_count <= std::log(1e7) + 1e-9) {
    std::vector<int> idx(static_cast<std::size_t>(half_size));
    std::iota(idx.begin(), idx.end(), 0);
    out.value = -std::numeric_limits<double>::infinity();
    while (true) {
      const double v = objective(idx);
      if (v > out.value) {
        out.value = v;
        out.subset = idx;
      }
      int i = half_size - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == C - half_size + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < half_size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
  }

  out.approximate = true;
  out.value = -std::numeric_limits<double>::infinity();
  Rng rng(mix64(seed ^ 0x51324d4d));
  constexpr int kRestarts = 32;
  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<int> all(static_cast<std::size_t>(C));
    std::iota(all.begin(), all.end(), 0);
    for (int i = C - 1; i > 0; --i)
      std::swap(all[static_cast<std::size_t>(i)], all[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    std::vector<int> in(all.begin(), all.begin() + half_size);
    std::vector<int> outside(all.begin() + half_size, all.end());
    double v = objective(in);
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t a = 0; a < in.size() && !improved; ++a) {
        for (std::size_t b = 0; b < outside.size() && !improved; ++b) {
          std::swap(in[a], outside[b]);
          const double w = objective(in);
          if (w > v + 1e-15) {
            v = w;
            improved = true;
          } else {
            std::swap(in[a], outside[b]);
          }
        }
      }
    }
    if (v > out.value) {
      out.value = v;
      std::sort(in.begin(), in.end());
      out.subset = in;
    }
  }
  return out;
}

MinimaxQ2 minimax_q2(const SuccessTable& table, const std::vector<std::string>& solvers, int half_size,
                     std::uint64_t seed) {
  std::vector<std::vector<double>> P;
  for (const std::string& s : solvers) P.push_back(dataset_proportions(table, s));
  MinimaxQ2 r = minimax_q2_matrix(P, half_size, seed);
  for (int& j : r.subset) j = table.datasets[static_cast<std::size_t>(j)];
  return r;
}

TTest paired_t_one_sided(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("paired t-test: unequal lengths");
  if (a.size() < 2) throw Error("paired t-test: need at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  TTest out;
  out.df = static_cast<int>(n) - 1;
  const double mean = mean_of(d);
  if (std::all_of(d.begin(), d.end(), [&](double v) { return v == d.front(); })) {
    out.zero_variance = true;
    if (d.front() == 0.0) {
      out.t = 0.0;
      out.p = 0.5;
    } else {
      out.t = d.front() > 0.0 ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
      out.p = d.front() > 0.0 ? 0.0 : 1.0;
    }
    return out;
  }
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(out.df));
  out.p = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

std::vector<int> joint_success_experiments(std::span<const bo::RunRecord> records) {
  std::set<std::string> solvers;
  std::set<int> experiments;
  std::set<std::pair<int, std::string>> succeeded;
  for (const bo::RunRecord& r : records) {
    solvers.insert(tag(r));
    experiments.insert(r.experiment_id);
    if (r.success) succeeded.insert({r.experiment_id, tag(r)});
  }
  std::vector<int> out;
  for (int e : experiments) {
    bool all = true;
    for (const std::string& s : solvers) all = all && succeeded.count({e, s}) > 0;
    if (all) out.push_back(e);
  }
  return out;
}

std::map<std::string, IterationSummary> iteration_stats(std::span<const bo::RunRecord> records,
                                                        bool joint_success_filter) {
  std::set<int> keep;
  if (joint_success_filter) {
    const std::vector<int> joint = joint_success_experiments(records);
    keep.insert(joint.begin(), joint.end());
  }
  std::map<std::string, std::vector<double>> iters;
  for (const bo::RunRecord& r : records) {
    iters[tag(r)];
    if (joint_success_filter && (!r.success || keep.count(r.experiment_id) == 0)) continue;
    iters[tag(r)].push_back(r.iterations_to_termination);
  }
  std::map<std::string, IterationSummary> out;
  for (const auto& [s, v] : iters) {
    IterationSummary sum;
    sum.count = static_cast<int>(v.size());
    if (!v.empty()) {
      sum.mean = mean_of(v);
      sum.median = median_lower(v);
      if (v.size() >= 2) {
        double ss = 0.0;
        for (double x : v) ss += (x - sum.mean) * (x - sum.mean);
        sum.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
      }
    }
    out[s] = sum;
  }
  return out;
}

PairedMeans paired_iteration_means(std::span<const bo::RunRecord> records, const std::string& solver_a,
                                   const std::string& solver_b) {
  PairedMeans out;
  for (int e : joint_success_experiments(records)) {
    std::vector<double> a, b;
    for (const bo::RunRecord& r : records) {
      if (r.experiment_id != e || !r.success) continue;
      if (tag(r) == solver_a) a.push_back(r.iterations_to_termination);
      if (tag(r) == solver_b) b.push_back(r.iterations_to_termination);
    }
    if (a.empty() || b.empty()) continue;
    out.experiments.push_back(e);
    out.a.push_back(mean_of(a));
    out.b.push_back(mean_of(b));
  }
  return out;
}

std::map<std::string, std::vector<CapPoint>> success_probability_vs_cap(
    std::span<const bo::RunRecord> records, const std::vector<int>& caps) {
  std::map<std::string, std::vector<const bo::RunRecord*>> by_solver;
  for (const bo::RunRecord& r : records) by_solver[tag(r)].push_back(&r);
  std::map<std::string, std::vector<CapPoint>> out;
  for (const auto& [s, runs] : by_solver) {
    auto& curve = out[s];
    for (int cap : caps) {
      int hits = 0;
      for (const bo::RunRecord* r : runs) hits += (r->success && r->iterations_to_termination <= cap) ? 1 : 0;
      curve.push_back({cap, static_cast<double>(hits) / static_cast<double>(runs.size())});
    }
  }
  return out;
}

std::vector<RegretRow> regret_curves(std::span<const bo::RunRecord> records, double f_star) {
  std::map<std::string, std::vector<std::vector<double>>> by_solver;
  for (const bo::RunRecord& r : records) by_solver[tag(r)].push_back(r.best_so_far());
  std::vector<RegretRow> rows;
  for (const auto& [s, curves] : by_solver) {
    std::size_t len = 0;
    for (const auto& c : curves) len = std::max(len, c.size());
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> v;
      for (const auto& c : curves) v.push_back((t < c.size() ? c[t] : c.back()) - f_star);
      const double m = mean_of(v);
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      rows.push_back({s, static_cast<int>(t), m, std::sqrt(ss / static_cast<double>(v.size()))});
    }
  }
  return rows;
}

std::string regret_csv(const std::vector<RegretRow>& rows) {
  std::string out = "solver,iteration,mean_regret,std_regret\n";
  char buf[128];
  for (const RegretRow& r : rows) {
    std::snprintf(buf, sizeof buf, ",%d,%.12g,%.12g\n", r.iteration, r.mean_regret, r.std_regret);
    out += r.solver;
    out += buf;
  }
  return out;
}

}  // namespace bolab::stats
