#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bolab/bo_engine.hpp"

namespace bolab::stats {

struct SuccessCell {
  int n_runs = 0;
  int n_success = 0;
  /// Counts over records that are not replicas of a deterministic run.
  int n_unique = 0;
  int n_unique_success = 0;

  double p_hat() const { return n_runs > 0 ? static_cast<double>(n_success) / n_runs : 0.0; }
};

struct SuccessTable {
  std::vector<int> datasets;         ///< ascending
  std::vector<std::string> solvers;  ///< ascending
  std::map<std::pair<int, std::string>, SuccessCell> cells;

  const SuccessCell* cell(int dataset, const std::string& solver) const;
  /// Pooled success proportion of a solver over all datasets.
  double overall(const std::string& solver) const;
};

SuccessTable build_success_table(std::span<const bo::RunRecord> records);

/// True when every dataset row of `solver` has p_hat in {0, 1}.
bool rows_are_degenerate(const SuccessTable& table, const std::string& solver);

/// Per-dataset counts entering the conditional likelihood of one group pair.
struct PairCounts {
  int successes_a = 0;
  int runs_a = 0;
  int successes_ref = 0;
  int runs_ref = 0;
};

/// P(y_A = 1 | T) for one run of A against n runs of the reference:
/// exp(alpha) T / (exp(alpha) T + n + 1 - T).
double single_run_conditional_probability(double alpha, int total_successes, int n_ref);

/// Conditional probabilities P(y_A = a | T) for a over its support, from the
/// noncentral hypergeometric weights C(m,a) C(n,T-a) exp(alpha a). Index 0
/// corresponds to a = max(0, T - n).
std::vector<double> conditional_distribution(double alpha, int m, int n, int total_successes);

struct CmleFit {
  double alpha_hat = 0.0;
  double se = 0.0;
  double wald_z = 0.0;
  double wald_p = 1.0;
  bool converged = false;
  int informative_datasets = 0;
};

/// Common log-odds ratio of `solver_a` versus `solver_ref` by conditional
/// maximum likelihood over datasets. Deterministic replicas count once.
/// Throws AllDegenerate when no dataset has 0 < T < m + n.
CmleFit cmle_fit(const SuccessTable& table, const std::string& solver_a, const std::string& solver_ref);

/// Same estimator on raw per-dataset counts.
CmleFit cmle_fit_counts(std::span<const PairCounts> datasets);

struct JointTest {
  std::vector<std::string> solvers;  ///< compared against the reference, in order
  std::vector<double> log_odds;      ///< joint conditional MLE
  double lr_statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  bool converged = false;
};

/// Likelihood-ratio test that every listed solver shares the reference's odds,
/// using the multi-group conditional likelihood given each dataset's total.
JointTest joint_lr_test(const SuccessTable& table, const std::string& solver_ref,
                        const std::vector<std::string>& others);

struct MinimaxQ1 {
  std::map<std::string, double> value;  ///< worst-subset mean proportion per solver
  std::map<std::string, std::vector<int>> worst_subset;
  std::string best_solver;
};

/// min over subsets of size `half_size` of the subset-mean proportion, by sorting.
/// Throws UnequalRunCounts when a solver's run counts differ across datasets.
MinimaxQ1 minimax_q1(const SuccessTable& table, const std::vector<std::string>& solvers, int half_size);

/// Sorting identity on a bare proportion vector.
double worst_subset_mean(std::vector<double> proportions, int half_size);

struct MinimaxQ2 {
  std::vector<int> subset;  ///< dataset ids
  double value = 0.0;
  bool approximate = false;
};

/// max over subsets of size `half_size` of min over solvers of the subset mean.
/// Exact enumeration up to 1e7 subsets, seeded swap local search beyond.
MinimaxQ2 minimax_q2(const SuccessTable& table, const std::vector<std::string>& solvers, int half_size,
                     std::uint64_t seed = 0);

/// Same on a solver x dataset proportion matrix. Subset holds column indices.
MinimaxQ2 minimax_q2_matrix(const std::vector<std::vector<double>>& proportions, int half_size,
                            std::uint64_t seed = 0);

struct TTest {
  double t = 0.0;
  double p = 0.5;
  int df = 0;
  bool zero_variance = false;
};

/// One-sided paired test of mean(a - b) > 0. With zero variance: t = 0, p = 0.5
/// when all differences vanish, otherwise t = +-inf with p in {0, 1}.
TTest paired_t_one_sided(std::span<const double> a, std::span<const double> b);

struct IterationSummary {
  int count = 0;
  double mean = 0.0;
  double median = 0.0;  ///< lower median
  double std = 0.0;     ///< sample std, 0 below two runs
};

/// Experiments in which every solver present in `records` has at least one success.
std::vector<int> joint_success_experiments(std::span<const bo::RunRecord> records);

/// Iterations to termination per solver. With the filter, only successful
/// runs from joint-success experiments count.
std::map<std::string, IterationSummary> iteration_stats(std::span<const bo::RunRecord> records,
                                                        bool joint_success_filter);

struct PairedMeans {
  std::vector<int> experiments;
  std::vector<double> a;
  std::vector<double> b;
};

/// Per-experiment mean iterations among successful runs of two solvers, over joint-success experiments.
PairedMeans paired_iteration_means(std::span<const bo::RunRecord> records, const std::string& solver_a,
                                   const std::string& solver_b);

struct CapPoint {
  int cap = 0;
  double probability = 0.0;
};

/// Fraction of runs that succeeded within each iteration cap.
std::map<std::string, std::vector<CapPoint>> success_probability_vs_cap(
    std::span<const bo::RunRecord> records, const std::vector<int>& caps);

struct RegretRow {
  std::string solver;
  int iteration = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;  ///< population std across runs
};

/// Best-so-far regret f*_t - f_star per solver, aligned by iteration with
/// carry-forward of each run's final value. Iteration 0 is the initial design.
std::vector<RegretRow> regret_curves(std::span<const bo::RunRecord> records, double f_star);

std::string regret_csv(const std::vector<RegretRow>& rows);

}  // namespace bolab::stats
