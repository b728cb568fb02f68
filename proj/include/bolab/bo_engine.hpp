#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bolab/acquisition.hpp"
#include "bolab/benchmarks.hpp"
#include "bolab/bnb.hpp"
#include "bolab/local_solvers.hpp"
#include "bolab/rng.hpp"

namespace bolab::bo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using bench::BenchmarkHandle;

enum class Solver { ILS, IMS, BNB };

std::string_view solver_tag(Solver s);
/// Accepts "ILS", "IMS", "BNB" (case-insensitive). Throws bolab::Error otherwise.
Solver parse_solver(std::string_view tag);
inline bool is_deterministic(Solver s) { return s == Solver::BNB; }

enum class TcClause { None, TC1, TC2 };
std::string_view clause_name(TcClause c);
TcClause parse_clause(std::string_view name);

struct TerminationConfig {
  double eps_x1 = 0.001;
  double eps_x2 = 0.05;
  double eps_f_rel = 0.01;
  double eps_f_abs = 0.5;
  int max_iter = 150;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct TerminationCheck {
  bool stop = false;
  TcClause clause = TcClause::None;
};

/// TC1: the candidate is within eps_x1 of a prior point. TC2: within eps_x2 and
/// f_t is close to the best prior value in relative or absolute terms.
/// Distances are Euclidean in the unit-scaled box; f is in raw units. Prior
/// points are the rows of `prior_x` (raw), including the initial design.
TerminationCheck check_termination(const Mat& prior_x, const Vec& prior_f, const Vec& x_t, double f_t,
                                   const TerminationConfig& tc, const SearchBox& box);

struct IterationRecord {
  int t = 0;
  Vec x;  ///< raw candidate
  double f = 0.0;
  double kappa = 0.0;
  double acquisition = 0.0;  ///< inner objective value at the candidate
  std::string inner_status;  ///< converged | max_iter | optimal | time_limit | node_cap
  long inner_work = 0;       ///< objective evaluations (local) or nodes (branch-and-bound)
  TcClause clause = TcClause::None;
};

struct RunRecord {
  std::string case_study_id;
  std::string benchmark_id;
  double f_star = 0.0;  ///< best reference value of the benchmark
  int experiment_id = 0;
  int run_index = 0;
  Solver solver = Solver::ILS;
  bool replicated = false;
  Mat initial_x;
  Vec initial_f;
  std::vector<IterationRecord> iterations;
  bool terminated = false;
  TcClause clause = TcClause::None;
  int iterations_to_termination = 0;
  Vec best_x;
  double best_f = 0.0;
  bool success = false;
  std::string abort_reason;  ///< empty unless the run was aborted

  /// Running best value after iteration t (t = 0 is the initial design).
  std::vector<double> best_so_far() const;
};

struct RunOptions {
  Solver solver = Solver::ILS;
  acq::KappaPolicy policy = acq::FixedKappa{2.0};
  TerminationConfig tc;
  global::BnbOptions bnb;
  local::QnOptions local;
  int ims_restarts = 5;
  std::string case_study_id;
  int experiment_id = 0;
  int run_index = 0;
};

/// Runs the BO loop from `initial_design` (rows are raw points) until the
/// termination criterion fires or max_iter candidates have been evaluated.
/// Each iteration refits the GP (warm-started), minimizes the LCB with the
/// selected inner solver, and evaluates the black box. For branch-and-bound,
/// eps_r starts at options.bnb.eps_r and is loosened between iterates.
RunRecord run_bo(const BenchmarkHandle& bench, const Mat& initial_design, const RunOptions& options,
                 Rng& rng);

/// Terminated and best value within success_tol of the best reference value.
bool classify_success(const RunRecord& record, const BenchmarkHandle& bench);

}  // namespace bolab::bo
