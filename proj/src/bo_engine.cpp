#include "bolab/bo_engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <memory>

#include "bolab/errors.hpp"

namespace bolab::bo {

std::string_view solver_tag(Solver s) {
  switch (s) {
    case Solver::ILS: return "ILS";
    case Solver::IMS: return "IMS";
    case Solver::BNB: return "BNB";
  }
  return "?";
}

Solver parse_solver(std::string_view tag) {
  std::string up(tag);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "ILS") return Solver::ILS;
  if (up == "IMS") return Solver::IMS;
  if (up == "BNB") return Solver::BNB;
  throw Error("unknown solver '" + std::string(tag) + "'");
}

std::string_view clause_name(TcClause c) {
  switch (c) {
    case TcClause::None: return "none";
    case TcClause::TC1: return "TC1";
    case TcClause::TC2: return "TC2";
  }
  return "none";
}

TcClause parse_clause(std::string_view name) {
  if (name == "TC1") return TcClause::TC1;
  if (name == "TC2") return TcClause::TC2;
  if (name == "none") return TcClause::None;
  throw Error("unknown termination clause '" + std::string(name) + "'");
}

void TerminationConfig::validate() const {
  if (!(eps_x1 > 0.0)) throw ConfigError("tc.eps_x1", "must be > 0");
  if (!(eps_x2 > eps_x1)) throw ConfigError("tc.eps_x2", "must exceed eps_x1");
  if (!(eps_f_rel > 0.0)) throw ConfigError("tc.eps_f_rel", "must be > 0");
  if (!(eps_f_abs > 0.0)) throw ConfigError("tc.eps_f_abs", "must be > 0");
  if (max_iter < 1) throw ConfigError("tc.max_iter", "must be >= 1");
}

TerminationCheck check_termination(const Mat& prior_x, const Vec& prior_f, const Vec& x_t, double f_t,
                                   const TerminationConfig& tc, const SearchBox& box) {
  if (prior_x.rows() == 0) return {};
  const Vec u_t = box.to_unit(x_t);
  double dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < prior_x.rows(); ++i)
    dist = std::min(dist, (box.to_unit(prior_x.row(i).transpose()) - u_t).norm());
  if (dist < tc.eps_x1) return {true, TcClause::TC1};
  if (dist < tc.eps_x2) {
    const double best = prior_f.minCoeff();
    const double gap = std::abs(f_t - best);
    if (gap < tc.eps_f_rel * std::abs(best) || gap < tc.eps_f_abs) return {true, TcClause::TC2};
  }
  return {};
}

std::vector<double> RunRecord::best_so_far() const {
  std::vector<double> out;
  out.reserve(iterations.size() + 1);
  double best = initial_f.size() > 0 ? initial_f.minCoeff() : std::numeric_limits<double>::infinity();
  out.push_back(best);
  for (const IterationRecord& it : iterations) {
    best = std::min(best, it.f);
    out.push_back(best);
  }
  return out;
}

namespace {

struct InnerOutcome {
  Vec x;
  double value = 0.0;
  std::string status;
  long work = 0;
};

InnerOutcome solve_inner(const acq::AcquisitionContext& ctx, const RunOptions& options,
                         global::LoosenState& loosen, Rng& rng) {
  InnerOutcome out;
  switch (options.solver) {
    case Solver::ILS:
    case Solver::IMS: {
      const local::LocalSolveResult r = options.solver == Solver::ILS
                                            ? local::ils_minimize(ctx, rng, options.local)
                                            : local::ims_minimize(ctx, rng, options.ims_restarts, options.local);
      out.x = r.x;
      out.value = r.value;
      out.status = r.converged ? "converged" : "max_iter";
      out.work = r.n_evals;
      break;
    }
    case Solver::BNB: {
      global::BnbOptions opt = options.bnb;
      opt.eps_r = loosen.eps_r_current;
      const global::BnbResult r = global::bnb_minimize(ctx, opt);
      loosen = global::loosen_policy_update(loosen, r);
      out.x = r.x_best;
      out.value = r.ub;
      out.status = r.status == global::BnbStatus::Optimal ? "optimal"
                   : r.node_cap_hit                        ? "node_cap"
                                                           : "time_limit";
      out.work = r.nodes_processed;
      break;
    }
  }
  if (!std::isfinite(out.value) || !out.x.allFinite())
    throw InnerSolverFailure("inner solver returned a non-finite result");
  return out;
}

}  // namespace

RunRecord run_bo(const BenchmarkHandle& bench, const Mat& initial_design, const RunOptions& options,
                 Rng& rng) {
  options.tc.validate();
  acq::validate(options.policy);
  const SearchBox& box = bench.box;
  if (initial_design.rows() < 1) throw Error("run_bo: initial design is empty");
  if (initial_design.cols() != box.dims()) throw Error("run_bo: design dimension mismatch");
  for (Eigen::Index i = 0; i < initial_design.rows(); ++i)
    if (!box.contains(initial_design.row(i).transpose()))
      throw Error("run_bo: initial design point outside the box");

  RunRecord rec;
  rec.case_study_id = options.case_study_id;
  rec.benchmark_id = bench.id;
  rec.f_star = bench.f_star;
  rec.experiment_id = options.experiment_id;
  rec.run_index = options.run_index;
  rec.solver = options.solver;
  rec.initial_x = initial_design;
  rec.initial_f.resize(initial_design.rows());
  for (Eigen::Index i = 0; i < initial_design.rows(); ++i)
    rec.initial_f[i] = bench.evaluate(initial_design.row(i).transpose());

  const Eigen::Index cap = initial_design.rows() + options.tc.max_iter;
  Mat X(cap, box.dims());
  Vec y(cap);
  X.topRows(initial_design.rows()) = initial_design;
  y.head(initial_design.rows()) = rec.initial_f;
  Eigen::Index n = initial_design.rows();

  std::optional<gp::KernelHyper> warm;
  global::LoosenState loosen{options.bnb.eps_r};

  try {
    for (int t = 1; t <= options.tc.max_iter; ++t) {
      auto model = std::make_shared<const gp::GpModel>(
          gp::GpModel::fit(X.topRows(n), y.head(n), box, warm));
      warm = model->hyper();
      const acq::AcquisitionContext ctx(model, options.policy, t);
      const InnerOutcome inner = solve_inner(ctx, options, loosen, rng);

      IterationRecord it;
      it.t = t;
      it.x = box.from_unit(inner.x);
      it.f = bench.evaluate(it.x);
      it.kappa = ctx.kappa();
      it.acquisition = inner.value;
      it.inner_status = inner.status;
      it.inner_work = inner.work;
      const TerminationCheck tc =
          check_termination(X.topRows(n), y.head(n), it.x, it.f, options.tc, box);
      it.clause = tc.clause;
      X.row(n) = it.x.transpose();
      y[n] = it.f;
      ++n;
      rec.iterations.push_back(std::move(it));
      if (tc.stop) {
        rec.terminated = true;
        rec.clause = tc.clause;
        break;
      }
    }
  } catch (const InnerSolverFailure& e) {
    rec.abort_reason = e.what();
  } catch (const NotPositiveDefinite& e) {
    rec.abort_reason = e.what();
  }

  rec.iterations_to_termination = static_cast<int>(rec.iterations.size());
  Eigen::Index best = 0;
  y.head(n).minCoeff(&best);
  rec.best_x = X.row(best).transpose();
  rec.best_f = y[best];
  rec.success = classify_success(rec, bench);
  return rec;
}

bool classify_success(const RunRecord& record, const BenchmarkHandle& bench) {
  return record.terminated && record.best_f <= bench.f_star + bench.success_tol;
}

}  // namespace bolab::bo
