#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "bolab/bo_engine.hpp"
#include "bolab/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bolab;
using fixtures::Mat;
using fixtures::Vec;
using fixtures::vec;

namespace {

bo::TerminationConfig mb_tc() { return {0.001, 0.05, 0.01, 0.5, 150}; }

Mat rows(std::initializer_list<std::initializer_list<double>> r) {
  Mat m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

bench::BenchmarkHandle quadratic_1d() {
  bench::BenchmarkHandle h;
  h.id = "quadratic-1d";
  h.evaluate = [](const Vec& x) { return (x[0] - 0.3) * (x[0] - 0.3); };
  h.box = SearchBox(vec({0.0}), vec({1.0}));
  h.minimizers = {vec({0.3})};
  h.f_star = 0.0;
  h.success_tol = 1e-2;
  return h;
}

bool same_record(const bo::RunRecord& a, const bo::RunRecord& b) {
  if (a.iterations.size() != b.iterations.size()) return false;
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const auto &p = a.iterations[i], &q = b.iterations[i];
    if (p.x != q.x || p.f != q.f || p.kappa != q.kappa || p.acquisition != q.acquisition ||
        p.inner_status != q.inner_status || p.inner_work != q.inner_work || p.clause != q.clause)
      return false;
  }
  return a.terminated == b.terminated && a.clause == b.clause && a.best_x == b.best_x && a.best_f == b.best_f &&
         a.success == b.success && a.initial_x == b.initial_x && a.initial_f == b.initial_f;
}

}  // namespace

TEST_CASE("duplicate candidate fires TC1") {
  const auto h = bench::make_benchmark("mueller-brown");
  const Mat prior = rows({{0.0, 0.0}, {-0.5, 1.5}});
  const Vec f = vec({-48.4, -100.0});
  const auto c = bo::check_termination(prior, f, vec({0.0, 0.0}), 5.0, mb_tc(), h.box);
  CHECK(c.stop);
  CHECK(c.clause == bo::TcClause::TC1);
}

TEST_CASE("TC2 requires proximity and a small f gap") {
  const auto h = bench::make_benchmark("mueller-brown");
  const Mat prior = rows({{0.0, 0.0}});
  // Scaled distance 0.03 along x1: raw step 0.03 * 2.5.
  const Vec x = vec({0.075, 0.0});
  const double dist = (h.box.to_unit(x) - h.box.to_unit(vec({0.0, 0.0}))).norm();
  CHECK(dist == doctest::Approx(0.03).epsilon(1e-12));

  auto c = bo::check_termination(prior, vec({-48.4}), x, -48.2, mb_tc(), h.box);
  CHECK(c.stop);
  CHECK(c.clause == bo::TcClause::TC2);

  c = bo::check_termination(prior, vec({-48.4}), x, -40.0, mb_tc(), h.box);
  CHECK_FALSE(c.stop);
  CHECK(c.clause == bo::TcClause::None);

  // Relative test alone: gap 1.0 < 0.01 * 146.
  c = bo::check_termination(prior, vec({-146.0}), x, -145.0, mb_tc(), h.box);
  CHECK(c.clause == bo::TcClause::TC2);

  // Far away: no clause whatever the gap.
  c = bo::check_termination(prior, vec({-48.4}), vec({0.9, 1.9}), -48.4, mb_tc(), h.box);
  CHECK(c.clause == bo::TcClause::None);

  // The best prior value is the reference, not the nearest point's value.
  const Mat two = rows({{0.0, 0.0}, {-0.5, 1.5}});
  c = bo::check_termination(two, vec({-48.4, -140.0}), x, -48.4, mb_tc(), h.box);
  CHECK(c.clause == bo::TcClause::None);

  c = bo::check_termination(Mat(0, 2), Vec(0), x, 0.0, mb_tc(), h.box);
  CHECK_FALSE(c.stop);
}

TEST_CASE("termination clauses match a brute-force oracle") {
  Rng rng(3);
  const SearchBox box(vec({-2.0, 0.0, 5.0}), vec({1.0, 0.5, 9.0}));
  const bo::TerminationConfig tc{0.01, 0.2, 0.05, 0.1, 10};
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(6));
    Mat X(n, 3);
    Vec f(n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) X(i, k) = rng.uniform(box.lower[k], box.upper[k]);
      f[i] = rng.normal();
    }
    Vec x = X.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)))).transpose();
    for (int k = 0; k < 3; ++k) x[k] += rng.uniform(-0.2, 0.2) * (box.upper[k] - box.lower[k]) * rng.uniform();
    const double ft = f.minCoeff() + rng.uniform(-0.3, 0.3);
    double dmin = 1e300;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double d = (x[k] - X(i, k)) / (box.upper[k] - box.lower[k]);
        s += d * d;
      }
      dmin = std::min(dmin, std::sqrt(s));
    }
    const double best = f.minCoeff();
    const double gap = std::abs(ft - best);
    bo::TcClause expect = bo::TcClause::None;
    if (dmin < tc.eps_x1) expect = bo::TcClause::TC1;
    else if (dmin < tc.eps_x2 && (gap < tc.eps_f_rel * std::abs(best) || gap < tc.eps_f_abs))
      expect = bo::TcClause::TC2;
    const auto c = bo::check_termination(X, f, x, ft, tc, box);
    CHECK(c.clause == expect);
    CHECK(c.stop == (expect != bo::TcClause::None));
  }
}

TEST_CASE("termination config validation names the field") {
  const auto field_of = [](const bo::TerminationConfig& tc) {
    try {
      tc.validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  CHECK(field_of({0.0, 0.05, 0.01, 0.5, 150}) == "tc.eps_x1");
  CHECK(field_of({0.06, 0.05, 0.01, 0.5, 150}) == "tc.eps_x2");
  CHECK(field_of({0.001, 0.05, 0.0, 0.5, 150}) == "tc.eps_f_rel");
  CHECK(field_of({0.001, 0.05, 0.01, -1.0, 150}) == "tc.eps_f_abs");
  CHECK(field_of({0.001, 0.05, 0.01, 0.5, 0}) == "tc.max_iter");
  CHECK(field_of(mb_tc()).empty());
}

TEST_CASE("solver and clause tags round trip") {
  for (bo::Solver s : {bo::Solver::ILS, bo::Solver::IMS, bo::Solver::BNB})
    CHECK(bo::parse_solver(bo::solver_tag(s)) == s);
  CHECK(bo::parse_solver("bnb") == bo::Solver::BNB);
  CHECK_THROWS_AS(bo::parse_solver("maingo"), Error);
  for (bo::TcClause c : {bo::TcClause::None, bo::TcClause::TC1, bo::TcClause::TC2})
    CHECK(bo::parse_clause(bo::clause_name(c)) == c);
  CHECK(bo::is_deterministic(bo::Solver::BNB));
  CHECK_FALSE(bo::is_deterministic(bo::Solver::ILS));
}

TEST_CASE("branch-and-bound runs are reproducible") {
  const auto h = bench::make_benchmark("mueller-brown");
  Rng design_rng(21);
  const Mat design = bench::latin_hypercube(3, h.box, design_rng);
  bo::RunOptions opt;
  opt.solver = bo::Solver::BNB;
  opt.tc = mb_tc();
  opt.tc.max_iter = 12;
  opt.bnb.time_limit_s = 60.0;
  Rng a(1), b(999);
  const auto ra = bo::run_bo(h, design, opt, a);
  const auto rb = bo::run_bo(h, design, opt, b);
  CHECK(same_record(ra, rb));
  for (const auto& it : ra.iterations) CHECK(it.inner_status != "time_limit");
}

TEST_CASE("local-solver runs are reproducible for a fixed seed") {
  const auto h = bench::make_benchmark("camelback-2d");
  Rng design_rng(5);
  const Mat design = bench::latin_hypercube(3, h.box, design_rng);
  for (bo::Solver s : {bo::Solver::ILS, bo::Solver::IMS}) {
    bo::RunOptions opt;
    opt.solver = s;
    opt.tc = {0.001, 0.05, 0.01, 0.05, 20};
    Rng a(77), b(77);
    CHECK(same_record(bo::run_bo(h, design, opt, a), bo::run_bo(h, design, opt, b)));
  }
}

TEST_CASE("1d quadratic run terminates near the analytic minimum") {
  const auto h = quadratic_1d();
  for (bo::Solver s : {bo::Solver::ILS, bo::Solver::IMS, bo::Solver::BNB}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      CAPTURE(bo::solver_tag(s));
      CAPTURE(seed);
      Rng design_rng(seed);
      const Mat design = bench::latin_hypercube(3, h.box, design_rng);
      bo::RunOptions opt;
      opt.solver = s;
      opt.policy = acq::FixedKappa{0.5};
      opt.tc = {0.001, 0.05, 0.01, 1e-4, 150};
      Rng rng(8);
      const auto r = bo::run_bo(h, design, opt, rng);
      CHECK(r.terminated);
      CHECK(r.best_f <= 1e-2);
      CHECK(std::abs(r.best_x[0] - 0.3) < 0.1);
      CHECK(r.success);
    }
  }
}

TEST_CASE("run records are feasible, monotone and consistent") {
  for (const char* id : {"mueller-brown", "camelback-2d", "ackley-3d"}) {
    const auto h = bench::make_benchmark(id);
    for (bo::Solver s : {bo::Solver::ILS, bo::Solver::IMS, bo::Solver::BNB}) {
      CAPTURE(id);
      CAPTURE(bo::solver_tag(s));
      Rng design_rng(12);
      const Mat design = bench::latin_hypercube(3, h.box, design_rng);
      bo::RunOptions opt;
      opt.solver = s;
      opt.tc = {0.001, 0.05, 0.01, h.success_tol, 25};
      opt.bnb.time_limit_s = 0.5;
      opt.case_study_id = "cs";
      opt.experiment_id = 3;
      opt.run_index = 2;
      Rng rng(31);
      const auto r = bo::run_bo(h, design, opt, rng);
      CHECK(r.abort_reason.empty());
      CHECK(r.case_study_id == "cs");
      CHECK(r.experiment_id == 3);
      CHECK(r.run_index == 2);
      CHECK(r.benchmark_id == id);
      CHECK(r.iterations_to_termination == static_cast<int>(r.iterations.size()));
      CHECK(r.iterations_to_termination <= opt.tc.max_iter);
      double best = r.initial_f.minCoeff();
      for (Eigen::Index i = 0; i < design.rows(); ++i)
        CHECK(r.initial_f[i] == h.evaluate(design.row(i).transpose()));
      const auto bsf = r.best_so_far();
      REQUIRE(bsf.size() == r.iterations.size() + 1);
      CHECK(bsf[0] == best);
      for (std::size_t k = 0; k < r.iterations.size(); ++k) {
        const auto& it = r.iterations[k];
        CHECK(it.t == static_cast<int>(k) + 1);
        CHECK(h.box.contains(it.x));
        CHECK(it.f == h.evaluate(it.x));
        CHECK(it.kappa == 2.0);
        CHECK(std::isfinite(it.acquisition));
        const bool last = k + 1 == r.iterations.size();
        if (!last) CHECK(it.clause == bo::TcClause::None);
        best = std::min(best, it.f);
        CHECK(bsf[k + 1] == best);
        CHECK(bsf[k + 1] <= bsf[k]);
      }
      CHECK(r.best_f == best);
      CHECK(h.evaluate(r.best_x) == r.best_f);
      if (r.terminated) {
        CHECK(r.clause != bo::TcClause::None);
        CHECK(r.clause == r.iterations.back().clause);
      } else {
        CHECK(r.clause == bo::TcClause::None);
        CHECK(r.iterations_to_termination == opt.tc.max_iter);
      }
      CHECK(r.success == bo::classify_success(r, h));
    }
  }
}

TEST_CASE("the first candidate is checked against the initial design") {
  const auto h = quadratic_1d();
  const Mat design = rows({{0.3}, {0.9}});
  bo::RunOptions opt;
  opt.solver = bo::Solver::BNB;
  opt.policy = acq::FixedKappa{0.0};
  opt.tc = {0.001, 0.05, 0.01, 0.01, 150};
  Rng rng(1);
  const auto r = bo::run_bo(h, design, opt, rng);
  REQUIRE_FALSE(r.iterations.empty());
  // Posterior mean with kappa 0 is minimized at the best design point.
  CHECK(r.iterations.front().clause != bo::TcClause::None);
  CHECK(r.iterations.size() == 1);
}

TEST_CASE("max_iter caps the run without a clause") {
  const auto h = bench::make_benchmark("ackley-3d");
  Rng design_rng(2);
  const Mat design = bench::latin_hypercube(3, h.box, design_rng);
  bo::RunOptions opt;
  opt.tc = {1e-9, 2e-9, 1e-12, 1e-12, 3};
  Rng rng(2);
  const auto r = bo::run_bo(h, design, opt, rng);
  CHECK(r.iterations.size() == 3);
  CHECK_FALSE(r.terminated);
  CHECK(r.clause == bo::TcClause::None);
  CHECK_FALSE(r.success);
}

TEST_CASE("invalid inputs are rejected") {
  const auto h = quadratic_1d();
  bo::RunOptions opt;
  Rng rng(1);
  CHECK_THROWS_AS(bo::run_bo(h, Mat(0, 1), opt, rng), Error);
  CHECK_THROWS_AS(bo::run_bo(h, rows({{1.5}}), opt, rng), Error);
  CHECK_THROWS_AS(bo::run_bo(h, rows({{0.1, 0.2}}), opt, rng), Error);
  opt.tc.max_iter = 0;
  CHECK_THROWS_AS(bo::run_bo(h, rows({{0.1}}), opt, rng), ConfigError);
}

TEST_CASE("a non-finite black box aborts the run with a reason") {
  auto h = quadratic_1d();
  h.evaluate = [](const Vec& x) { return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : -x[0]; };
  bo::RunOptions opt;
  opt.policy = acq::FixedKappa{0.0};
  opt.tc.max_iter = 5;
  Rng rng(3);
  bo::RunRecord r;
  CHECK_NOTHROW(r = bo::run_bo(h, rows({{0.1}, {0.4}}), opt, rng));
  CHECK_FALSE(r.abort_reason.empty());
  CHECK_FALSE(r.success);
}

TEST_CASE("classify success uses the best reference value") {
  const auto mb = bench::make_benchmark("mueller-brown");
  // Local minimum of the potential near (0.623, 0.028) from a compass oracle.
  const auto [xl, fl] = oracle::compass_search(bench::mueller_brown, vec({0.6, 0.05}), mb.box.lower, mb.box.upper, 0.01);
  CHECK(fl == doctest::Approx(-108.17).epsilon(0.01 / 108.17));
  bo::RunRecord r;
  r.terminated = true;
  r.best_x = xl;
  r.best_f = fl;
  CHECK_FALSE(bo::classify_success(r, mb));
  r.best_f = mb.f_star;
  CHECK(bo::classify_success(r, mb));
  r.best_f = mb.f_star + 0.49;
  CHECK(bo::classify_success(r, mb));
  r.terminated = false;
  CHECK_FALSE(bo::classify_success(r, mb));

  const auto cb = bench::make_benchmark("camelback-2d");
  for (const Vec& m : {vec({0.0898, -0.7126}), vec({-0.0898, 0.7126})}) {
    bo::RunRecord c;
    c.terminated = true;
    c.best_x = m;
    c.best_f = bench::camelback(m);
    CHECK(bo::classify_success(c, cb));
  }
}
