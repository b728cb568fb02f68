#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>

#include "bolab/bnb.hpp"
#include "bolab/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bolab;
using fixtures::Mat;
using fixtures::Vec;
using fixtures::vec;
using global::Box;
using global::Interval;

namespace {

Box random_box(Rng& rng, Eigen::Index d, double max_width) {
  Box b{Vec(d), Vec(d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    const double w = rng.uniform(0.0, max_width);
    b.lo[k] = rng.uniform(0.0, 1.0 - w);
    b.hi[k] = b.lo[k] + w;
  }
  return b;
}

Vec point_in(Rng& rng, const Box& b) {
  Vec x(b.dims());
  for (Eigen::Index k = 0; k < b.dims(); ++k) x[k] = b.lo[k] + rng.uniform() * (b.hi[k] - b.lo[k]);
  return x;
}

Interval random_interval(Rng& rng) {
  const double a = rng.uniform(-3.0, 3.0), b = rng.uniform(-3.0, 3.0);
  return {std::min(a, b), std::max(a, b)};
}

double sample(Rng& rng, const Interval& i) { return i.lo + rng.uniform() * (i.hi - i.lo); }

std::shared_ptr<const gp::GpModel> five_point_1d() {
  Mat X(5, 1);
  X << 0.05, 0.3, 0.45, 0.7, 0.92;
  return fixtures::model_on_unit(X, vec({0.4, -0.8, 0.1, -0.5, 0.9}), vec({0.15}), 1.0);
}

}  // namespace

TEST_CASE("interval operations enclose sampled results") {
  Rng rng(1);
  for (int i = 0; i < 20000; ++i) {
    const Interval a = random_interval(rng), b = random_interval(rng);
    const double x = sample(rng, a), y = sample(rng, b);
    CHECK((a + b).contains(x + y));
    CHECK((a - b).contains(x - y));
    CHECK((a * b).contains(x * y));
    CHECK((1.7 * a).contains(1.7 * x));
    CHECK((-2.3 * a).contains(-2.3 * x));
    CHECK(global::square(a).contains(x * x));
    CHECK(global::exp(a).contains(std::exp(x)));
    CHECK(global::sqrt(global::square(a)).contains(std::abs(x)));
    CHECK((-a).contains(-x));
  }
  const Interval r = global::intersect({0.0, 2.0}, {1.0, 3.0});
  CHECK(r.lo == 1.0);
  CHECK(r.hi == 2.0);
}

TEST_CASE("kernel enclosure examples") {
  const gp::KernelHyper hyper{vec({0.3, 0.5}), 1.7};
  const Box box{vec({0.2, 0.2}), vec({0.6, 0.7})};
  const Interval inside = global::interval_kernel_over_box(box, vec({0.4, 0.3}), hyper);
  CHECK(inside.hi >= 1.7);
  CHECK(inside.hi == doctest::Approx(1.7).epsilon(1e-14));
  const Vec p = vec({0.35, 0.45});
  const Box point{p, p};
  const Vec t = vec({0.9, 0.1});
  const Interval at = global::interval_kernel_over_box(point, t, hyper);
  const double k = gp::kernel_matern52(gp::scaled_distance(p, t, hyper.lengthscales), 1.7);
  CHECK(at.contains(k));
  CHECK(at.width() <= 1e-14);
}

TEST_CASE("kernel enclosure contains sampled kernel values") {
  Rng rng(2);
  for (int rep = 0; rep < 1000; ++rep) {
    const int d = 1 + rep % 3;
    Vec ls(d);
    for (int k = 0; k < d; ++k) ls[k] = rng.uniform(0.05, 1.0);
    const gp::KernelHyper hyper{ls, rng.uniform(0.5, 2.0)};
    const Box box = random_box(rng, d, 1.0);
    const Vec t = fixtures::random_point(rng, d);
    const Interval enc = global::interval_kernel_over_box(box, t, hyper);
    for (int s = 0; s < 1000; ++s) {
      const Vec x = point_in(rng, box);
      CHECK(enc.contains(gp::kernel_matern52(gp::scaled_distance(x, t, ls), hyper.signal_variance)));
    }
  }
}

TEST_CASE("posterior enclosure over the whole domain reaches the prior") {
  Mat X(2, 2);
  X << 0.1, 0.1, 0.15, 0.12;
  const auto model = fixtures::model_on_unit(X, vec({1.0, -1.0}), vec({0.05, 0.05}), 1.3);
  const auto enc = global::interval_posterior(*model, Box::unit(2));
  CHECK(enc.mean.contains(0.0));
  CHECK(enc.std.hi == doctest::Approx(std::sqrt(1.3)).epsilon(1e-12));
  CHECK(enc.std.lo >= 0.0);
  CHECK(enc.std.hi <= std::sqrt(1.3) * (1.0 + 1e-12));
}

TEST_CASE("posterior enclosure of a degenerate box is the pointwise posterior") {
  Rng rng(3);
  int accepted = 0;
  for (int rep = 0; accepted < 50; ++rep) {
    const auto model = fixtures::random_model(rng, 1 + rep % 3, 7);
    // Rounding pads scale with ||K^-1||, so exact collapse needs a well-conditioned K.
    if (model->inverse().cwiseAbs().maxCoeff() > 1e2) continue;
    ++accepted;
    const Vec x = fixtures::random_point(rng, model->dims());
    const auto enc = global::interval_posterior(*model, {x, x});
    const auto [m, s] = model->mean_std(x);
    CHECK(std::abs(enc.mean.lo - m) < 1e-10);
    CHECK(std::abs(enc.mean.hi - m) < 1e-10);
    CHECK(std::abs(enc.std.lo - s) < 1e-10);
    CHECK(std::abs(enc.std.hi - s) < 1e-10);
    const double kappa = 2.0;
    CHECK(std::abs(global::lcb_lower_bound(*model, {x, x}, kappa) - (m - kappa * s)) < 1e-10);
  }
}

TEST_CASE("posterior enclosures contain sampled posteriors") {
  Rng rng(4);
  long violations = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto model = fixtures::random_model(rng, 1 + rep % 3, 5 + rep % 6);
    const Box box = random_box(rng, model->dims(), rep % 2 == 0 ? 1.0 : 0.05);
    const auto enc = global::interval_posterior(*model, box);
    CHECK(enc.std.lo >= 0.0);
    CHECK(enc.std.hi <= std::sqrt(model->hyper().signal_variance) * (1.0 + 1e-12));
    for (int s = 0; s < 200; ++s) {
      const Vec x = point_in(rng, box);
      const auto [m, sd] = model->mean_std(x);
      if (!enc.mean.contains(m) || !enc.std.contains(sd)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("degenerate-box enclosures of ill-conditioned models stay sound and narrow") {
  Rng rng(13);
  int accepted = 0;
  for (int rep = 0; accepted < 50; ++rep) {
    const auto model = fixtures::random_model(rng, 1 + rep % 3, 9);
    if (model->inverse().cwiseAbs().maxCoeff() <= 1e2) continue;
    ++accepted;
    const Vec x = fixtures::random_point(rng, model->dims());
    const auto enc = global::interval_posterior(*model, {x, x});
    const auto [m, s] = model->mean_std(x);
    const double scale = model->inverse().cwiseAbs().maxCoeff();
    CHECK(enc.mean.contains(m));
    CHECK(enc.std.contains(s));
    CHECK(enc.mean.width() <= 1e-13 * scale * (1.0 + model->weights().cwiseAbs().sum()));
    CHECK(enc.std.hi * enc.std.hi - enc.std.lo * enc.std.lo <= 1e-12 * scale * model->data().size());
  }
}

TEST_CASE("lcb lower bound") {
  Rng rng(5);
  const auto model = fixtures::random_model(rng, 2, 8);
  for (int rep = 0; rep < 20; ++rep) {
    const Box box = random_box(rng, 2, 0.5);
    CHECK(global::lcb_lower_bound(*model, box, 0.0) == global::interval_posterior(*model, box).mean.lo);
    const double kappa = 2.0;
    const double lb = global::lcb_lower_bound(*model, box, kappa);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 10000; ++s) {
      const Vec x = point_in(rng, box);
      const auto [m, sd] = model->mean_std(x);
      best = std::min(best, m - kappa * sd);
    }
    CHECK(lb <= best);
  }
}

TEST_CASE("branch-and-bound matches the 1D grid oracle") {
  const auto model = five_point_1d();
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 1);
  const auto oracle = oracle::grid_polish_minimum([&](const Vec& x) { return ctx.value(x); }, 1, 100001);
  const global::BnbResult r = global::bnb_minimize(ctx, {0.01, 1e-6, 10.0, 20000});
  CHECK(r.status == global::BnbStatus::Optimal);
  CHECK(std::abs(r.x_best[0] - oracle.x[0]) < 1e-4);
  CHECK(r.gap_rel <= 0.01);
  CHECK(r.lb <= oracle.value + 1e-12);
  CHECK(std::abs(r.ub - oracle.value) <= std::max(1e-6, 0.01 * std::abs(oracle.value)));
  CHECK(std::abs(r.ub - ctx.value(r.x_best)) < 1e-12);
}

TEST_CASE("exploitative branch-and-bound is no worse than the best training point") {
  const auto model = five_point_1d();
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{0.0}, 1);
  const global::BnbResult r = global::bnb_minimize(ctx);
  CHECK(r.ub <= model->data().y.minCoeff() + 1e-6);
}

TEST_CASE("branch-and-bound is deterministic") {
  Rng rng(6);
  const auto model = fixtures::random_model(rng, 2, 8);
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 1);
  const auto a = global::bnb_minimize(ctx);
  const auto b = global::bnb_minimize(ctx);
  CHECK(a.nodes_processed == b.nodes_processed);
  CHECK(a.x_best == b.x_best);
  CHECK(a.ub == b.ub);
  CHECK(a.lb == b.lb);
  CHECK(a.status == b.status);
}

TEST_CASE("branch-and-bound bounds are anytime monotone and certified") {
  Rng rng(7);
  for (int rep = 0; rep < 6; ++rep) {
    const auto model = fixtures::random_model(rng, 1 + rep % 2, 6);
    const acq::AcquisitionContext ctx(model, acq::FixedKappa{rep % 2 == 0 ? 0.0 : 2.0}, 1);
    double prev_lb = -std::numeric_limits<double>::infinity();
    double prev_ub = std::numeric_limits<double>::infinity();
    bool monotone = true;
    const global::BnbOptions opt;
    const auto r = global::bnb_minimize(ctx, opt, [&](double lb, double ub) {
      monotone = monotone && lb >= prev_lb && ub <= prev_ub && lb <= ub;
      prev_lb = lb;
      prev_ub = ub;
    });
    CHECK(monotone);
    CHECK(r.lb <= r.ub);
    CHECK(r.x_best.minCoeff() >= 0.0);
    CHECK(r.x_best.maxCoeff() <= 1.0);
    if (r.status == global::BnbStatus::Optimal)
      CHECK(r.ub - r.lb <= std::max(opt.eps_a, opt.eps_r * std::abs(r.ub)));
  }
}

TEST_CASE("branch-and-bound budgets stop with a valid incumbent") {
  Rng rng(8);
  const auto model = fixtures::random_model(rng, 2, 9);
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 1);
  global::BnbOptions capped;
  capped.eps_r = 1e-9;
  capped.eps_a = 1e-12;
  capped.node_cap = 5;
  const auto r = global::bnb_minimize(ctx, capped);
  CHECK(r.status == global::BnbStatus::TimeLimit);
  CHECK(r.node_cap_hit);
  CHECK(r.nodes_processed == 5);
  CHECK(r.lb <= r.ub);
  global::BnbOptions timed = capped;
  timed.node_cap = 1000000000;
  timed.time_limit_s = 0.05;
  const auto t0 = std::chrono::steady_clock::now();
  const auto t = global::bnb_minimize(ctx, timed);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 2.0);
  CHECK(t.status == global::BnbStatus::TimeLimit);
  CHECK_FALSE(t.node_cap_hit);
  CHECK(std::isfinite(t.ub));
  CHECK_THROWS_AS(global::bnb_minimize(ctx, {0.0}), Error);
}

TEST_CASE("loosening policy") {
  global::BnbResult optimal;
  optimal.status = global::BnbStatus::Optimal;
  optimal.gap_rel = 0.5;
  CHECK(global::loosen_policy_update({0.01}, optimal).eps_r_current == 0.01);
  global::BnbResult wide;
  wide.status = global::BnbStatus::TimeLimit;
  wide.gap_rel = 0.25;
  CHECK(global::loosen_policy_update({0.01}, wide).eps_r_current == doctest::Approx(0.1));
  CHECK(global::loosen_policy_update({0.1}, wide).eps_r_current == doctest::Approx(0.1));
  global::BnbResult narrow;
  narrow.status = global::BnbStatus::TimeLimit;
  narrow.gap_rel = 0.05;
  CHECK(global::loosen_policy_update({0.01}, narrow).eps_r_current == 0.01);
  global::BnbResult huge;
  huge.status = global::BnbStatus::TimeLimit;
  huge.gap_rel = 3.0;
  CHECK(global::loosen_policy_update({0.1}, huge).eps_r_current == doctest::Approx(1.0));
}
