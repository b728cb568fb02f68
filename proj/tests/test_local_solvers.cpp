#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "bolab/errors.hpp"
#include "bolab/local_solvers.hpp"
#include "bolab/sobol.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bolab;
using fixtures::Mat;
using fixtures::Vec;
using fixtures::vec;

namespace {

/// Dense 1D grid of the LCB with spacing 1e-5.
struct Grid1d {
  std::vector<double> x, v;
  explicit Grid1d(const acq::AcquisitionContext& ctx) {
    for (int i = 0; i <= 100000; ++i) {
      x.push_back(i * 1e-5);
      v.push_back(ctx.value(vec({x.back()})));
    }
  }
  /// Interior local maxima separating basins.
  std::vector<double> ridges() const {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i)
      if (v[i] > v[i - 1] && v[i] >= v[i + 1]) out.push_back(x[i]);
    return out;
  }
  std::pair<double, double> min_on(double lo, double hi) const {
    double bx = 0.0, bv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (x[i] >= lo && x[i] <= hi && v[i] < bv) {
        bv = v[i];
        bx = x[i];
      }
    return {bx, bv};
  }
};

local::Objective lcb_objective(const acq::AcquisitionContext& ctx) {
  return [&ctx](const Vec& x, Vec& g) { return ctx.value_grad(x, g); };
}

}  // namespace

TEST_CASE("sobol reference rows") {
  const Mat p1 = local::sobol_points(3, 1);
  CHECK(p1(0, 0) == 0.5);
  CHECK(p1(1, 0) == 0.75);
  CHECK(p1(2, 0) == 0.25);
  const Mat p = local::sobol_points(1024, 3);
  const std::vector<std::pair<int, std::array<double, 3>>> rows{
      {1, {0.5, 0.5, 0.5}},
      {2, {0.75, 0.25, 0.25}},
      {3, {0.25, 0.75, 0.75}},
      {4, {0.375, 0.375, 0.625}},
      {5, {0.875, 0.875, 0.125}},
      {6, {0.625, 0.125, 0.875}},
      {7, {0.125, 0.625, 0.375}},
      {8, {0.1875, 0.3125, 0.9375}},
      {100, {0.4140625, 0.2578125, 0.7734375}},
      {1000, {0.2197265625, 0.0966796875, 0.5185546875}},
      {1024, {0.00146484375, 0.37646484375, 0.44775390625}},
  };
  for (const auto& [index, expected] : rows)
    for (int k = 0; k < 3; ++k) CHECK(p(index - 1, k) == expected[static_cast<std::size_t>(k)]);
}

TEST_CASE("sobol points lie in the half-open unit cube") {
  for (int d : {1, 2, 5, 16}) {
    const Mat p = local::sobol_points(500, d);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() < 1.0);
  }
}

TEST_CASE("sobol 64-point net fills every dyadic 8x8 cell once") {
  Mat net(64, 2);
  net.row(0).setZero();
  net.bottomRows(63) = local::sobol_points(63, 2);
  std::array<int, 64> counts{};
  for (int i = 0; i < 64; ++i)
    ++counts[static_cast<std::size_t>(static_cast<int>(net(i, 0) * 8) * 8 + static_cast<int>(net(i, 1) * 8))];
  for (int c : counts) CHECK(c == 1);
}

TEST_CASE("sobol rejects more than 16 dimensions") {
  CHECK_THROWS_AS(local::sobol_points(4, 17), DimensionTooLarge);
  CHECK_NOTHROW(local::sobol_points(4, 16));
}

TEST_CASE("softmax weight of a dominant score") {
  std::vector<double> scores(20, -0.15);
  scores[0] = 3.0;
  const auto w = local::softmax_weights(scores);
  const double expected = std::exp(3.0) / (std::exp(3.0) + 19.0 * std::exp(-0.15));
  CHECK(w[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(w[0] == doctest::Approx(0.55).epsilon(0.01 / 0.55));
  double total = 0.0;
  for (double x : w) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // Large scores do not overflow.
  const auto big = local::softmax_weights(std::vector<double>{1000.0, 999.0});
  CHECK(big[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("sampling frequencies follow the softmax weights") {
  const std::vector<double> scores{1.2, -0.4, 0.3, 2.0, -1.5, 0.0};
  const auto w = local::softmax_weights(scores);
  Rng rng(2024);
  const int draws = 100000;
  std::vector<int> counts(scores.size(), 0);
  for (int i = 0; i < draws; ++i) ++counts[local::sample_index(w, rng)];
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double se = std::sqrt(w[i] * (1.0 - w[i]) / draws);
    CHECK(std::abs(counts[i] / static_cast<double>(draws) - w[i]) <= 3.0 * se);
  }
}

TEST_CASE("standardized scores negate and use the sample deviation") {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const auto s = local::standardized_scores(v);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(0.0));
  CHECK(s[2] == doctest::Approx(-1.0));
  CHECK(local::standardized_scores(std::vector<double>(20, 0.7)).empty());
}

TEST_CASE("flat acquisition gives a uniform informed start over the candidates") {
  Mat X(3, 1);
  X << 0.2, 0.5, 0.8;
  const auto model = fixtures::model_on_unit(X, vec({1.0, 1.0, 1.0}), vec({0.3}), 1.0);
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{0.0}, 1);
  const Mat cands = local::sobol_points(local::kInformedCandidates, 1);
  Rng rng(77);
  const int draws = 20000;
  std::vector<int> counts(local::kInformedCandidates, 0);
  for (int i = 0; i < draws; ++i) {
    const Vec x = local::informed_initial_point(ctx, rng);
    int hit = -1;
    for (int c = 0; c < local::kInformedCandidates; ++c)
      if (cands(c, 0) == x[0]) hit = c;
    REQUIRE(hit >= 0);
    ++counts[static_cast<std::size_t>(hit)];
  }
  const double se = std::sqrt(0.05 * 0.95 / draws);
  for (int c : counts) CHECK(std::abs(c / static_cast<double>(draws) - 0.05) <= 3.0 * se);
}

TEST_CASE("informed start is deterministic under a fixed seed") {
  const acq::AcquisitionContext ctx(fixtures::bimodal_1d(), acq::FixedKappa{fixtures::kBimodalKappa}, 1);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    Rng a(seed), b(seed);
    CHECK(local::informed_initial_point(ctx, a) == local::informed_initial_point(ctx, b));
  }
}

TEST_CASE("quasi-Newton on a convex quadratic") {
  for (int d = 1; d <= 4; ++d) {
    const local::Objective f = [](const Vec& x, Vec& g) {
      g = 2.0 * (x.array() - 0.3).matrix();
      return (x.array() - 0.3).square().sum();
    };
    const auto r = local::bounded_qn_minimize(f, Vec::Constant(d, 0.7));
    CHECK((r.x.array() - 0.3).abs().maxCoeff() < 1e-6);
    CHECK(r.value < 1e-10);
    CHECK(r.converged);
  }
}

TEST_CASE("quasi-Newton pins a linear objective at the lower vertex") {
  const local::Objective f = [](const Vec& x, Vec& g) {
    g = Vec::Ones(x.size());
    return x.sum();
  };
  const auto r = local::bounded_qn_minimize(f, Vec::Constant(3, 0.6));
  CHECK(r.x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.value == 0.0);
}

TEST_CASE("quasi-Newton reaches the projected optimum of random strictly convex quadratics") {
  Rng rng(31);
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 1 + rep % 4;
    Mat B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) B(i, j) = rng.normal();
    const Mat A = B * B.transpose() + 0.5 * Mat::Identity(d, d);
    Vec c(d);
    for (int i = 0; i < d; ++i) c[i] = rng.uniform(-0.5, 1.5);
    const auto value = [&](const Vec& x) { return 0.5 * (x - c).dot(A * (x - c)); };
    const local::Objective f = [&](const Vec& x, Vec& g) {
      g = A * (x - c);
      return value(x);
    };
    // Oracle: projected gradient descent with step 1/L.
    const double L = Eigen::SelfAdjointEigenSolver<Mat>(A).eigenvalues().maxCoeff();
    Vec z = Vec::Constant(d, 0.5);
    for (int it = 0; it < 200000; ++it) z = (z - A * (z - c) / L).cwiseMax(0.0).cwiseMin(1.0);
    const auto r = local::bounded_qn_minimize(f, fixtures::random_point(rng, d));
    CHECK((r.x - z).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.iterations <= 50);
    CHECK(r.x.minCoeff() >= 0.0);
    CHECK(r.x.maxCoeff() <= 1.0);
  }
}

TEST_CASE("quasi-Newton never ends above its start") {
  Rng rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    const auto model = fixtures::random_model(rng, 1 + rep % 3, 6);
    const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 1);
    const Vec x0 = fixtures::random_point(rng, ctx.dims());
    const auto r = local::bounded_qn_minimize(lcb_objective(ctx), x0);
    CHECK(r.value <= ctx.value(x0));
    CHECK(std::abs(r.value - ctx.value(r.x)) <= 1e-12 * std::max(1.0, std::abs(r.value)));
  }
}

TEST_CASE("quasi-Newton stays in the basin of its start") {
  const acq::AcquisitionContext ctx(fixtures::bimodal_1d(), acq::FixedKappa{fixtures::kBimodalKappa}, 1);
  const Grid1d grid(ctx);
  const auto ridges = grid.ridges();
  REQUIRE(ridges.size() == 1);
  const auto [bx, bv] = grid.min_on(ridges[0], 1.0);
  const auto r = local::bounded_qn_minimize(lcb_objective(ctx), vec({0.7}));
  CHECK(std::abs(r.x[0] - bx) < 1e-4);
  CHECK(r.value <= bv + 1e-9);
}

TEST_CASE("ils matches the global grid oracle on a unimodal surface") {
  Mat X(3, 1);
  X << 0.3, 0.5, 0.7;
  const auto model = fixtures::model_on_unit(X, vec({0.0, -1.0, 0.0}), vec({0.6}), 1.0);
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{0.0}, 1);
  const Grid1d grid(ctx);
  REQUIRE(grid.ridges().empty());
  const auto [bx, bv] = grid.min_on(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto r = local::ils_minimize(ctx, rng);
    CHECK(std::abs(r.x[0] - bx) < 1e-4);
    CHECK(std::abs(r.value - bv) < 1e-4);
  }
}

TEST_CASE("ils is deterministic under a fixed seed") {
  Rng rng0(3);
  const auto model = fixtures::random_model(rng0, 2, 7);
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 1);
  Rng a(5), b(5);
  const auto ra = local::ils_minimize(ctx, a);
  const auto rb = local::ils_minimize(ctx, b);
  CHECK(ra.x == rb.x);
  CHECK(ra.value == rb.value);
  CHECK(ra.n_evals == rb.n_evals);
}

TEST_CASE("ils and ims on a bimodal surface") {
  const acq::AcquisitionContext ctx(fixtures::bimodal_1d(), acq::FixedKappa{fixtures::kBimodalKappa}, 1);
  const Grid1d grid(ctx);
  const double ridge = grid.ridges().at(0);
  const auto left = grid.min_on(0.0, ridge), right = grid.min_on(ridge, 1.0);
  const bool right_is_global = right.second < left.second;
  int ils_left = 0, ils_right = 0, ils_global = 0, ims_global = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a(seed);
    const auto r = local::ils_minimize(ctx, a);
    const bool on_right = r.x[0] > ridge;
    (on_right ? ils_right : ils_left)++;
    if (on_right == right_is_global) ++ils_global;
    Rng b(seed);
    const auto m = local::ims_minimize(ctx, b);
    if ((m.x[0] > ridge) == right_is_global) ++ims_global;
    CHECK(r.x[0] >= 0.0);
    CHECK(r.x[0] <= 1.0);
  }
  CHECK(ils_left > 0);
  CHECK(ils_right > 0);
  CHECK(ims_global >= ils_global);
}

TEST_CASE("ims with one restart is ils") {
  Rng rng0(8);
  const auto model = fixtures::random_model(rng0, 2, 6);
  const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 2);
  Rng a(11), b(11);
  const auto i = local::ils_minimize(ctx, a);
  const auto m = local::ims_minimize(ctx, b, 1);
  CHECK(i.x == m.x);
  CHECK(i.value == m.value);
  CHECK(a.next_u64() == b.next_u64());
  CHECK_THROWS_AS(local::ims_minimize(ctx, b, 0), Error);
}

TEST_CASE("ims is the best of its restarts on the shared stream") {
  Rng rng0(9);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = fixtures::random_model(rng0, 1 + rep % 3, 7);
    const acq::AcquisitionContext ctx(model, acq::FixedKappa{2.0}, 1);
    Rng shared(100 + rep), coupled(100 + rep);
    double best = std::numeric_limits<double>::infinity();
    Vec best_x;
    for (int r = 0; r < 5; ++r) {
      const auto s = local::ils_minimize(ctx, shared);
      if (s.value < best) {
        best = s.value;
        best_x = s.x;
      }
    }
    const auto m = local::ims_minimize(ctx, coupled, 5);
    CHECK(m.value == best);
    CHECK(m.x == best_x);
    Rng single(100 + rep);
    CHECK(m.value <= local::ils_minimize(ctx, single).value);
    CHECK(std::abs(m.value - ctx.value(m.x)) <= 1e-12 * std::max(1.0, std::abs(m.value)));
  }
}
