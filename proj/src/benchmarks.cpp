#include "bolab/benchmarks.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

#include "bolab/errors.hpp"

namespace bolab::bench {
namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

void require_dims(const Vec& x, Eigen::Index d, const char* name) {
  if (x.size() != d) throw Error(std::string(name) + ": wrong input dimension");
}

}  // namespace

double mueller_brown(const Vec& x) {
  require_dims(x, 2, "mueller_brown");
  static const MuellerBrownCoefficients k;
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double dx = x[0] - k.w1[i];
    const double dy = x[1] - k.w2[i];
    total += k.A[i] * std::exp(k.a[i] * dx * dx + k.b[i] * dx * dy + k.c[i] * dy * dy);
  }
  return total;
}

double camelback(const Vec& x) {
  require_dims(x, 2, "camelback");
  const double a = x[0] * x[0];
  const double b = x[1] * x[1];
  return (4.0 - 2.1 * a + a * a / 3.0) * a + x[0] * x[1] + (-4.0 + 4.0 * b) * b;
}

double ackley3(const Vec& x) {
  require_dims(x, 3, "ackley3");
  const double n = 3.0;
  double sq = 0.0, cs = 0.0;
  for (int i = 0; i < 3; ++i) {
    sq += x[i] * x[i];
    cs += std::cos(2.0 * std::numbers::pi * x[i]);
  }
  return 20.0 * (1.0 - std::exp(-0.2 * std::sqrt(sq / n))) + (std::numbers::e - std::exp(cs / n));
}

double hartmann4(const Vec& x) {
  require_dims(x, 4, "hartmann4");
  static constexpr double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static constexpr double A[4][4] = {
      {10.0, 3.0, 17.0, 3.5}, {0.05, 10.0, 17.0, 0.1}, {3.0, 3.5, 1.7, 10.0}, {17.0, 8.0, 0.05, 10.0}};
  static constexpr double P[4][4] = {{0.1312, 0.1696, 0.5569, 0.0124},
                                     {0.2329, 0.4135, 0.8307, 0.3736},
                                     {0.2348, 0.1451, 0.3522, 0.2883},
                                     {0.4047, 0.8828, 0.8732, 0.5743}};
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 4; ++j) inner += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    total -= alpha[i] * std::exp(-inner);
  }
  return total;
}

const std::vector<std::string>& benchmark_ids() {
  static const std::vector<std::string> ids{"mueller-brown", "camelback-2d", "ackley-3d",
                                            "hartmann-4d",   "gkls-2d",      "gkls-3d",
                                            "gkls-4d"};
  return ids;
}

int benchmark_dims(std::string_view id) {
  if (id == "mueller-brown" || id == "camelback-2d" || id == "gkls-2d") return 2;
  if (id == "ackley-3d" || id == "gkls-3d") return 3;
  if (id == "hartmann-4d" || id == "gkls-4d") return 4;
  throw Error("unknown benchmark id '" + std::string(id) + "'");
}

GklsParams gkls_preset(int dims, std::uint64_t seed) {
  GklsParams p;
  p.dims = dims;
  p.num_minima = 10;
  p.seed = seed;
  switch (dims) {
    case 2: p.distance = 0.90; p.radius = 0.40; break;
    case 3: p.distance = 0.66; p.radius = 0.30; break;
    case 4: p.distance = 0.66; p.radius = 0.20; break;
    default: throw Error("gkls: preset dimension must be 2, 3 or 4");
  }
  return p;
}

BenchmarkHandle make_benchmark(std::string_view id, const BenchmarkOptions& options) {
  BenchmarkHandle h;
  h.id = std::string(id);
  if (id == "mueller-brown") {
    h.evaluate = mueller_brown;
    h.box = SearchBox(vec({-1.5, -0.5}), vec({1.0, 2.0}));
    h.minimizers = {vec({-0.5582236598668683, 1.4417258167943847})};
    h.success_tol = 0.5;
  } else if (id == "camelback-2d") {
    h.evaluate = camelback;
    h.box = SearchBox(vec({-3.0, -2.0}), vec({3.0, 2.0}));
    h.minimizers = {vec({0.08984200678905811, -0.712656410015068}),
                    vec({-0.08984200678905811, 0.712656410015068})};
    h.success_tol = 0.05;
  } else if (id == "ackley-3d") {
    h.evaluate = ackley3;
    h.box = SearchBox(Vec::Constant(3, -5.0), Vec::Constant(3, 5.0));
    h.minimizers = {Vec::Zero(3)};
    h.success_tol = 0.05;
  } else if (id == "hartmann-4d") {
    h.evaluate = hartmann4;
    h.box = SearchBox(Vec::Zero(4), Vec::Ones(4));
    h.minimizers = {vec({0.1873952692836812, 0.1941515229773333, 0.5579177759445932, 0.2647796166064702})};
    h.success_tol = 0.01;
  } else if (id == "gkls-2d" || id == "gkls-3d" || id == "gkls-4d") {
    const int dims = id[5] - '0';
    GklsParams p = gkls_preset(dims, options.gkls_seed);
    p.vertex_value = options.gkls_vertex_value;
    auto inst = std::make_shared<const GklsInstance>(gkls_generate(p));
    h.evaluate = [inst](const Vec& x) { return inst->evaluate(x); };
    h.box = SearchBox(Vec::Constant(dims, -1.0), Vec::Constant(dims, 1.0));
    h.minimizers = {inst->global_minimizer()};
    h.success_tol = dims == 2 ? 0.05 : dims == 3 ? 0.02 : 0.01;
  } else {
    throw Error("unknown benchmark id '" + std::string(id) + "'");
  }
  h.f_star = h.evaluate(h.minimizers.front());
  for (const Vec& m : h.minimizers) h.f_star = std::min(h.f_star, h.evaluate(m));
  if (options.success_tol) h.success_tol = *options.success_tol;
  return h;
}

ReferenceOptimum reference_optimum(std::string_view id, const BenchmarkOptions& options) {
  return make_benchmark(id, options).reference();
}

Mat latin_hypercube(int n, const SearchBox& box, Rng& rng) {
  if (n < 1) throw Error("latin_hypercube: n must be >= 1");
  const Eigen::Index D = box.dims();
  Mat out(n, D);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (Eigen::Index d = 0; d < D; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const double lo = box.lower[d];
    const double width = box.upper[d] - box.lower[d];
    for (int i = 0; i < n; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / n;
      out(i, d) = std::min(box.upper[d], lo + u * width);
    }
  }
  return out;
}

}  // namespace bolab::bench
