#include "bolab/gkls.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bolab/errors.hpp"
#include "bolab/rng.hpp"

namespace bolab::bench {
namespace {

constexpr int kLayoutAttempts = 500;
constexpr int kPointAttempts = 2000;
constexpr int kRayDirections = 65;
constexpr int kRaySteps = 256;
constexpr std::array<double, 6> kCurvatureLadder{1.0, 0.5, 0.25, 2.0, 4.0, 0.1};

struct Quintic {
  double c2, alpha, beta, gamma;
};

// Quintic s -> f + c2 s^2 + alpha (s/rho)^3 + beta (s/rho)^4 + gamma (s/rho)^5 that
// meets the paraboloid with matching value, slope and curvature at s = rho along a
// ray whose direction has projection `a` onto T - M. `offset` = ||T - M||^2 + t - f.
Quintic pit_profile(double rho, double a, double offset, double c2) {
  const double r0 = rho * rho - 2.0 * rho * a + offset - c2 * rho * rho;
  const double r1 = rho * (2.0 * rho - 2.0 * a - 2.0 * c2 * rho);
  const double r2 = rho * rho * (2.0 - 2.0 * c2);
  return {c2, 10.0 * r0 - 4.0 * r1 + 0.5 * r2, -15.0 * r0 + 7.0 * r1 - r2,
          6.0 * r0 - 3.0 * r1 + 0.5 * r2};
}

double profile_value(const Quintic& q, double s, double rho) {
  const double u = s / rho;
  return q.c2 * s * s + u * u * u * (q.alpha + u * (q.beta + u * q.gamma));
}

double profile_slope(const Quintic& q, double s, double rho) {
  const double u = s / rho;
  return 2.0 * q.c2 * s + u * u * (3.0 * q.alpha + u * (4.0 * q.beta + 5.0 * q.gamma * u)) / rho;
}

// The pit stays above its minimum value and every ray profile rises then
// (possibly) falls, so the pit center is the only stationary minimum inside.
bool certify_pit(double rho, double dist_to_vertex, double offset, double c2) {
  for (int i = 0; i < kRayDirections; ++i) {
    const double a = dist_to_vertex * (-1.0 + 2.0 * i / (kRayDirections - 1));
    const Quintic q = pit_profile(rho, a, offset, c2);
    bool falling = false;
    for (int k = 1; k <= kRaySteps; ++k) {
      const double s = rho * k / kRaySteps;
      if (!(profile_value(q, s, rho) > 0.0)) return false;
      const double slope = profile_slope(q, s, rho);
      if (slope < -1e-12) falling = true;
      else if (falling && slope > 1e-12) return false;
    }
  }
  return true;
}

Vec uniform_point(int dims, double lo, double hi, Rng& rng) {
  Vec p(dims);
  for (int d = 0; d < dims; ++d) p[d] = rng.uniform(lo, hi);
  return p;
}

double distance_to_boundary(const Vec& p) { return (1.0 - p.cwiseAbs().array()).minCoeff(); }

bool try_layout(const GklsParams& P, Rng& rng, GklsInstance& out) {
  const int D = P.dims;
  out.vertex = uniform_point(D, -1.0, 1.0, rng);

  // Global minimizer at the prescribed distance, its ball inside the domain.
  Vec global;
  bool placed = false;
  for (int k = 0; k < kPointAttempts && !placed; ++k) {
    Vec dir(D);
    for (int d = 0; d < D; ++d) dir[d] = rng.normal();
    const double n = dir.norm();
    if (n < 1e-12) continue;
    global = out.vertex + (P.distance / n) * dir;
    placed = distance_to_boundary(global) >= P.radius;
  }
  if (!placed) return false;

  out.minimizers.assign(1, global);
  out.radii.assign(1, P.radius);
  out.values.assign(1, P.global_value);

  const double sep = 0.25 * P.radius;
  for (int i = 0; i < P.num_minima - 2; ++i) {
    placed = false;
    for (int k = 0; k < kPointAttempts && !placed; ++k) {
      const Vec p = uniform_point(D, -1.0 + sep, 1.0 - sep, rng);
      if ((p - out.vertex).norm() < sep) continue;
      if ((p - global).norm() < P.radius + sep) continue;
      bool clear = true;
      for (std::size_t j = 1; j < out.minimizers.size() && clear; ++j)
        clear = (p - out.minimizers[j]).norm() >= 2.0 * sep;
      if (!clear) continue;
      out.minimizers.push_back(p);
      placed = true;
    }
    if (!placed) return false;
  }

  const std::size_t n = out.minimizers.size();
  for (std::size_t i = 1; i < n; ++i) {
    const Vec& m = out.minimizers[i];
    double rho = std::min({(m - global).norm() - P.radius, 0.5 * (m - out.vertex).norm(),
                           distance_to_boundary(m)});
    for (std::size_t j = 1; j < n; ++j)
      if (j != i) rho = std::min(rho, 0.5 * (m - out.minimizers[j]).norm());
    out.radii.push_back(0.99 * rho);
  }

  // Local values sit below the paraboloid's minimum on their sphere and above the global value.
  for (std::size_t i = 1; i < n; ++i) {
    const double dv = (out.minimizers[i] - out.vertex).norm();
    const double rim = (dv - out.radii[i]) * (dv - out.radii[i]) + P.vertex_value;
    const double floor = P.global_value + 0.05 + 0.1 * rng.uniform();
    const double f = std::max(rim - rng.uniform(0.1, 0.5), floor);
    if (f >= rim - 1e-3) return false;
    out.values.push_back(f);
  }

  out.curvature.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const double dv = (out.minimizers[i] - out.vertex).norm();
    const double offset = dv * dv + P.vertex_value - out.values[i];
    bool ok = false;
    for (double c2 : kCurvatureLadder) {
      if (certify_pit(out.radii[i], dv, offset, c2)) {
        out.curvature.push_back(c2);
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

double GklsInstance::evaluate(const Vec& x) const {
  const Vec tv = x - vertex;
  for (std::size_t i = 0; i < minimizers.size(); ++i) {
    const Vec dx = x - minimizers[i];
    const double s = dx.norm();
    if (s >= radii[i]) continue;
    if (s == 0.0) return values[i];
    const Vec v = vertex - minimizers[i];
    const double a = dx.dot(v) / s;
    const double offset = v.squaredNorm() + params.vertex_value - values[i];
    return values[i] + profile_value(pit_profile(radii[i], a, offset, curvature[i]), s, radii[i]);
  }
  return tv.squaredNorm() + params.vertex_value;
}

GklsInstance gkls_generate(const GklsParams& params) {
  if (params.dims < 1) throw InfeasibleGeometry("gkls: dims must be >= 1");
  if (!(params.radius > 0.0 && params.radius < params.distance))
    throw InfeasibleGeometry("gkls: need 0 < radius < distance");
  if (params.num_minima < 2) throw InfeasibleGeometry("gkls: need at least 2 minima");
  if (!(params.global_value < params.vertex_value))
    throw InfeasibleGeometry("gkls: global value must lie below the vertex value");

  Rng rng(mix64(params.seed ^ 0x474b4c53ULL));
  for (int attempt = 0; attempt < kLayoutAttempts; ++attempt) {
    GklsInstance inst;
    inst.params = params;
    if (try_layout(params, rng, inst)) return inst;
  }
  throw InfeasibleGeometry("gkls: no admissible layout within the retry budget");
}

}  // namespace bolab::bench
