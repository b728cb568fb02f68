#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace bolab::global {

/// Closed interval [lo, hi]. Binary operators round outward by one ulp on
/// each side, so results always enclose the exact real-number result.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double v) { return {v, v}; }
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

inline double down(double v) { return std::nextafter(v, -std::numeric_limits<double>::infinity()); }
inline double up(double v) { return std::nextafter(v, std::numeric_limits<double>::infinity()); }

inline Interval outward(Interval a) { return {down(a.lo), up(a.hi)}; }

inline Interval operator+(Interval a, Interval b) { return {down(a.lo + b.lo), up(a.hi + b.hi)}; }
inline Interval operator-(Interval a, Interval b) { return {down(a.lo - b.hi), up(a.hi - b.lo)}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

inline Interval operator*(Interval a, Interval b) {
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {down(std::min({p1, p2, p3, p4})), up(std::max({p1, p2, p3, p4}))};
}

inline Interval operator*(double s, Interval a) {
  return s >= 0.0 ? Interval{down(s * a.lo), up(s * a.hi)} : Interval{down(s * a.hi), up(s * a.lo)};
}

inline Interval square(Interval a) {
  if (a.lo >= 0.0) return {down(a.lo * a.lo), up(a.hi * a.hi)};
  if (a.hi <= 0.0) return {down(a.hi * a.hi), up(a.lo * a.lo)};
  const double m = std::max(-a.lo, a.hi);
  return {0.0, up(m * m)};
}

/// sqrt of the non-negative part.
inline Interval sqrt(Interval a) {
  return {std::max(0.0, down(std::sqrt(std::max(0.0, a.lo)))), up(std::sqrt(std::max(0.0, a.hi)))};
}

inline Interval exp(Interval a) {
  return {std::max(0.0, down(down(std::exp(a.lo)))), up(up(std::exp(a.hi)))};
}

/// Intersection; falls back to the hull if rounding ever makes the two disjoint.
inline Interval intersect(Interval a, Interval b) {
  const Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  return r.lo <= r.hi ? r : Interval{std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace bolab::global
