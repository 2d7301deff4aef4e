#pragma once

#include <algorithm>
#include <cmath>

namespace pushgne {

/// Closed interval [lo, hi] with the usual enclosure arithmetic. Used to
/// bound oracle outputs over box domains; no outward rounding, so results
/// are tight to within a few ulps.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT(implicit)
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  double magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

  friend Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
  friend Interval operator-(Interval a, Interval b) { return {a.lo - b.hi, a.hi - b.lo}; }
  friend Interval operator-(Interval a) { return {-a.hi, -a.lo}; }
  friend Interval operator*(Interval a, Interval b) {
    const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
  }
};

/// x^2 enclosure, tighter than x * x when the interval straddles zero.
inline Interval square(Interval a) {
  if (a.lo >= 0) return {a.lo * a.lo, a.hi * a.hi};
  if (a.hi <= 0) return {a.hi * a.hi, a.lo * a.lo};
  return {0.0, std::max(a.lo * a.lo, a.hi * a.hi)};
}

}  // namespace pushgne
