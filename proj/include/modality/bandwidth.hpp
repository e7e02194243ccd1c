#pragma once

#include <cmath>
#include <stdexcept>

#include "modality/kde.hpp"
#include "modality/sample.hpp"

namespace modality {

//! A critical bandwidth: the smallest h at which the kernel estimate has
//! at most mod0 modes (inside the support, when one is given), located by
//! bisection. `value` is the feasible end of the final bracket, so the
//! estimate at `value` always has at most mod0 modes.
struct CriticalBandwidth {
  double value = 0.0;
  int mod0 = 1;
  Interval support = Interval::unbounded();
  double tol = 1e-5;
  int grid_size = 1 << 15;
  bool lower_bound_hit = false;  // mod0 not reachable: even the smallest h qualifies
  int iterations = 0;
};

namespace detail {

inline CriticalBandwidth critical_bandwidth_impl(const Sample& s, int k, int grid_size,
                                                 double tol, const Interval& region) {
  s.require_n(2);
  if (k < 1) throw std::invalid_argument("critical_bandwidth: mod0 must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("critical_bandwidth: tol must be positive");
  const double range = s.range();
  if (!(range > 0.0)) throw std::domain_error("critical_bandwidth: degenerate sample");

  CriticalBandwidth out;
  out.mod0 = k;
  out.support = region;
  out.tol = tol;
  out.grid_size = grid_size;

  auto feasible = [&](double h) { return count_modes(s, h, grid_size, region) <= k; };

  double h_lo = 2.0 * range / static_cast<double>(grid_size);
  double h_hi = range;
  if (feasible(h_lo)) {
    out.value = h_lo;
    out.lower_bound_hit = true;
    return out;
  }
  while (!feasible(h_hi)) {
    h_lo = h_hi;
    h_hi *= 2.0;
    ++out.iterations;
    if (!std::isfinite(h_hi)) throw std::runtime_error("critical_bandwidth: no unimodal bandwidth found");
  }
  while (h_hi - h_lo > tol) {
    const double mid = 0.5 * (h_lo + h_hi);
    if (feasible(mid))
      h_hi = mid;
    else
      h_lo = mid;
    ++out.iterations;
  }
  out.value = h_hi;
  return out;
}

}  // namespace detail

//! Smallest bandwidth with at most k modes over the whole support.
inline CriticalBandwidth critical_bandwidth(const Sample& s, int k, int grid_size = 1 << 15,
                                            double tol = 1e-5) {
  return detail::critical_bandwidth_impl(s, k, grid_size, tol, s.support());
}

//! Smallest bandwidth with at most k modes inside a finite interval;
//! modes outside the interval are ignored.
inline CriticalBandwidth constrained_critical_bandwidth(const Sample& s, int k,
                                                        const Interval& interval,
                                                        int grid_size = 1 << 15,
                                                        double tol = 1e-5) {
  if (!interval.finite())
    throw std::invalid_argument("constrained_critical_bandwidth: interval must be finite");
  if (interval.hi < s.min() || interval.lo > s.max())
    throw std::invalid_argument("constrained_critical_bandwidth: interval disjoint from data range");
  return detail::critical_bandwidth_impl(s, k, grid_size, tol, interval);
}

//! Level-correction factor for the interval-restricted bandwidth test,
//! a fixed rational polynomial in the significance level.
inline double lambda_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw std::domain_error("lambda_alpha: alpha must lie in (0, 0.5]");
  const double num = ((0.94029 * alpha - 1.59914) * alpha + 0.17695) * alpha + 0.48971;
  const double den = ((alpha - 1.77793) * alpha + 0.36162) * alpha + 0.42423;
  return num / den;
}

}  // namespace modality
