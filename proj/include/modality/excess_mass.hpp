#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "modality/dip.hpp"
#include "modality/rng.hpp"
#include "modality/sample.hpp"

namespace modality {

//! The excess mass statistic Delta_{n,k+1} together with the maximizing
//! level and the optimal interval families for k and k+1 intervals.
struct ExcessMassResult {
  double statistic = 0.0;
  int k = 1;
  double lambda_star = 0.0;
  std::vector<std::pair<double, double>> intervals_k;
  std::vector<std::pair<double, double>> intervals_k1;
  bool exact = true;
};

namespace detail {

// One optimal configuration of <= k intervals at a fixed level: its total
// empirical mass, total length, and the index intervals themselves.
struct EmConfig {
  double mass = 0.0;
  double length = 0.0;
  std::vector<std::pair<int, int>> intervals;  // inclusive data-index pairs
  double value(double lambda) const { return mass - lambda * length; }
};

// Maximum of sum(P_n(C) - lambda |C|) over <= k disjoint closed intervals
// with endpoints at data points. The inner maximisation collapses to a
// running prefix maximum:
//   gain(i, j) = (j-i+1)/n - lambda (x_j - x_i) = u_j - v_i
// so each of the k passes over the data is linear. Value-only variant.
inline double excess_mass_value(std::span<const double> x, int k, double lambda) {
  const int n = static_cast<int>(x.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> prev(n + 1, 0.0), cur(n + 1, 0.0);
  for (int m = 1; m <= k; ++m) {
    double run = -std::numeric_limits<double>::infinity();
    cur[0] = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double vj = (j - 1) * inv_n - lambda * x[j - 1];
      const double uj = j * inv_n - lambda * x[j - 1];
      const double cand = prev[j - 1] - vj;
      if (cand > run) run = cand;
      cur[j] = cur[j - 1];
      const double take = uj + run;
      if (take > cur[j]) cur[j] = take;
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

// Same recursion with choice tracking, returning one optimal family.
// Ties prefer skipping an interval and, within the prefix maximum, the
// earliest start index; the result is deterministic.
inline EmConfig excess_mass_config(std::span<const double> x, int k, double lambda) {
  const int n = static_cast<int>(x.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> prev(n + 1, 0.0), cur(n + 1, 0.0);
  std::vector<std::vector<int>> start(k + 1, std::vector<int>(n + 1, 0));
  for (int m = 1; m <= k; ++m) {
    double run = -std::numeric_limits<double>::infinity();
    int run_arg = 0;
    cur[0] = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double vj = (j - 1) * inv_n - lambda * x[j - 1];
      const double uj = j * inv_n - lambda * x[j - 1];
      const double cand = prev[j - 1] - vj;
      if (cand > run) {
        run = cand;
        run_arg = j;
      }
      cur[j] = cur[j - 1];
      start[m][j] = 0;  // 0 = skip
      const double take = uj + run;
      if (take > cur[j]) {
        cur[j] = take;
        start[m][j] = run_arg;
      }
    }
    std::swap(prev, cur);
  }
  EmConfig cfg;
  int m = k, j = n;
  while (m > 0 && j > 0) {
    if (start[m][j] == 0) {
      --j;
    } else {
      const int i = start[m][j];
      cfg.intervals.emplace_back(i - 1, j - 1);
      cfg.mass += static_cast<double>(j - i + 1) * inv_n;
      cfg.length += x[j - 1] - x[i - 1];
      j = i - 1;
      --m;
    }
  }
  std::reverse(cfg.intervals.begin(), cfg.intervals.end());
  return cfg;
}

// Level beyond which only zero-length intervals are optimal, so the
// excess mass function is flat from here on: any positive-length interval
// spans at least the smallest gap, and the mass it adds over the best
// zero-length interval inside it is below 1; past 1/min_gap the length
// penalty always wins.
inline double lambda_upper_bound(std::span<const double> x) {
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double g = x[i] - x[i - 1];
    if (g > 0.0 && g < min_gap) min_gap = g;
  }
  if (!std::isfinite(min_gap))
    throw std::domain_error("excess_mass: all values identical");
  return 1.5 / min_gap;
}

// All levels at which the optimal <= k interval family changes, by
// recursive subdivision: the excess mass function is the upper envelope
// of finitely many affine functions of lambda, so between two levels with
// the same active configuration no breakpoint can hide.
inline void envelope_breakpoints_rec(std::span<const double> x, int k, double la,
                                     const EmConfig& ca, double lb, const EmConfig& cb,
                                     int depth, std::vector<double>& out) {
  if (depth > 64) return;
  const bool same = ca.mass == cb.mass && std::fabs(ca.length - cb.length) <=
                                              1e-12 * (1.0 + std::fabs(ca.length));
  if (same) return;
  if (ca.length == cb.length) return;  // parallel lines: tie, no true crossing
  const double lc = (ca.mass - cb.mass) / (ca.length - cb.length);
  const double guard = 1e-14 * (1.0 + std::fabs(la) + std::fabs(lb));
  if (!(lc > la + guard) || !(lc < lb - guard)) return;
  const EmConfig cc = excess_mass_config(x, k, lc);
  const double v_line = ca.value(lc);
  if (cc.value(lc) <= v_line + 1e-12 * (1.0 + std::fabs(v_line))) {
    out.push_back(lc);
    return;
  }
  envelope_breakpoints_rec(x, k, la, ca, lc, cc, depth + 1, out);
  envelope_breakpoints_rec(x, k, lc, cc, lb, cb, depth + 1, out);
}

inline std::vector<double> envelope_breakpoints(std::span<const double> x, int k,
                                                double lambda_max) {
  std::vector<double> out;
  const EmConfig c0 = excess_mass_config(x, k, 0.0);
  const EmConfig c1 = excess_mass_config(x, k, lambda_max);
  envelope_breakpoints_rec(x, k, 0.0, c0, lambda_max, c1, 0, out);
  return out;
}

// Exact Delta_{n,k+1} by scanning the union of the breakpoint sets of the
// two envelopes; the difference of two piecewise-linear convex functions
// attains its maximum at one of them. Ties go to the smaller level.
inline std::pair<double, double> excess_mass_sweep(std::span<const double> x, int k) {
  const double lam_max = lambda_upper_bound(x);
  std::vector<double> cand{0.0, lam_max};
  for (double l : envelope_breakpoints(x, k + 1, lam_max)) cand.push_back(l);
  for (double l : envelope_breakpoints(x, k, lam_max)) cand.push_back(l);
  std::sort(cand.begin(), cand.end());
  double best = -1.0, best_lambda = 0.0;
  for (double l : cand) {
    const double d = excess_mass_value(x, k + 1, l) - excess_mass_value(x, k, l);
    if (d > best) {
      best = d;
      best_lambda = l;
    }
  }
  return {best, best_lambda};
}

inline std::vector<std::pair<double, double>> to_value_intervals(
    std::span<const double> x, const EmConfig& cfg) {
  std::vector<std::pair<double, double>> out;
  out.reserve(cfg.intervals.size());
  for (auto [i, j] : cfg.intervals) out.emplace_back(x[i], x[j]);
  return out;
}

inline void check_no_ties(const Sample& s) {
  if (s.has_tied_values())
    throw std::invalid_argument("excess_mass: tied values present, perturb the sample first");
}

}  // namespace detail

//! Empirical excess mass for k intervals at a fixed level: the maximal
//! probability mass exceeding the level that <= k disjoint closed
//! intervals with data-point endpoints can capture.
inline std::pair<double, std::vector<std::pair<double, double>>> empirical_excess_mass(
    const Sample& s, int k, double lambda) {
  if (k < 1) throw std::invalid_argument("empirical_excess_mass: k must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("empirical_excess_mass: lambda must be >= 0");
  detail::check_no_ties(s);
  const auto cfg = detail::excess_mass_config(s.values(), k, lambda);
  return {cfg.value(lambda), detail::to_value_intervals(s.values(), cfg)};
}

//! Exact Delta_{n,k+1} via the level sweep, valid for tied data as well;
//! used as the cross-check route against the k = 1 dip fast path.
inline double excess_mass_delta_sweep(const Sample& s, int k) {
  if (k < 1) throw std::invalid_argument("excess_mass_delta_sweep: k must be >= 1");
  return detail::excess_mass_sweep(s.values(), k).first;
}

//! The excess mass test statistic Delta_{n,k+1} for testing "exactly k
//! modes", exact. For k = 1 the statistic is twice the dip.
inline ExcessMassResult excess_mass_statistic(const Sample& s, int k) {
  if (k < 1) throw std::invalid_argument("excess_mass_statistic: k must be >= 1");
  detail::check_no_ties(s);
  const auto x = s.values();
  auto [delta, lambda_star] = detail::excess_mass_sweep(x, k);
  ExcessMassResult r;
  r.k = k;
  r.exact = true;
  r.lambda_star = lambda_star;
  r.statistic = (k == 1) ? 2.0 * dip_statistic(x) : delta;
  r.intervals_k = detail::to_value_intervals(x, detail::excess_mass_config(x, k, lambda_star));
  r.intervals_k1 =
      detail::to_value_intervals(x, detail::excess_mass_config(x, k + 1, lambda_star));
  return r;
}

//! Two-step approximation of the excess mass statistic. Step one scans
//! candidate levels built from a reduced set of endpoint candidates (g1
//! of them) plus the levels where the one-interval excess mass changes;
//! step two evaluates the exact difference on a g2-point grid around the
//! step-one maximizer. Never exceeds the exact statistic.
inline ExcessMassResult excess_mass_approx(const Sample& s, int k,
                                           std::pair<int, int> gridsize) {
  const auto [g1, g2] = gridsize;
  if (g1 < 2 || g2 < 2)
    throw std::invalid_argument("excess_mass_approx: both grid sizes must be >= 2");
  if (k < 2) throw std::invalid_argument("excess_mass_approx: use the exact route for k = 1");
  detail::check_no_ties(s);
  const auto x = s.values();
  const int n = static_cast<int>(x.size());
  const double lam_max = detail::lambda_upper_bound(x);

  // step 1: candidate levels from the thinned endpoint set and from the
  // one-interval excess mass function on the full data
  std::vector<double> sub;
  const int m1 = std::min(g1, n);
  sub.reserve(static_cast<std::size_t>(m1));
  for (int t = 0; t < m1; ++t) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(t) * (n - 1) / static_cast<double>(m1 - 1)));
    sub.push_back(x[idx]);
  }
  sub.erase(std::unique(sub.begin(), sub.end()), sub.end());

  std::vector<double> cand{0.0, lam_max};
  for (double l : detail::envelope_breakpoints(sub, k + 1, lam_max)) cand.push_back(l);
  for (double l : detail::envelope_breakpoints(sub, k, lam_max)) cand.push_back(l);
  for (double l : detail::envelope_breakpoints(x, 1, lam_max)) cand.push_back(l);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  double best1 = -1.0;
  std::size_t best1_at = 0;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const double d = detail::excess_mass_value(x, k + 1, cand[i]) -
                     detail::excess_mass_value(x, k, cand[i]);
    if (d > best1) {
      best1 = d;
      best1_at = i;
    }
  }

  // step 2: exact differences on a grid spanning the neighbourhood of the
  // step-one maximizer (its adjacent candidate levels)
  const double lo = best1_at == 0 ? 0.0 : cand[best1_at - 1];
  const double hi = best1_at + 1 < cand.size() ? cand[best1_at + 1] : lam_max;
  std::vector<double> grid;
  grid.push_back(cand[best1_at]);
  for (int t = 0; t < g2; ++t)
    grid.push_back(lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(g2 - 1));
  std::sort(grid.begin(), grid.end());

  double best = -1.0, best_lambda = 0.0;
  for (double l : grid) {
    const double d = detail::excess_mass_value(x, k + 1, l) -
                     detail::excess_mass_value(x, k, l);
    if (d > best) {
      best = d;
      best_lambda = l;
    }
  }

  ExcessMassResult r;
  r.k = k;
  r.exact = false;
  r.statistic = best;
  r.lambda_star = best_lambda;
  r.intervals_k = detail::to_value_intervals(x, detail::excess_mass_config(x, k, best_lambda));
  r.intervals_k1 =
      detail::to_value_intervals(x, detail::excess_mass_config(x, k + 1, best_lambda));
  return r;
}

//! Tie-breaking perturbation: when values or consecutive gaps are tied,
//! adds uniform noise of half the smallest positive gap on either side,
//! redrawing until all values are distinct. No-op for tie-free samples.
inline Sample perturb_sample(const Sample& s, RngStream& rng) {
  if (!s.has_tied_values() && !s.has_tied_gaps()) return s;
  const double d = s.min_positive_gap();
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> v(s.values().begin(), s.values().end());
    for (double& val : v) val += rng.uniform(-0.5 * d, 0.5 * d);
    Sample out = Sample::from_values(std::move(v), s.support());
    if (!out.has_tied_values()) return out;
  }
  throw std::runtime_error("perturb_sample: could not break ties");
}

}  // namespace modality
