#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "modality/gauss.hpp"
#include "modality/rng.hpp"
#include "modality/sample.hpp"

namespace modality {

enum class GridKind { density, derivative, cdf };

//! A kernel estimate (density, derivative or distribution function)
//! evaluated on an equispaced grid at a single bandwidth.
struct DensityGrid {
  std::vector<double> x;
  std::vector<double> y;
  double h = 0.0;
  GridKind kind = GridKind::density;

  double spacing() const { return (x.back() - x.front()) / static_cast<double>(x.size() - 1); }

  //! Trapezoid integral of y over the grid.
  double trapezoid() const {
    double s = 0.0;
    for (std::size_t j = 1; j < x.size(); ++j)
      s += 0.5 * (y[j] + y[j - 1]) * (x[j] - x[j - 1]);
    return s;
  }
};

//! Alternating mode/antimode locations at one bandwidth. Odd positions
//! (1-based) are modes, even positions antimodes; k modes give 2k-1 entries.
struct ExtremaSet {
  std::vector<double> locations;
  std::vector<double> fvalues;
  double h = 0.0;

  std::size_t mode_count() const { return (locations.size() + 1) / 2; }
  std::vector<double> modes() const {
    std::vector<double> m;
    for (std::size_t i = 0; i < locations.size(); i += 2) m.push_back(locations[i]);
    return m;
  }
  std::vector<double> antimodes() const {
    std::vector<double> a;
    for (std::size_t i = 1; i < locations.size(); i += 2) a.push_back(locations[i]);
    return a;
  }
};

namespace detail {

// Window half-width in kernel standard deviations. exp(-u^2/2) underflows
// to exactly zero just below this, so truncating here never steps over a
// nonzero value; a shorter window would cut tails mid-overlap and the
// resulting jump can fabricate grid modes between quantised data spikes.
inline constexpr double kernel_cutoff = 39.0;

// Accumulates exp(-u^2/2) terms over an equispaced grid for every data
// point, sweeping outward from the grid cell nearest the point. Each
// step costs two multiplies instead of an exp() call:
//   E(u + d) = E(u) * s(u),  s(u) = exp(-u d - d^2/2),  s(u + d) = s(u) q
// with q = exp(-d^2) constant. acc(j, u, e) receives e = exp(-u^2/2).
template <class Acc>
void sweep_kernel(std::span<const double> data, double lo, double dx,
                  std::size_t m, double h, Acc&& acc) {
  const double inv_h = 1.0 / h;
  const double d = dx * inv_h;
  const double q = std::exp(-d * d);
  for (double xi : data) {
    const auto j0 = static_cast<std::ptrdiff_t>(
        std::clamp(std::llround((xi - lo) / dx), 0ll, static_cast<long long>(m - 1)));
    const double u0 = (lo + static_cast<double>(j0) * dx - xi) * inv_h;
    const double e0 = std::exp(-0.5 * u0 * u0);
    if (std::fabs(u0) <= kernel_cutoff) acc(static_cast<std::size_t>(j0), u0, e0);
    // rightward
    {
      double e = e0, s = std::exp(-u0 * d - 0.5 * d * d), u = u0;
      for (std::ptrdiff_t j = j0 + 1; j < static_cast<std::ptrdiff_t>(m); ++j) {
        e *= s;
        s *= q;
        u += d;
        if (u > kernel_cutoff || e == 0.0) break;
        acc(static_cast<std::size_t>(j), u, e);
      }
    }
    // leftward
    {
      double e = e0, s = std::exp(u0 * d - 0.5 * d * d), u = u0;
      for (std::ptrdiff_t j = j0 - 1; j >= 0; --j) {
        e *= s;
        s *= q;
        u -= d;
        if (u < -kernel_cutoff || e == 0.0) break;
        acc(static_cast<std::size_t>(j), u, e);
      }
    }
  }
}

inline std::vector<double> make_grid(double lo, double hi, std::size_t m) {
  std::vector<double> x(m);
  const double dx = (hi - lo) / static_cast<double>(m - 1);
  for (std::size_t j = 0; j < m; ++j) x[j] = lo + static_cast<double>(j) * dx;
  x.back() = hi;
  return x;
}

// Grid range: data range padded by 3h, clipped to the support.
inline std::pair<double, double> grid_range(const Sample& s, double h, const Interval& support) {
  double lo = std::max(s.min() - 3.0 * h, support.lo);
  double hi = std::min(s.max() + 3.0 * h, support.hi);
  if (!(lo < hi)) throw std::invalid_argument("kde: support excludes the padded data range");
  return {lo, hi};
}

inline void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("kde: bandwidth must be positive");
}
inline void check_grid_size(int m) {
  if (m < 32) throw std::invalid_argument("kde: grid size must be at least 32");
}

// One extremum of a grid scan: a maximal plateau of equal values spanning
// cells [first, last], strictly above (below) its neighbours.
struct GridExtremum {
  std::size_t first = 0, last = 0;
  bool is_max = false;
};

// Strict interior extrema of a grid sequence. A run of machine-equal
// values counts as a single extremum; runs touching the grid boundary
// are not extrema.
inline std::vector<GridExtremum> grid_extrema(std::span<const double> y) {
  std::vector<GridExtremum> out;
  const std::size_t m = y.size();
  if (m < 3) return out;
  int prev_sign = 0;              // sign of the last nonzero difference
  std::size_t prev_idx = 0;       // index where that difference ended
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double diff = y[j + 1] - y[j];
    if (diff == 0.0) continue;
    const int sign = diff > 0.0 ? 1 : -1;
    if (prev_sign != 0 && sign != prev_sign)
      out.push_back({prev_idx, j, prev_sign > 0});
    prev_sign = sign;
    prev_idx = j + 1;
  }
  return out;
}

}  // namespace detail

//! Kernel estimate on an explicit range [lo, hi] with m grid points.
inline DensityGrid evaluate_on_range(const Sample& s, double h, double lo, double hi,
                                     int grid_size, GridKind kind = GridKind::density) {
  detail::check_bandwidth(h);
  detail::check_grid_size(grid_size);
  if (!(lo < hi)) throw std::invalid_argument("kde: empty evaluation range");
  const auto m = static_cast<std::size_t>(grid_size);
  DensityGrid g;
  g.x = detail::make_grid(lo, hi, m);
  g.y.assign(m, 0.0);
  g.h = h;
  g.kind = kind;
  const double dx = (hi - lo) / static_cast<double>(m - 1);
  const double n = static_cast<double>(s.size());
  switch (kind) {
    case GridKind::density: {
      double* y = g.y.data();
      detail::sweep_kernel(s.values(), lo, dx, m, h,
                           [y](std::size_t j, double, double e) { y[j] += e; });
      const double scale = inv_sqrt_2pi / (n * h);
      for (double& v : g.y) v *= scale;
      break;
    }
    case GridKind::derivative: {
      double* y = g.y.data();
      detail::sweep_kernel(s.values(), lo, dx, m, h,
                           [y](std::size_t j, double u, double e) { y[j] -= u * e; });
      const double scale = inv_sqrt_2pi / (n * h * h);
      for (double& v : g.y) v *= scale;
      break;
    }
    case GridKind::cdf: {
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (double xi : s.values()) acc += norm_cdf((g.x[j] - xi) / h);
        g.y[j] = acc / n;
      }
      break;
    }
  }
  return g;
}

//! Gaussian kernel density estimate on the data range padded by 3h and
//! clipped to the given support.
inline DensityGrid evaluate_density(const Sample& s, double h, int grid_size,
                                    const Interval& support) {
  detail::check_bandwidth(h);
  auto [lo, hi] = detail::grid_range(s, h, support);
  return evaluate_on_range(s, h, lo, hi, grid_size, GridKind::density);
}
inline DensityGrid evaluate_density(const Sample& s, double h, int grid_size) {
  return evaluate_density(s, h, grid_size, s.support());
}

//! First derivative of the kernel density estimate, same grid rule.
inline DensityGrid evaluate_derivative(const Sample& s, double h, int grid_size,
                                       const Interval& support) {
  detail::check_bandwidth(h);
  auto [lo, hi] = detail::grid_range(s, h, support);
  return evaluate_on_range(s, h, lo, hi, grid_size, GridKind::derivative);
}
inline DensityGrid evaluate_derivative(const Sample& s, double h, int grid_size) {
  return evaluate_derivative(s, h, grid_size, s.support());
}

//! Pointwise kernel density value.
inline double density_at(const Sample& s, double h, double x) {
  detail::check_bandwidth(h);
  double acc = 0.0;
  for (double xi : s.values()) {
    const double u = (x - xi) / h;
    if (std::fabs(u) <= detail::kernel_cutoff) acc += std::exp(-0.5 * u * u);
  }
  return acc * inv_sqrt_2pi / (static_cast<double>(s.size()) * h);
}

//! Pointwise kernel density derivative.
inline double derivative_at(const Sample& s, double h, double x) {
  detail::check_bandwidth(h);
  double acc = 0.0;
  for (double xi : s.values()) {
    const double u = (x - xi) / h;
    if (std::fabs(u) <= detail::kernel_cutoff) acc -= u * std::exp(-0.5 * u * u);
  }
  return acc * inv_sqrt_2pi / (static_cast<double>(s.size()) * h * h);
}

//! Kernel distribution function estimate, closed form for the Gaussian
//! kernel: (1/n) sum Phi((x - X_i)/h).
inline double cdf_at(const Sample& s, double h, double x) {
  detail::check_bandwidth(h);
  double acc = 0.0;
  for (double xi : s.values()) acc += norm_cdf((x - xi) / h);
  return acc / static_cast<double>(s.size());
}

inline DensityGrid evaluate_cdf(const Sample& s, double h, int grid_size,
                                const Interval& support) {
  detail::check_bandwidth(h);
  auto [lo, hi] = detail::grid_range(s, h, support);
  return evaluate_on_range(s, h, lo, hi, grid_size, GridKind::cdf);
}
inline DensityGrid evaluate_cdf(const Sample& s, double h, int grid_size) {
  return evaluate_cdf(s, h, grid_size, s.support());
}

//! Number of strict local maxima of the grid-evaluated density inside
//! the given region (data range padded by 3h, clipped to the region).
inline int count_modes(const Sample& s, double h, int grid_size, const Interval& region) {
  detail::check_bandwidth(h);
  detail::check_grid_size(grid_size);
  double lo, hi;
  try {
    std::tie(lo, hi) = detail::grid_range(s, h, region);
  } catch (const std::invalid_argument&) {
    return 0;  // region does not meet the padded data range
  }
  const auto m = static_cast<std::size_t>(grid_size);
  std::vector<double> y(m, 0.0);
  const double dx = (hi - lo) / static_cast<double>(m - 1);
  double* yp = y.data();
  detail::sweep_kernel(s.values(), lo, dx, m, h,
                       [yp](std::size_t j, double, double e) { yp[j] += e; });
  int count = 0;
  for (const auto& e : detail::grid_extrema(y))
    if (e.is_max) ++count;
  return count;
}
inline int count_modes(const Sample& s, double h, int grid_size = 1 << 15) {
  return count_modes(s, h, grid_size, s.support());
}

//! Locates modes and antimodes: grid extrema refined by golden-section
//! search on the continuous estimate within the bracketing cells.
inline ExtremaSet locate_extrema(const Sample& s, double h, int grid_size,
                                 const Interval& region) {
  detail::check_bandwidth(h);
  detail::check_grid_size(grid_size);
  auto [lo, hi] = detail::grid_range(s, h, region);
  const auto m = static_cast<std::size_t>(grid_size);
  DensityGrid g = evaluate_on_range(s, h, lo, hi, grid_size, GridKind::density);
  const double dx = g.spacing();
  const double tol = dx * 1e-3;
  constexpr double inv_phi = 0.6180339887498948482;

  ExtremaSet out;
  out.h = h;
  auto refine = [&](double a, double b, bool is_max) {
    // golden-section search for the extremum of the smooth estimate
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = density_at(s, h, x1), f2 = density_at(s, h, x2);
    while (b - a > tol) {
      const bool keep_left = is_max ? (f1 > f2) : (f1 < f2);
      if (keep_left) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = density_at(s, h, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = density_at(s, h, x2);
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<std::pair<double, bool>> refined;  // (location, is_max)
  for (const auto& e : detail::grid_extrema(g.y)) {
    const double a = g.x[e.first == 0 ? 0 : e.first - 1];
    const double b = g.x[std::min(e.last + 1, m - 1)];
    refined.emplace_back(refine(a, b, e.is_max), e.is_max);
  }
  // trim to an alternating sequence that starts and ends with a mode
  std::size_t first = 0, last = refined.size();
  while (first < last && !refined[first].second) ++first;
  while (last > first && !refined[last - 1].second) --last;
  for (std::size_t i = first; i < last; ++i) {
    out.locations.push_back(refined[i].first);
    out.fvalues.push_back(density_at(s, h, refined[i].first));
  }
  return out;
}
inline ExtremaSet locate_extrema(const Sample& s, double h, int grid_size = 1 << 15) {
  return locate_extrema(s, h, grid_size, s.support());
}

//! Normal-reference bandwidth, 0.9 min(sd, IQR/1.34) n^(-1/5).
inline double rule_of_thumb_bandwidth(const Sample& s) {
  s.require_n(2);
  const double sd = s.stddev();
  const double iqr = s.iqr();
  double spread = std::min(sd, iqr / 1.34);
  if (spread == 0.0) spread = sd;
  if (!(spread > 0.0)) throw std::domain_error("rule_of_thumb_bandwidth: degenerate sample");
  return 0.9 * spread * std::pow(static_cast<double>(s.size()), -0.2);
}

//! Smooth bootstrap: each draw is X_J + h eps with J uniform on the data
//! and eps standard normal; h = 0 gives the plain resample. When a
//! truncation interval is supplied, draws are rejected until they fall
//! inside it (sampling from the estimate conditioned on the interval).
inline Sample smooth_bootstrap(const Sample& s, double h, std::size_t size, RngStream& rng,
                               const Interval& truncate = Interval::unbounded()) {
  if (h < 0.0 || !std::isfinite(h)) throw std::invalid_argument("smooth_bootstrap: h must be >= 0");
  if (size < 1) throw std::invalid_argument("smooth_bootstrap: size must be >= 1");
  std::vector<double> out;
  out.reserve(size);
  const auto data = s.values();
  long misses = 0;
  while (out.size() < size) {
    double v = data[rng.uniform_index(data.size())];
    if (h > 0.0) v += h * rng.normal();
    if (!truncate.contains(v)) {
      if (++misses > 50'000'000l)
        throw std::runtime_error("smooth_bootstrap: truncation region has negligible mass");
      continue;
    }
    out.push_back(v);
  }
  return Sample::from_values(std::move(out), s.support());
}

}  // namespace modality
