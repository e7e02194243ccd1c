#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "modality/bandwidth.hpp"
#include "modality/gauss.hpp"
#include "modality/kde.hpp"
#include "modality/parallel.hpp"
#include "modality/rng.hpp"
#include "modality/sample.hpp"

namespace modality {

//! How the bandwidth axis of an exploratory map is built: a (lower,
//! upper) range filled geometrically, critical bandwidths for two mode
//! counts, or an explicit list. With none of them set, the default range
//! runs from twice the density grid spacing up to the data range.
struct BandwidthSpec {
  std::optional<std::pair<double, double>> range;
  std::optional<std::pair<int, int>> cbw_modes;
  std::vector<double> explicit_values;
};

//! Bandwidths of an exploratory map, strictly decreasing from the top of
//! the display to the bottom.
struct BandwidthGrid {
  std::vector<double> values;
  bool log10_display = false;

  std::size_t size() const { return values.size(); }
};

inline BandwidthGrid make_bandwidth_grid(const Sample& s, const BandwidthSpec& spec,
                                         int count, int density_grid_size,
                                         bool log10_display = false) {
  BandwidthGrid g;
  g.log10_display = log10_display;
  if (!spec.explicit_values.empty()) {
    if (spec.explicit_values.size() < 2)
      throw std::invalid_argument("bandwidths: need at least two values");
    g.values = spec.explicit_values;
    for (double h : g.values)
      if (!(h > 0.0)) throw std::invalid_argument("bandwidths: values must be positive");
    std::sort(g.values.begin(), g.values.end(), std::greater<>());
    if (std::adjacent_find(g.values.begin(), g.values.end()) != g.values.end())
      throw std::invalid_argument("bandwidths: values must be distinct");
    return g;
  }
  if (count < 2) throw std::invalid_argument("bandwidths: grid needs at least two rows");
  double lo, hi;
  if (spec.cbw_modes) {
    const auto [k_top, k_bottom] = *spec.cbw_modes;
    if (!(k_top < k_bottom))
      throw std::invalid_argument("bandwidths: the first mode count must be the smaller one");
    hi = critical_bandwidth(s, k_top).value;
    lo = critical_bandwidth(s, k_bottom).value;
  } else if (spec.range) {
    std::tie(lo, hi) = *spec.range;
  } else {
    lo = 2.0 * s.range() / static_cast<double>(density_grid_size - 1);
    hi = s.range();
  }
  if (!(lo > 0.0) || !(lo < hi))
    throw std::invalid_argument("bandwidths: invalid range");
  g.values.resize(static_cast<std::size_t>(count));
  const double ratio = lo / hi;
  for (int t = 0; t < count; ++t)
    g.values[static_cast<std::size_t>(t)] =
        hi * std::pow(ratio, static_cast<double>(t) / static_cast<double>(count - 1));
  g.values.front() = hi;
  g.values.back() = lo;
  return g;
}

//! One recorded split: a coarse-level mode whose neighbourhood holds two
//! or more modes at the next finer bandwidth.
struct ModeSplit {
  double bandwidth = 0.0;       // the finer bandwidth where the children appear
  double parent_location = 0.0; // mode location at the coarser bandwidth
  std::vector<double> child_locations;
};

//! Mode locations across bandwidths with the split structure.
struct ModeTree {
  BandwidthGrid bandwidths;
  std::vector<std::vector<double>> traces;  // sorted mode locations per bandwidth
  std::vector<ModeSplit> splits;
};

//! Nearest-location parent assignment between adjacent bandwidth levels;
//! ties resolve to the left parent.
inline std::size_t nearest_index(const std::vector<double>& xs, double x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = std::fabs(xs[i] - x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline ModeTree mode_tree(const Sample& s, const BandwidthSpec& spec,
                          std::pair<int, int> gridsize = {512, 151},
                          bool log10_display = false) {
  const auto [m_density, m_bw] = gridsize;
  ModeTree tree;
  tree.bandwidths = make_bandwidth_grid(s, spec, m_bw, m_density, log10_display);
  tree.traces.reserve(tree.bandwidths.size());
  for (double h : tree.bandwidths.values)
    tree.traces.push_back(locate_extrema(s, h, m_density).modes());
  for (std::size_t level = 1; level < tree.traces.size(); ++level) {
    const auto& coarse = tree.traces[level - 1];
    const auto& fine = tree.traces[level];
    if (fine.size() <= coarse.size() || coarse.empty()) continue;
    std::vector<std::vector<double>> children(coarse.size());
    for (double m : fine) children[nearest_index(coarse, m)].push_back(m);
    for (std::size_t p = 0; p < coarse.size(); ++p)
      if (children[p].size() >= 2)
        tree.splits.push_back({tree.bandwidths.values[level], coarse[p], children[p]});
  }
  return tree;
}

//! Follows one root mode from the coarsest bandwidth downward, always
//! stepping to the nearest mode at the next level. The returned vector
//! has one location per bandwidth level.
inline std::vector<double> follow_trace(const ModeTree& tree, std::size_t root) {
  std::vector<double> out;
  if (tree.traces.empty() || root >= tree.traces.front().size()) return out;
  double loc = tree.traces.front()[root];
  out.push_back(loc);
  for (std::size_t level = 1; level < tree.traces.size(); ++level) {
    const auto& row = tree.traces[level];
    if (row.empty()) break;
    loc = row[nearest_index(row, loc)];
    out.push_back(loc);
  }
  return out;
}

//! Bootstrap-aggregated mode tree: the percentage of the B+1 trees (the
//! original plus B resamples drawn with replacement) whose mode falls in
//! each location-bandwidth pixel.
struct ModeForest {
  std::vector<double> matrix;  // row-major, bandwidth rows over location columns
  int m_x = 0, m_bw = 0;
  std::pair<double, double> range_x;
  BandwidthGrid range_bws;

  double at(int bw_row, int x_col) const {
    return matrix[static_cast<std::size_t>(bw_row) * static_cast<std::size_t>(m_x) +
                  static_cast<std::size_t>(x_col)];
  }
};

inline ModeForest mode_forest(const Sample& s, const BandwidthSpec& spec,
                              std::pair<int, int> gridsize, int B, int density_grid_size,
                              std::uint64_t seed, int threads = 1,
                              std::optional<std::pair<double, double>> from_to = std::nullopt,
                              bool log10_display = false) {
  if (B < 0) throw std::invalid_argument("mode_forest: B must be >= 0");
  const auto [m_x, m_bw] = gridsize;
  if (m_x < 2) throw std::invalid_argument("mode_forest: location grid too small");
  ModeForest f;
  f.m_x = m_x;
  f.m_bw = m_bw;
  f.range_bws = make_bandwidth_grid(s, spec, m_bw, density_grid_size, log10_display);
  f.range_x = from_to.value_or(std::pair{s.min(), s.max()});
  const auto [from, to] = f.range_x;
  if (!(from < to)) throw std::invalid_argument("mode_forest: empty location range");
  const double bin = (to - from) / static_cast<double>(m_x);

  const int trees = B + 1;
  // each tree's pixel hits go to a private slot; binning happens after
  std::vector<std::vector<std::pair<int, int>>> pixels(static_cast<std::size_t>(trees));
  parallel_for(trees, threads, [&](int b) {
    Sample tree_sample = s;
    if (b > 0) {
      RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(b));
      tree_sample = smooth_bootstrap(s, 0.0, s.size(), rng);
    }
    auto& hits = pixels[static_cast<std::size_t>(b)];
    for (std::size_t row = 0; row < f.range_bws.size(); ++row) {
      const auto modes =
          locate_extrema(tree_sample, f.range_bws.values[row], density_grid_size).modes();
      for (double m : modes) {
        if (m < from || m > to) continue;
        auto col = static_cast<int>((m - from) / bin);
        if (col >= m_x) col = m_x - 1;
        hits.emplace_back(static_cast<int>(row), col);
      }
    }
  });
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(m_x) * static_cast<std::size_t>(m_bw), 0);
  for (const auto& hits : pixels)
    for (const auto& [row, col] : hits)
      ++counts[static_cast<std::size_t>(row) * static_cast<std::size_t>(m_x) +
               static_cast<std::size_t>(col)];
  f.matrix.assign(counts.size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i)
    f.matrix[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(trees);
  return f;
}

//! Significance map of the smoothed derivative over location-bandwidth
//! pixels. States: 1 significantly decreasing, 2 not significant,
//! 3 significantly increasing, 4 too little data (methods 2-4).
struct SiZerMap {
  std::vector<std::uint8_t> sizer;  // row-major, bandwidth rows over location columns
  std::vector<double> lower_ci, estimate, upper_ci, ess;
  int m_x = 0, m_bw = 0;
  std::pair<double, double> range_x;
  BandwidthGrid range_bws;
  int method = 1;
  double alpha = 0.05;
  double n0 = 5.0;

  std::size_t idx(int bw_row, int x_col) const {
    return static_cast<std::size_t>(bw_row) * static_cast<std::size_t>(m_x) +
           static_cast<std::size_t>(x_col);
  }
  int state(int bw_row, int x_col) const { return sizer[idx(bw_row, x_col)]; }
};

//! Effective sample size: kernel-weighted count of data near x.
inline double ess(const Sample& s, double x, double h) {
  detail::check_bandwidth(h);
  double acc = 0.0;
  for (double xi : s.values()) {
    const double u = (x - xi) / h;
    if (std::fabs(u) <= detail::kernel_cutoff) acc += std::exp(-0.5 * u * u);
  }
  return acc;
}

namespace detail {

// Per-row raw sums for the derivative statistics: a0 = sum e, a1 = sum
// (-u) e, a2 = sum u^2 e^2, with e = exp(-u^2/2).
struct SizerRow {
  std::vector<double> a0, a1, a2;
};

inline SizerRow sizer_row_sums(std::span<const double> data, double from, double to, int m_x,
                               double h) {
  SizerRow r;
  r.a0.assign(static_cast<std::size_t>(m_x), 0.0);
  r.a1.assign(static_cast<std::size_t>(m_x), 0.0);
  r.a2.assign(static_cast<std::size_t>(m_x), 0.0);
  const double dx = (to - from) / static_cast<double>(m_x - 1);
  double* a0 = r.a0.data();
  double* a1 = r.a1.data();
  double* a2 = r.a2.data();
  sweep_kernel(data, from, dx, static_cast<std::size_t>(m_x), h,
               [a0, a1, a2](std::size_t j, double u, double e) {
                 a0[j] += e;
                 a1[j] -= u * e;
                 a2[j] += u * u * e * e;
               });
  return r;
}

// R-convention ("type 7") empirical quantile with linear interpolation.
inline double quantile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double idx = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(idx);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (idx - lo) * (v[lo + 1] - v[lo]);
}

}  // namespace detail

inline SiZerMap sizer(const Sample& s, int method, const BandwidthSpec& spec,
                      std::pair<int, int> gridsize, double alpha, int B, double n0,
                      std::uint64_t seed, int threads = 1,
                      std::optional<std::pair<double, double>> from_to = std::nullopt,
                      bool log10_display = true, bool ess_average_all = false) {
  if (method < 1 || method > 4) throw std::invalid_argument("sizer: method must be 1..4");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("sizer: alpha must lie in (0,1)");
  if (method >= 2 && !(n0 >= 1.0)) throw std::invalid_argument("sizer: n0 must be >= 1");
  if (method >= 3 && B < 1) throw std::invalid_argument("sizer: bootstrap methods need B >= 1");
  const auto [m_x, m_bw] = gridsize;
  if (m_x < 2) throw std::invalid_argument("sizer: location grid too small");

  SiZerMap map;
  map.method = method;
  map.alpha = alpha;
  map.n0 = n0;
  map.m_x = m_x;
  map.m_bw = m_bw;
  map.range_bws = make_bandwidth_grid(s, spec, m_bw, 512, log10_display);
  map.range_x = from_to.value_or(std::pair{s.min(), s.max()});
  const auto [from, to] = map.range_x;
  if (!(from < to)) throw std::invalid_argument("sizer: empty location range");

  const auto rows = static_cast<std::size_t>(m_bw);
  const auto cols = static_cast<std::size_t>(m_x);
  const double n = static_cast<double>(s.size());
  map.estimate.assign(rows * cols, 0.0);
  map.lower_ci.assign(rows * cols, 0.0);
  map.upper_ci.assign(rows * cols, 0.0);
  map.ess.assign(rows * cols, 0.0);
  map.sizer.assign(rows * cols, 2);

  // base statistics per pixel
  std::vector<double> sd(rows * cols, 0.0);
  for (std::size_t row = 0; row < rows; ++row) {
    const double h = map.range_bws.values[row];
    const auto sums = detail::sizer_row_sums(s.values(), from, to, m_x, h);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = row * cols + c;
      map.ess[i] = sums.a0[c];
      // derivative estimate and its standard deviation from the kernel sums
      const double mean_w = sums.a1[c] / n;  // mean of phi'(u)/c over the data
      map.estimate[i] = inv_sqrt_2pi * sums.a1[c] / (n * h * h);
      const double ss = sums.a2[c] - n * mean_w * mean_w;
      const double s2 = ss > 0.0 ? ss / (n - 1.0) : 0.0;
      sd[i] = inv_sqrt_2pi * std::sqrt(s2 / n) / (h * h);
    }
  }

  // quantile per row (methods 1-3) or one global quantile (method 4)
  std::vector<double> q(rows, norm_quantile(1.0 - alpha / 2.0));
  if (method == 2) {
    for (std::size_t row = 0; row < rows; ++row) {
      double acc = 0.0;
      int used = 0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double e = map.ess[row * cols + c];
        if (ess_average_all || e >= n0) {
          acc += e;
          ++used;
        }
      }
      if (used == 0) continue;  // fully gated row, quantile irrelevant
      const double m_h = n / (acc / static_cast<double>(used));
      q[row] = norm_quantile(0.5 * (1.0 + std::pow(1.0 - alpha, 1.0 / m_h)));
    }
  } else if (method >= 3) {
    // bootstrap deviations Z = (deriv* - deriv) / sd on ungated pixels
    std::vector<std::vector<double>> row_max(static_cast<std::size_t>(B),
                                             std::vector<double>(rows, 0.0));
    parallel_for(B, threads, [&](int b) {
      RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(b) + 1);
      std::vector<double> boot(s.size());
      const auto data = s.values();
      for (auto& v : boot) v = data[rng.uniform_index(data.size())];
      std::sort(boot.begin(), boot.end());
      for (std::size_t row = 0; row < rows; ++row) {
        const double h = map.range_bws.values[row];
        const auto sums = detail::sizer_row_sums(boot, from, to, m_x, h);
        double worst = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = row * cols + c;
          if (map.ess[i] < n0) continue;
          if (!(sd[i] > 0.0)) continue;
          const double deriv_star = inv_sqrt_2pi * sums.a1[c] / (n * h * h);
          worst = std::max(worst, std::fabs(deriv_star - map.estimate[i]) / sd[i]);
        }
        row_max[static_cast<std::size_t>(b)][row] = worst;
      }
    });
    if (method == 3) {
      for (std::size_t row = 0; row < rows; ++row) {
        std::vector<double> v(static_cast<std::size_t>(B));
        for (int b = 0; b < B; ++b) v[static_cast<std::size_t>(b)] = row_max[static_cast<std::size_t>(b)][row];
        q[row] = detail::quantile_type7(std::move(v), 1.0 - alpha / 2.0);
      }
    } else {
      std::vector<double> v(static_cast<std::size_t>(B));
      for (int b = 0; b < B; ++b)
        v[static_cast<std::size_t>(b)] =
            *std::max_element(row_max[static_cast<std::size_t>(b)].begin(),
                              row_max[static_cast<std::size_t>(b)].end());
      const double q4 = detail::quantile_type7(std::move(v), 1.0 - alpha / 2.0);
      std::fill(q.begin(), q.end(), q4);
    }
  }

  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = row * cols + c;
      map.lower_ci[i] = map.estimate[i] - q[row] * sd[i];
      map.upper_ci[i] = map.estimate[i] + q[row] * sd[i];
      if (method >= 2 && map.ess[i] < n0)
        map.sizer[i] = 4;
      else if (map.lower_ci[i] > 0.0)
        map.sizer[i] = 3;
      else if (map.upper_ci[i] < 0.0)
        map.sizer[i] = 1;
      else
        map.sizer[i] = 2;
    }
  }
  return map;
}

}  // namespace modality
