#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace modality {

//! Closed interval on the real line; either bound may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval unbounded() { return {}; }
  static Interval closed(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
      throw std::invalid_argument("Interval: requires lo < hi");
    return {lo, hi};
  }

  bool lower_finite() const { return std::isfinite(lo); }
  bool upper_finite() const { return std::isfinite(hi); }
  bool finite() const { return lower_finite() && upper_finite(); }
  bool is_unbounded() const { return !lower_finite() && !upper_finite(); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }

  Interval intersect(const Interval& other) const {
    Interval r{std::max(lo, other.lo), std::min(hi, other.hi)};
    if (!(r.lo < r.hi)) throw std::invalid_argument("Interval: empty intersection");
    return r;
  }
};

//! An immutable, sorted univariate sample with optional support bounds.
class Sample {
 public:
  Sample() = default;

  static Sample from_values(std::vector<double> values,
                            Interval support = Interval::unbounded()) {
    if (values.empty()) throw std::invalid_argument("Sample: empty data");
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("Sample: non-finite value");
    std::sort(values.begin(), values.end());
    return Sample(std::move(values), support);
  }

  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const Interval& support() const { return support_; }

  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double range() const { return max() - min(); }
  double mean() const { return mean_; }

  //! Sample variance with the n-1 divisor.
  double variance() const {
    require_n(2);
    double ss = 0.0;
    for (double v : values_) ss += (v - mean_) * (v - mean_);
    return ss / static_cast<double>(size() - 1);
  }
  double stddev() const { return std::sqrt(variance()); }

  //! Quantile with linear interpolation between order statistics
  //! (the convention used by most statistical software, "type 7").
  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
    const double idx = p * static_cast<double>(size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    if (lo + 1 >= size()) return values_.back();
    const double frac = idx - static_cast<double>(lo);
    return values_[lo] + frac * (values_[lo + 1] - values_[lo]);
  }
  double iqr() const { return quantile(0.75) - quantile(0.25); }

  bool has_tied_values() const {
    return std::adjacent_find(values_.begin(), values_.end()) != values_.end();
  }

  //! Smallest positive gap between consecutive order statistics.
  double min_positive_gap() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < size(); ++i) {
      const double g = values_[i] - values_[i - 1];
      if (g > 0.0 && g < d) d = g;
    }
    if (!std::isfinite(d))
      throw std::domain_error("Sample: all values identical, no positive gap");
    return d;
  }

  //! True when two consecutive gaps coincide (or values are tied).
  bool has_tied_gaps() const {
    if (size() < 3) return has_tied_values();
    std::vector<double> gaps;
    gaps.reserve(size() - 1);
    for (std::size_t i = 1; i < size(); ++i) gaps.push_back(values_[i] - values_[i - 1]);
    std::sort(gaps.begin(), gaps.end());
    return std::adjacent_find(gaps.begin(), gaps.end()) != gaps.end();
  }

  void require_n(std::size_t n_min) const {
    if (size() < n_min) throw std::invalid_argument("Sample: too few observations");
  }

 private:
  Sample(std::vector<double> sorted, Interval support)
      : values_(std::move(sorted)), support_(support) {
    if (support_.finite() && !(support_.lo < support_.hi))
      throw std::invalid_argument("Sample: invalid support");
    double s = 0.0;
    for (double v : values_) s += v;
    mean_ = s / static_cast<double>(values_.size());
  }

  std::vector<double> values_;
  Interval support_;
  double mean_ = 0.0;
};

}  // namespace modality
