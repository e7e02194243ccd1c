#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modality/bandwidth.hpp"
#include "modality/dip.hpp"
#include "modality/excess_mass.hpp"
#include "modality/kde.hpp"
#include "modality/parallel.hpp"
#include "modality/rng.hpp"
#include "modality/sample.hpp"

namespace modality {

enum class TestMethod { SI, HY, FM, HH, ACR };

inline const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::SI: return "SI";
    case TestMethod::HY: return "HY";
    case TestMethod::FM: return "FM";
    case TestMethod::HH: return "HH";
    case TestMethod::ACR: return "ACR";
  }
  return "?";
}

//! Outcome of a bootstrap or Monte Carlo calibrated test of
//! H0: "the density has exactly mod0 modes".
struct ModeTestResult {
  TestMethod method = TestMethod::SI;
  int submethod = 0;  // 0 when the method has no submethods
  int mod0 = 1;
  double statistic = 0.0;
  double p_value = 1.0;
  int B = 0;
  std::uint64_t seed = 0;
  std::optional<Interval> support;
  std::optional<double> alpha;
  int nMC = 0, BMC = 0;
  int grid_size = 0;
  double tol = 0.0, tol2 = 0.0;
  bool perturbed = false;
  std::string note;
};

//! Common knobs shared by the resampling tests.
struct TestOptions {
  int B = 500;
  int grid_size = 1 << 10;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  int threads = 1;
};

namespace detail {

inline void check_B(int B) {
  if (B < 1) throw std::invalid_argument("modetest: B must be >= 1");
}

inline double proportion(const std::vector<char>& hits, int B) {
  long c = 0;
  for (char h : hits) c += h;
  return static_cast<double>(c) / static_cast<double>(B);
}

// Cramer-von Mises distance between the kernel distribution estimate and
// the sample's own order statistics.
inline double cvm_statistic(const Sample& s, double h) {
  const auto x = s.values();
  const double n = static_cast<double>(x.size());
  double t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = cdf_at(s, h, x[i]) - (2.0 * static_cast<double>(i + 1) - 1.0) / (2.0 * n);
    t += d * d;
  }
  return t + 1.0 / (12.0 * n);
}

// Gaussian pseudo-sample with the moments of the observed one.
inline Sample normal_resample(const Sample& s, RngStream& rng) {
  std::vector<double> v;
  v.reserve(s.size());
  const double mean = s.mean(), sd = s.stddev();
  for (std::size_t i = 0; i < s.size(); ++i) v.push_back(mean + sd * rng.normal());
  return Sample::from_values(std::move(v));
}

// Smallest grid level at which the rejection rule fires; 1 when none does.
template <class Reject>
double smallest_rejection_level(Reject&& reject) {
  for (int t = 1; t <= 500; ++t) {
    const double alpha = static_cast<double>(t) / 1000.0;
    if (reject(alpha)) return alpha;
  }
  return 1.0;
}

// Trapezoid mass of the kernel estimate over an interval, grid-refined
// until consecutive refinements agree within tol2.
inline double integrate_density_over(const Sample& s, double h, const Interval& I, double tol2) {
  double prev = -1.0;
  for (int m = 1 << 10; m <= (1 << 17); m *= 2) {
    const DensityGrid g = evaluate_on_range(s, h, I.lo, I.hi, m);
    const double mass = g.trapezoid();
    if (prev >= 0.0 && std::fabs(mass - prev) < tol2) return mass;
    prev = mass;
  }
  return prev;
}

}  // namespace detail

//! Critical-bandwidth test: the statistic is h_k and each bootstrap
//! replicate counts the modes of its kernel estimate at h_k; submethod 1
//! shrinks the smooth-bootstrap draws back to the sample variance
//! (centered at the sample mean), submethod 2 uses the raw draws.
//! `uncentered` applies the plain multiplicative shrink instead.
inline ModeTestResult test_silverman(const Sample& s, int k, const TestOptions& opt,
                                     int submethod = 1, bool uncentered = false) {
  detail::check_B(opt.B);
  if (submethod != 1 && submethod != 2)
    throw std::invalid_argument("test_silverman: submethod must be 1 or 2");
  const auto cbw = critical_bandwidth(s, k, opt.grid_size, opt.tol);
  const double h = cbw.value;
  const double shrink = 1.0 / std::sqrt(1.0 + h * h / s.variance());
  const double mean = s.mean();
  const auto n = s.size();

  std::vector<char> exceeds(static_cast<std::size_t>(opt.B), 0);
  parallel_for(opt.B, opt.threads, [&](int b) {
    RngStream rng = RngStream::substream(opt.seed, static_cast<std::uint64_t>(b) + 1);
    Sample star = smooth_bootstrap(s, h, n, rng);
    if (submethod == 1) {
      std::vector<double> y(star.values().begin(), star.values().end());
      for (double& v : y) v = uncentered ? shrink * v : mean + shrink * (v - mean);
      star = Sample::from_values(std::move(y));
    }
    exceeds[static_cast<std::size_t>(b)] = count_modes(star, h, opt.grid_size) > k;
  });

  ModeTestResult r;
  r.method = TestMethod::SI;
  r.submethod = submethod;
  r.mod0 = k;
  r.statistic = h;
  r.p_value = detail::proportion(exceeds, opt.B);
  r.B = opt.B;
  r.seed = opt.seed;
  r.grid_size = opt.grid_size;
  r.tol = opt.tol;
  if (uncentered) r.note = "uncentered rescaling";
  return r;
}

//! Interval-restricted bandwidth test of unimodality. The statistic is
//! the smallest bandwidth with one mode inside I. Replicate bandwidths
//! shrink relative to the observed one, so rejection at level alpha uses
//! the corrected threshold lambda(alpha): reject when the proportion of
//! replicate ratios above it falls below alpha. Submethod 1 takes
//! lambda(alpha) from the fixed rational approximation; submethod 2
//! calibrates it with Gaussian Monte Carlo samples (nMC of them, BMC
//! bootstrap replicates each). The reported p-value is the smallest
//! level on the grid 0.001..0.5 at which the test rejects (1 if none).
inline ModeTestResult test_hall_york(const Sample& s, const Interval& I, const TestOptions& opt,
                                     int submethod = 1, double alpha = 0.05, int nMC = 100,
                                     int BMC = 100) {
  detail::check_B(opt.B);
  if (!I.finite()) throw std::invalid_argument("test_hall_york: support interval must be finite");
  if (submethod != 1 && submethod != 2)
    throw std::invalid_argument("test_hall_york: submethod must be 1 or 2");
  const auto cbw = constrained_critical_bandwidth(s, 1, I, opt.grid_size, opt.tol);
  const double h = cbw.value;
  const auto n = s.size();

  std::vector<double> ratio(static_cast<std::size_t>(opt.B), 0.0);
  parallel_for(opt.B, opt.threads, [&](int b) {
    RngStream rng = RngStream::substream(opt.seed, static_cast<std::uint64_t>(b) + 1);
    const Sample star = smooth_bootstrap(s, h, n, rng);
    ratio[static_cast<std::size_t>(b)] =
        constrained_critical_bandwidth(star, 1, I, opt.grid_size, opt.tol).value / h;
  });
  std::sort(ratio.begin(), ratio.end());
  auto frac_above = [&](double lam) {
    const auto it = std::upper_bound(ratio.begin(), ratio.end(), lam);
    return static_cast<double>(ratio.end() - it) / static_cast<double>(opt.B);
  };

  ModeTestResult r;
  r.method = TestMethod::HY;
  r.submethod = submethod;
  r.mod0 = 1;
  r.statistic = h;
  r.B = opt.B;
  r.seed = opt.seed;
  r.support = I;
  r.grid_size = opt.grid_size;
  r.tol = opt.tol;

  if (submethod == 1) {
    if (!(alpha > 0.0 && alpha <= 0.5))
      throw std::invalid_argument("test_hall_york: alpha must lie in (0, 0.5]");
    r.alpha = alpha;
    r.p_value = detail::smallest_rejection_level(
        [&](double a) { return frac_above(lambda_alpha(a)) < a; });
    return r;
  }

  // submethod 2: Monte Carlo calibration of the correction factor
  if (nMC < 1 || BMC < 1) throw std::invalid_argument("test_hall_york: nMC and BMC must be >= 1");
  r.nMC = nMC;
  r.BMC = BMC;
  std::vector<std::vector<double>> mc(static_cast<std::size_t>(nMC));
  parallel_for(nMC, opt.threads, [&](int j) {
    const std::uint64_t seed_j = RngStream::derive(opt.seed, (1ull << 20) + static_cast<std::uint64_t>(j));
    RngStream rng = RngStream::substream(seed_j, 0);
    const Sample normal = detail::normal_resample(s, rng);
    const double hj = constrained_critical_bandwidth(normal, 1, I, opt.grid_size, opt.tol).value;
    std::vector<double> rho(static_cast<std::size_t>(BMC));
    for (int b = 0; b < BMC; ++b) {
      RngStream rb = RngStream::substream(seed_j, static_cast<std::uint64_t>(b) + 1);
      const Sample star = smooth_bootstrap(normal, hj, n, rb);
      rho[static_cast<std::size_t>(b)] =
          constrained_critical_bandwidth(star, 1, I, opt.grid_size, opt.tol).value / hj;
    }
    std::sort(rho.begin(), rho.end());
    mc[static_cast<std::size_t>(j)] = std::move(rho);
  });

  // pooled candidate thresholds
  std::vector<double> pool;
  for (const auto& rho : mc) pool.insert(pool.end(), rho.begin(), rho.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  auto mc_reject_rate = [&](double lam, double a) {
    int rejections = 0;
    for (const auto& rho : mc) {
      const auto it = std::upper_bound(rho.begin(), rho.end(), lam);
      const double frac = static_cast<double>(rho.end() - it) / static_cast<double>(BMC);
      if (frac < a) ++rejections;
    }
    return static_cast<double>(rejections) / static_cast<double>(nMC);
  };
  auto lambda_for = [&](double a) {
    // the rejection rate grows with the threshold; take the largest pooled
    // threshold whose Monte Carlo rejection rate stays at the nominal level
    // or below, approaching the level from the conservative side
    std::size_t lo = 0, hi = pool.size();  // first index with rate > a
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (mc_reject_rate(pool[mid], a) > a)
        hi = mid;
      else
        lo = mid + 1;
    }
    if (lo == 0) return std::numeric_limits<double>::infinity();  // cannot calibrate
    return pool[lo - 1];
  };
  r.p_value = detail::smallest_rejection_level(
      [&](double a) { return frac_above(lambda_for(a)) < a; });
  return r;
}

//! Cramer-von Mises test at the critical bandwidth. Each replicate is
//! drawn from the estimate at h_k and evaluated at its own critical
//! bandwidth unless `fixed_bandwidth` keeps h_k throughout.
inline ModeTestResult test_fisher_marron(const Sample& s, int k, const TestOptions& opt,
                                         bool fixed_bandwidth = false) {
  detail::check_B(opt.B);
  const auto cbw = critical_bandwidth(s, k, opt.grid_size, opt.tol);
  const double h = cbw.value;
  const double t_obs = detail::cvm_statistic(s, h);
  const auto n = s.size();

  std::vector<char> geq(static_cast<std::size_t>(opt.B), 0);
  parallel_for(opt.B, opt.threads, [&](int b) {
    RngStream rng = RngStream::substream(opt.seed, static_cast<std::uint64_t>(b) + 1);
    const Sample star = smooth_bootstrap(s, h, n, rng);
    const double h_star =
        fixed_bandwidth ? h : critical_bandwidth(star, k, opt.grid_size, opt.tol).value;
    geq[static_cast<std::size_t>(b)] = detail::cvm_statistic(star, h_star) >= t_obs;
  });

  ModeTestResult r;
  r.method = TestMethod::FM;
  r.mod0 = k;
  r.statistic = t_obs;
  r.p_value = detail::proportion(geq, opt.B);
  r.B = opt.B;
  r.seed = opt.seed;
  r.grid_size = opt.grid_size;
  r.tol = opt.tol;
  if (fixed_bandwidth) r.note = "replicates evaluated at the observed critical bandwidth";
  return r;
}

//! Dip/excess-mass test of unimodality with Monte Carlo calibration from
//! the uniform distribution. The statistic is Delta_{n,2} = 2 dip.
inline ModeTestResult test_hartigan(const Sample& s, int B, std::uint64_t seed,
                                    int threads = 1) {
  detail::check_B(B);
  s.require_n(2);
  const double delta = 2.0 * dip_statistic(s.values());
  const auto n = s.size();

  std::vector<char> geq(static_cast<std::size_t>(B), 0);
  parallel_for(B, threads, [&](int b) {
    RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(b) + 1);
    std::vector<double> u(n);
    for (double& v : u) v = rng.uniform();
    std::sort(u.begin(), u.end());
    geq[static_cast<std::size_t>(b)] = 2.0 * dip_statistic(u) >= delta;
  });

  ModeTestResult r;
  r.method = TestMethod::HH;
  r.mod0 = 1;
  r.statistic = delta;
  r.p_value = detail::proportion(geq, B);
  r.B = B;
  r.seed = seed;
  return r;
}

//! Excess-mass test calibrated by resampling from the kernel estimate at
//! the critical bandwidth (the interval-restricted bandwidth when a
//! finite support is supplied, with draws conditioned on that interval).
//! Tied samples are perturbed first. Submethod 1 computes the exact
//! statistic, submethod 2 the two-step approximation with `gridsize`.
inline ModeTestResult test_acr(const Sample& s, int k, const TestOptions& opt, int submethod = 1,
                               std::pair<int, int> gridsize = {20, 20},
                               std::optional<Interval> support = std::nullopt,
                               double tol2 = 1e-5) {
  detail::check_B(opt.B);
  if (submethod != 1 && submethod != 2)
    throw std::invalid_argument("test_acr: submethod must be 1 or 2");
  if (submethod == 2 && k == 1)
    throw std::invalid_argument("test_acr: the exact statistic is already fast for one mode");

  const bool needs_perturbation = s.has_tied_values() || s.has_tied_gaps();
  RngStream perturb_rng = RngStream::substream(opt.seed, 0);
  const Sample working = needs_perturbation ? perturb_sample(s, perturb_rng) : s;

  auto delta_of = [&](const Sample& sm) {
    if (submethod == 2) return excess_mass_approx(sm, k, gridsize).statistic;
    if (k == 1) return 2.0 * dip_statistic(sm.values());
    return detail::excess_mass_sweep(sm.values(), k).first;
  };
  const double delta = delta_of(working);

  const auto cbw = support ? constrained_critical_bandwidth(working, k, *support, opt.grid_size, opt.tol)
                           : critical_bandwidth(working, k, opt.grid_size, opt.tol);
  const double h = cbw.value;
  const Interval draw_region = support ? *support : Interval::unbounded();
  const auto n = working.size();

  std::vector<char> geq(static_cast<std::size_t>(opt.B), 0);
  parallel_for(opt.B, opt.threads, [&](int b) {
    RngStream rng = RngStream::substream(opt.seed, static_cast<std::uint64_t>(b) + 1);
    const Sample star = smooth_bootstrap(working, h, n, rng, draw_region);
    geq[static_cast<std::size_t>(b)] = delta_of(star) >= delta;
  });

  ModeTestResult r;
  r.method = TestMethod::ACR;
  r.submethod = submethod;
  r.mod0 = k;
  r.statistic = delta;
  r.p_value = detail::proportion(geq, opt.B);
  r.B = opt.B;
  r.seed = opt.seed;
  r.grid_size = opt.grid_size;
  r.tol = opt.tol;
  r.tol2 = tol2;
  r.perturbed = needs_perturbation;
  r.note = "resamples drawn from the unmodified kernel estimate at the critical bandwidth";
  if (support) {
    r.support = *support;
    // mass of the resampling density over the interval, integrated to tol2
    const double mass = detail::integrate_density_over(working, h, *support, tol2);
    if (!(mass > 1e-12)) throw std::runtime_error("test_acr: support region carries no mass");
  }
  return r;
}

}  // namespace modality
