#include <doctest.h>

#include <cmath>
#include <vector>

#include "modality/kde.hpp"
#include "modality/rng.hpp"
#include "oracles.hpp"

using namespace modality;

namespace {

Sample make(std::initializer_list<double> v) { return Sample::from_values(v); }

Sample random_bimodal(std::uint64_t seed, std::size_t n) {
  RngStream rng(seed);
  std::vector<double> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    v.push_back(rng.uniform() < 0.5 ? rng.normal() : 4.0 + 0.7 * rng.normal());
  return Sample::from_values(std::move(v));
}

}  // namespace

TEST_CASE("pointwise density values match the Gaussian kernel closed forms") {
  const double phi0 = 0.3989422804014327;
  const double phi1 = 0.2419707245191434;
  CHECK(density_at(make({0.0}), 1.0, 0.0) == doctest::Approx(phi0).epsilon(1e-10));
  CHECK(density_at(make({-1.0, 1.0}), 1.0, 0.0) == doctest::Approx(phi1).epsilon(1e-10));

  CHECK(derivative_at(make({0.0}), 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(derivative_at(make({0.0}), 1.0, 1.0) == doctest::Approx(-phi1).epsilon(1e-10));
  CHECK(derivative_at(make({-1.0, 1.0}), 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK(cdf_at(make({0.0}), 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cdf_at(make({0.0}), 1.0, 40.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cdf_at(make({-1.0, 1.0}), 0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("grid evaluation agrees with the naive exp-per-term sum") {
  const Sample s = random_bimodal(7, 80);
  for (double h : {0.05, 0.4, 2.5}) {
    const double lo = s.min() - 3 * h, hi = s.max() + 3 * h;
    const DensityGrid g = evaluate_on_range(s, h, lo, hi, 512);
    const auto ref = oracle::kde_naive(s.values(), h, lo, hi, 512);
    for (std::size_t j = 0; j < ref.size(); ++j)
      CHECK(g.y[j] == doctest::Approx(ref[j]).epsilon(1e-11));
  }
}

TEST_CASE("density grids are equispaced and normalized") {
  const Sample s = random_bimodal(11, 60);
  for (double h : {0.1, 0.5, 1.5}) {
    const DensityGrid g = evaluate_density(s, h, 4096);
    const double dx = g.spacing();
    for (std::size_t j = 1; j < g.x.size(); ++j)
      CHECK(std::fabs((g.x[j] - g.x[j - 1]) - dx) <= 1e-12 * dx);
    const double mass = g.trapezoid();
    CHECK(mass >= 0.98);
    CHECK(mass <= 1.001);
    for (double v : g.y) CHECK(v >= 0.0);
    // wider padding keeps the integral in range as well
    const DensityGrid gw = evaluate_on_range(s, h, s.min() - 5 * h, s.max() + 5 * h, 4096);
    CHECK(gw.trapezoid() >= 0.98);
    CHECK(gw.trapezoid() <= 1.001);
  }
}

TEST_CASE("derivative grid matches central finite differences of the density") {
  const Sample s = random_bimodal(3, 50);
  const double h = 0.6;
  const DensityGrid f = evaluate_density(s, h, 8192);
  const DensityGrid d = evaluate_derivative(s, h, 8192);
  double max_abs = 0.0;
  for (double v : d.y) max_abs = std::max(max_abs, std::fabs(v));
  const double tol = std::max(1e-6, 1e-4 * max_abs);
  const double dx = f.spacing();
  for (std::size_t j = 1; j + 1 < f.y.size(); ++j) {
    const double fd = (f.y[j + 1] - f.y[j - 1]) / (2.0 * dx);
    CHECK(std::fabs(fd - d.y[j]) <= tol);
  }
}

TEST_CASE("closed-form cdf agrees with trapezoid integration of the density") {
  const Sample s = random_bimodal(5, 60);
  const double h = 0.5;
  const DensityGrid f = evaluate_density(s, h, 1 << 14);
  const double f0 = cdf_at(s, h, f.x.front());
  // cumulative trapezoid, checked every 500 nodes
  double cum = 0.0;
  for (std::size_t j = 1; j < f.x.size(); ++j) {
    cum += 0.5 * (f.y[j] + f.y[j - 1]) * (f.x[j] - f.x[j - 1]);
    if (j % 500 == 0) {
      const double cdf_diff = cdf_at(s, h, f.x[j]) - f0;
      CHECK(std::fabs(cdf_diff - cum) <= 1e-4);
    }
  }
  const DensityGrid c = evaluate_cdf(s, h, 2048);
  for (std::size_t j = 1; j < c.y.size(); ++j) {
    CHECK(c.y[j] >= c.y[j - 1] - 1e-15);
    CHECK(c.y[j] >= 0.0);
    CHECK(c.y[j] <= 1.0);
  }
}

TEST_CASE("mode counting: trivial cases") {
  CHECK(count_modes(make({-1.0, 1.0}), 10.0, 1024) == 1);
  CHECK(count_modes(make({-1.0, 1.0}), 0.3, 1024) == 2);
  CHECK(count_modes(make({-1.0, 1.0}), 0.999, 1 << 15) == 2);
  CHECK(count_modes(make({-1.0, 1.0}), 1.001, 1 << 15) == 1);
}

TEST_CASE("mode count is monotone on a geometric bandwidth grid") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Sample s = random_bimodal(seed, 90);
    const double h_lo = 0.02, h_hi = s.range();
    int prev = std::numeric_limits<int>::max();
    for (int t = 0; t < 50; ++t) {
      const double h = h_lo * std::pow(h_hi / h_lo, t / 49.0);
      const int c = count_modes(s, h, 4096);
      CHECK(c <= prev);
      prev = c;
    }
  }
}

TEST_CASE("mode counting is affine equivariant") {
  const Sample s = random_bimodal(13, 70);
  const double a = 2.5, b = -3.0;
  std::vector<double> tv;
  for (double v : s.values()) tv.push_back(a * v + b);
  const Sample t = Sample::from_values(std::move(tv));
  for (double h : {0.1, 0.3, 0.9, 2.0}) {
    CHECK(count_modes(t, a * h, 4096) == count_modes(s, h, 4096));
  }
  // locations map to a*m + b within grid resolution
  const auto es = locate_extrema(s, 0.5, 4096);
  const auto et = locate_extrema(t, a * 0.5, 4096);
  REQUIRE(es.locations.size() == et.locations.size());
  const double res = a * (s.range() + 3.0) / 4096.0;
  for (std::size_t i = 0; i < es.locations.size(); ++i)
    CHECK(std::fabs(a * es.locations[i] + b - et.locations[i]) <= res);
}

TEST_CASE("extrema of a symmetric pair: modes near the points, antimode at 0") {
  const auto e = locate_extrema(make({-1.0, 1.0}), 0.3, 1 << 12);
  REQUIRE(e.locations.size() == 3);
  CHECK(std::fabs(e.locations[0] + 1.0) < 1e-3);
  CHECK(std::fabs(e.locations[1]) < 1e-3);
  CHECK(std::fabs(e.locations[2] - 1.0) < 1e-3);
  CHECK(e.mode_count() == 2);
  // modes strictly higher than the adjacent antimode
  CHECK(e.fvalues[0] > e.fvalues[1]);
  CHECK(e.fvalues[2] > e.fvalues[1]);
}

TEST_CASE("a bandwidth as large as the range leaves a single mode") {
  for (std::uint64_t seed : {21u, 22u}) {
    const Sample s = random_bimodal(seed, 40);
    const auto e = locate_extrema(s, s.range(), 4096);
    CHECK(e.mode_count() == 1);
    CHECK(e.antimodes().empty());
    CHECK(count_modes(s, s.range(), 4096) == 1);
  }
}

TEST_CASE("plateau of equal grid values counts as one extremum") {
  // hand-built grid sequence: rise, flat top, fall -> exactly one maximum
  std::vector<double> y{0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.5, 0.9, 0.9, 0.2};
  const auto ex = modality::detail::grid_extrema(y);
  int maxima = 0, minima = 0;
  for (const auto& e : ex) (e.is_max ? maxima : minima)++;
  CHECK(maxima == 2);  // the flat top and the 0.9-plateau
  CHECK(minima == 1);
  CHECK(ex[0].first == 2);
  CHECK(ex[0].last == 4);
}

TEST_CASE("rule of thumb bandwidth") {
  RngStream rng(99);
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(rng.normal());
  const Sample s = Sample::from_values(v);
  // independent computation of 0.9 min(sd, IQR/1.34) n^{-1/5}
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= 100.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / 99.0);
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  auto q7 = [&](double p) {
    const double idx = p * 99.0;
    const auto lo = static_cast<std::size_t>(idx);
    return sorted[lo] + (idx - lo) * (sorted[lo + 1] - sorted[lo]);
  };
  const double iqr = q7(0.75) - q7(0.25);
  const double expect = 0.9 * std::min(sd, iqr / 1.34) * std::pow(100.0, -0.2);
  CHECK(rule_of_thumb_bandwidth(s) == doctest::Approx(expect).epsilon(1e-12));

  // scale equivariance (dyadic factor keeps it exact)
  std::vector<double> scaled;
  for (double x : v) scaled.push_back(2.0 * x);
  CHECK(rule_of_thumb_bandwidth(Sample::from_values(scaled)) ==
        doctest::Approx(2.0 * rule_of_thumb_bandwidth(s)).epsilon(1e-13));

  CHECK_THROWS_AS(rule_of_thumb_bandwidth(make({1.0, 1.0, 1.0})), std::domain_error);
}

TEST_CASE("smooth bootstrap honours its contract") {
  const Sample s = random_bimodal(31, 25);

  SUBCASE("h = 0 draws only original values") {
    RngStream rng(5);
    const Sample b = smooth_bootstrap(s, 0.0, 200, rng);
    for (double v : b.values())
      CHECK(std::binary_search(s.values().begin(), s.values().end(), v));
  }
  SUBCASE("fixed seed is deterministic") {
    RngStream r1(17), r2(17);
    const Sample b1 = smooth_bootstrap(s, 0.2, 100, r1);
    const Sample b2 = smooth_bootstrap(s, 0.2, 100, r2);
    REQUIRE(b1.size() == b2.size());
    for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1.values()[i] == b2.values()[i]);
  }
  SUBCASE("single point with h = 1 approximates a standard normal") {
    RngStream rng(7);
    const Sample b = smooth_bootstrap(make({0.0}), 1.0, 100000, rng);
    CHECK(std::fabs(b.mean()) < 3e-2);
    CHECK(std::fabs(b.variance() - 1.0) < 3e-2);
  }
  SUBCASE("truncated draws stay inside the interval") {
    RngStream rng(9);
    const Interval I = Interval::closed(-0.5, 2.0);
    const Sample b = smooth_bootstrap(s, 0.5, 300, rng, I);
    for (double v : b.values()) CHECK(I.contains(v));
  }
  SUBCASE("errors") {
    RngStream rng(1);
    CHECK_THROWS(smooth_bootstrap(s, -0.1, 10, rng));
    CHECK_THROWS(smooth_bootstrap(s, 1.0, 0, rng));
  }
}

TEST_CASE("evaluation errors") {
  const Sample s = make({0.0, 1.0});
  CHECK_THROWS(evaluate_density(s, 0.0, 1024));
  CHECK_THROWS(evaluate_density(s, -1.0, 1024));
  CHECK_THROWS(evaluate_density(s, 1.0, 16));
  CHECK_THROWS(count_modes(s, 0.0, 1024));
}

TEST_CASE("support bounds truncate the grid and the counted modes") {
  // two clusters; a support covering only the left one sees one mode
  std::vector<double> v;
  RngStream rng(41);
  for (int i = 0; i < 40; ++i) v.push_back(0.1 * rng.normal());
  for (int i = 0; i < 40; ++i) v.push_back(5.0 + 0.1 * rng.normal());
  const Sample s = Sample::from_values(v);
  CHECK(count_modes(s, 0.2, 4096) == 2);
  CHECK(count_modes(s, 0.2, 4096, Interval::closed(-2.0, 2.0)) == 1);
  const DensityGrid g = evaluate_density(s, 0.2, 1024, Interval::closed(-2.0, 2.0));
  CHECK(g.x.front() >= -2.0);
  CHECK(g.x.back() <= 2.0);
}
