#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace modality {

//! Hartigan & Hartigan's dip statistic: the maximum distance between the
//! empirical distribution function and the closest unimodal distribution
//! function, computed by iterating the greatest convex minorant / least
//! concave majorant fit over a shrinking modal interval. Satisfies
//! dip = Delta_{n,2} / 2 (half the one-mode excess mass statistic).
inline double dip_statistic(std::span<const double> sorted) {
  const int n = static_cast<int>(sorted.size());
  if (n < 2) throw std::invalid_argument("dip_statistic: need at least 2 observations");
  // 1-based view of the data to keep the index arithmetic transparent
  auto x = [&](int i) { return sorted[static_cast<std::size_t>(i - 1)]; };
  for (int i = 2; i <= n; ++i)
    if (x(i) < x(i - 1)) throw std::invalid_argument("dip_statistic: data not sorted");

  double dip = 1.0;  // accumulated in units of 2n * dip
  if (x(n) == x(1)) return dip / (2.0 * n);

  std::vector<int> mn(n + 1), mj(n + 1), gcm(n + 2), lcm(n + 2);

  // Predecessor chains for the convex minorant fit...
  mn[1] = 1;
  for (int j = 2; j <= n; ++j) {
    mn[j] = j - 1;
    for (;;) {
      const int mnj = mn[j];
      const int mnmnj = mn[mnj];
      if (mnj == 1 ||
          (x(j) - x(mnj)) * (mnj - mnmnj) < (x(mnj) - x(mnmnj)) * (j - mnj))
        break;
      mn[j] = mnmnj;
    }
  }
  // ...and successor chains for the concave majorant fit.
  mj[n] = n;
  for (int j = n - 1; j >= 1; --j) {
    mj[j] = j + 1;
    for (;;) {
      const int mjk = mj[j];
      const int mjmjk = mj[mjk];
      if (mjk == n ||
          (x(j) - x(mjk)) * (mjk - mjmjk) < (x(mjk) - x(mjmjk)) * (j - mjk))
        break;
      mj[j] = mjmjk;
    }
  }

  int low = 1, high = n;
  for (;;) {
    // Change points of the two fits inside the current modal interval.
    int l_gcm, l_lcm;
    gcm[1] = high;
    for (l_gcm = 1; gcm[l_gcm] > low; ++l_gcm) gcm[l_gcm + 1] = mn[gcm[l_gcm]];
    lcm[1] = low;
    for (l_lcm = 1; lcm[l_lcm] < high; ++l_lcm) lcm[l_lcm + 1] = mj[lcm[l_lcm]];

    int ig = l_gcm, ih = l_lcm;
    int ix = l_gcm - 1, iv = 2;
    long double d = 0.0;
    if (l_gcm != 2 || l_lcm != 2) {
      // Largest distance between the two fits over [low, high].
      do {
        const int gcmix = gcm[ix];
        const int lcmiv = lcm[iv];
        if (gcmix > lcmiv) {
          const int gcmi1 = gcm[ix + 1];
          const long double dx =
              (lcmiv - gcmi1 + 1) -
              static_cast<long double>(x(lcmiv) - x(gcmi1)) * (gcmix - gcmi1) /
                  (x(gcmix) - x(gcmi1));
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const int lcmiv1 = lcm[iv - 1];
          const long double dx =
              static_cast<long double>(x(gcmix) - x(lcmiv1)) * (lcmiv - lcmiv1) /
                  (x(lcmiv) - x(lcmiv1)) -
              (gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 1) ix = 1;
        if (iv > l_lcm) iv = l_lcm;
      } while (gcm[ix] != lcm[iv]);
    } else {
      d = 1.0;
    }
    if (d < dip) break;

    // Dip within the convex minorant segments...
    double dip_l = 0.0;
    for (int j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const int jb = gcm[j + 1], je = gcm[j];
      if (je - jb > 1 && x(je) != x(jb)) {
        const double c = (je - jb) / (x(je) - x(jb));
        for (int jj = jb; jj <= je; ++jj) {
          const double t = (jj - jb + 1) - (x(jj) - x(jb)) * c;
          if (t > max_t) max_t = t;
        }
      }
      if (max_t > dip_l) dip_l = max_t;
    }
    // ...and within the concave majorant segments.
    double dip_u = 0.0;
    for (int j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const int jb = lcm[j], je = lcm[j + 1];
      if (je - jb > 1 && x(je) != x(jb)) {
        const double c = (je - jb) / (x(je) - x(jb));
        for (int jj = jb; jj <= je; ++jj) {
          const double t = (x(jj) - x(jb)) * c - (jj - jb - 1);
          if (t > max_t) max_t = t;
        }
      }
      if (max_t > dip_u) dip_u = max_t;
    }

    const double dipnew = std::max(dip_l, dip_u);
    if (dipnew > dip) dip = dipnew;
    if (low == gcm[ig] && high == lcm[ih]) break;
    low = gcm[ig];
    high = lcm[ih];
  }
  return dip / (2.0 * n);
}

}  // namespace modality
