#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "affectlab/core/rng.hpp"

namespace testing {

// 32-bin (per axis) histogram plug-in mutual information over the data range,
// with the Miller-Madow occupied-bin correction on each entropy term.
inline double histogram_mi(const std::vector<double>& x, const std::vector<double>& y, int bins = 32) {
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const auto bin = [bins](double v, double lo, double hi) {
    const int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    return std::clamp(b, 0, bins - 1);
  };
  std::vector<double> joint(static_cast<std::size_t>(bins * bins), 0.0), px(bins, 0.0), py(bins, 0.0);
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int a = bin(x[i], *xlo, *xhi), b = bin(y[i], *ylo, *yhi);
    joint[static_cast<std::size_t>(a * bins + b)] += 1.0 / n;
    px[a] += 1.0 / n;
    py[b] += 1.0 / n;
  }
  double mi = 0;
  int occ_xy = 0, occ_x = 0, occ_y = 0;
  for (int a = 0; a < bins; ++a)
    for (int b = 0; b < bins; ++b) {
      const double p = joint[static_cast<std::size_t>(a * bins + b)];
      if (p > 0) {
        mi += p * std::log(p / (px[a] * py[b]));
        ++occ_xy;
      }
    }
  for (int a = 0; a < bins; ++a) {
    occ_x += px[a] > 0;
    occ_y += py[a] > 0;
  }
  return mi - (occ_xy - occ_x - occ_y + 1) / (2.0 * n);
}

// x ~ N(0,1), y = rho x + sqrt(1 - rho^2) z.
inline void bivariate_gaussian(double rho, std::size_t n, std::uint64_t seed, std::vector<double>& x,
                               std::vector<double>& y) {
  affectlab::Rng rng(seed);
  x.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * rng.normal();
  }
}

// pNN50 by direct enumeration in integer microseconds, so the 50 ms boundary is exact.
inline double pnn50_enumerate(const std::vector<long long>& rr_us) {
  int count = 0;
  for (std::size_t i = 0; i + 1 < rr_us.size(); ++i) count += std::llabs(rr_us[i + 1] - rr_us[i]) > 50000;
  return 100.0 * count / static_cast<double>(rr_us.size() - 1);
}

}  // namespace testing
