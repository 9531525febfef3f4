#include "affectlab/dsp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "affectlab/core/error.hpp"

namespace affectlab::dsp {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double pstdev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

double percentile(std::span<const double> x, double p) {
  if (x.empty()) throw Error("percentile: empty input");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

DiffMoments diff_moments(std::span<const double> x) {
  if (x.size() < 3) throw Error("diff_moments: need at least 3 samples");
  DiffMoments m;
  m.mean = mean(x);
  m.std = pstdev(x);
  const std::size_t n = x.size();
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) d1 += std::abs(x[i + 1] - x[i]);
  // Second difference in the skin-conductance feature convention: x[n+2] - x[n].
  for (std::size_t i = 0; i + 2 < n; ++i) d2 += std::abs(x[i + 2] - x[i]);
  m.mean_abs_d1 = d1 / static_cast<double>(n - 1);
  m.mean_abs_d2 = d2 / static_cast<double>(n - 2);
  if (m.std > 1e-12 * std::max(1.0, std::abs(m.mean))) {
    m.mean_abs_d1_norm = m.mean_abs_d1 / m.std;
    m.mean_abs_d2_norm = m.mean_abs_d2 / m.std;
  }
  return m;
}

}  // namespace affectlab::dsp
