#include "affectlab/dsp/peaks.hpp"

#include <algorithm>
#include <numeric>

#include "affectlab/core/error.hpp"

namespace affectlab::dsp {

std::vector<std::size_t> detect_peaks(std::span<const double> x, double fs, double min_dist_s, double min_height) {
  if (x.empty()) throw Error("detect_peaks: empty signal");
  if (!(min_dist_s > 0)) throw Error("detect_peaks: min_dist_s must be positive");

  std::vector<std::size_t> cand;
  const std::size_t n = x.size();
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i - 1] < x[i]) {
      std::size_t j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) {
        if (x[i] >= min_height) cand.push_back((i + j) / 2);
      }
      i = j + 1;
    } else {
      ++i;
    }
  }

  const double dist = min_dist_s * fs;
  std::vector<std::size_t> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[cand[a]] > x[cand[b]]; });
  std::vector<bool> removed(cand.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t oi : order) {
    if (removed[oi]) continue;
    kept.push_back(cand[oi]);
    for (std::size_t k = oi; k-- > 0 && static_cast<double>(cand[oi] - cand[k]) < dist;) removed[k] = true;
    for (std::size_t k = oi + 1; k < cand.size() && static_cast<double>(cand[k] - cand[oi]) < dist; ++k) removed[k] = true;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace affectlab::dsp
