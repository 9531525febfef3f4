#pragma once

#include <cstddef>
#include <span>

namespace affectlab::harness {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double p) const { return p >= lo && p <= hi; }
};

// Exact (Clopper-Pearson) interval for a binomial proportion k / n.
Interval binomial_ci(std::size_t k, std::size_t n, double level = 0.95);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Welch two-sample t-test (unequal variances), e.g. per-fold accuracies of two
// fused configurations. Each sample needs at least 2 values.
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace affectlab::harness
