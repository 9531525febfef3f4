#pragma once

#include <span>

namespace affectlab::dsp {

// Moments of the signal and of its first/second differences. The *_norm
// variants are taken on the z-scored signal and are 0 when the signal has
// (numerically) zero variance. Population standard deviation.
struct DiffMoments {
  double mean = 0.0;
  double std = 0.0;
  double mean_abs_d1 = 0.0;
  double mean_abs_d1_norm = 0.0;
  double mean_abs_d2 = 0.0;
  double mean_abs_d2_norm = 0.0;
};

DiffMoments diff_moments(std::span<const double> signal);

double mean(std::span<const double> x);
double pstdev(std::span<const double> x);

// Linear-interpolation percentile (position p * (n - 1) in sorted order), p in [0, 1].
double percentile(std::span<const double> x, double p);

}  // namespace affectlab::dsp
