#pragma once

#include <limits>
#include <span>
#include <vector>

#include "affectlab/core/exec.hpp"

namespace affectlab::eeg {

// Parzen (Gaussian window) density estimates evaluated on a regular grid of
// eval_grid points per axis spanning mean +/- span_sigma standard deviations.
// The window uses the sample covariance, so `bandwidth` is dimensionless;
// 0 selects Silverman's factor 1.06 * N^(-1/5). Each sample's window is
// truncated at Mahalanobis radius cutoff * h (infinity disables truncation).
struct MutualInfoConfig {
  double bandwidth = 0.0;
  int eval_grid = 64;
  double span_sigma = 3.0;
  double cutoff = 6.0;

  void validate() const;
};

struct EntropyEstimate {
  double mutual_information = 0.0;  // nats, >= 0
  double entropy_y = 0.0;           // of the gridded Parzen marginal of y
  double conditional_entropy = 0.0; // H(Y|X) = H(Y) - I(X;Y)
};

EntropyEstimate parzen_entropy(std::span<const double> x, std::span<const double> y, const MutualInfoConfig& cfg = {},
                               Exec exec = Exec::parallel);

double mutual_information(std::span<const double> x, std::span<const double> y, const MutualInfoConfig& cfg = {},
                          Exec exec = Exec::parallel);
double conditional_entropy(std::span<const double> x, std::span<const double> y, const MutualInfoConfig& cfg = {},
                           Exec exec = Exec::parallel);

// Low-level pieces, exposed for the oracle tests and the benchmark.
namespace detail {

struct Grid1d {
  double mean = 0.0;
  double sigma = 0.0;
  std::vector<double> points;
};

Grid1d make_grid(std::span<const double> x, const MutualInfoConfig& cfg);

double silverman_factor(std::size_t n);

// Normalized gridded marginal density (sums to 1).
std::vector<double> parzen_marginal(std::span<const double> x, const Grid1d& grid, double h, double cutoff);

// Normalized gridded joint density, row-major [x index][y index]. The serial
// and parallel variants accumulate each cell in the same sample order and
// agree bit for bit.
std::vector<double> parzen_joint(std::span<const double> x, std::span<const double> y, const Grid1d& gx,
                                 const Grid1d& gy, double h, double cutoff, Exec exec);

}  // namespace detail

}  // namespace affectlab::eeg
