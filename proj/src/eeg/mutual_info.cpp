#include "affectlab/eeg/mutual_info.hpp"

#include <algorithm>
#include <cmath>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/moments.hpp"

namespace affectlab::eeg {

void MutualInfoConfig::validate() const {
  if (bandwidth < 0.0) throw Error("mutual information: bandwidth must be > 0 (or 0 for Silverman)");
  if (eval_grid < 32) throw Error("mutual information: eval_grid must be >= 32");
  if (!(span_sigma > 0.0)) throw Error("mutual information: span_sigma must be positive");
  if (!(cutoff > 0.0)) throw Error("mutual information: cutoff must be positive");
}

namespace detail {

double silverman_factor(std::size_t n) { return 1.06 * std::pow(static_cast<double>(n), -0.2); }

Grid1d make_grid(std::span<const double> x, const MutualInfoConfig& cfg) {
  Grid1d g;
  g.mean = dsp::mean(x);
  g.sigma = dsp::pstdev(x);
  if (!(g.sigma > 1e-12 * std::max(1.0, std::abs(g.mean)))) throw Error("constant signal");
  const int n = cfg.eval_grid;
  g.points.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    g.points[static_cast<std::size_t>(k)] =
        g.mean + g.sigma * cfg.span_sigma * (-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1));
  return g;
}

namespace {

void normalize(std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) s += v;
  if (s > 0.0)
    for (double& v : p) v /= s;
}

// Index range of grid points within `radius` of `center` (inclusive, may be empty).
std::pair<std::size_t, std::size_t> window(const Grid1d& g, double center, double radius) {
  const auto lo = std::lower_bound(g.points.begin(), g.points.end(), center - radius);
  const auto hi = std::upper_bound(g.points.begin(), g.points.end(), center + radius);
  return {static_cast<std::size_t>(lo - g.points.begin()), static_cast<std::size_t>(hi - g.points.begin())};
}

// Inverse of the 2x2 population covariance, with a relative ridge that keeps
// x == y well defined.
struct Quadratic {
  double a, b, c;  // z' S^-1 z = a dx^2 + 2 b dx dy + c dy^2
  double sxx, syy;
};

Quadratic inverse_covariance(std::span<const double> x, std::span<const double> y, const Grid1d& gx, const Grid1d& gy) {
  const std::size_t n = x.size();
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - gx.mean) * (y[i] - gy.mean);
  sxy /= static_cast<double>(n);
  const double ridge = 1e-9 * 0.5 * (gx.sigma * gx.sigma + gy.sigma * gy.sigma);
  const double sxx = gx.sigma * gx.sigma + ridge;
  const double syy = gy.sigma * gy.sigma + ridge;
  const double det = sxx * syy - sxy * sxy;
  return {syy / det, -sxy / det, sxx / det, sxx, syy};
}

}  // namespace

std::vector<double> parzen_marginal(std::span<const double> x, const Grid1d& grid, double h, double cutoff) {
  const std::size_t g = grid.points.size();
  std::vector<double> p(g, 0.0);
  const double inv = 1.0 / (2.0 * h * h * grid.sigma * grid.sigma);
  const double radius = cutoff * h * grid.sigma;
  for (double xi : x) {
    const auto [lo, hi] = std::isfinite(radius) ? window(grid, xi, radius) : std::pair<std::size_t, std::size_t>{0, g};
    for (std::size_t k = lo; k < hi; ++k) {
      const double d = grid.points[k] - xi;
      p[k] += std::exp(-d * d * inv);
    }
  }
  normalize(p);
  return p;
}

std::vector<double> parzen_joint(std::span<const double> x, std::span<const double> y, const Grid1d& gx,
                                 const Grid1d& gy, double h, double cutoff, Exec exec) {
  const std::size_t gn = gx.points.size();
  const std::size_t gm = gy.points.size();
  const std::size_t n = x.size();
  const Quadratic q = inverse_covariance(x, y, gx, gy);
  const double inv2h2 = 1.0 / (2.0 * h * h);
  const double r2 = cutoff * cutoff * h * h;
  const bool truncate = std::isfinite(cutoff);
  const double rx = cutoff * h * std::sqrt(q.sxx);
  const double ry = cutoff * h * std::sqrt(q.syy);
  std::vector<double> p(gn * gm, 0.0);

  const auto accumulate_row = [&](std::size_t k, std::size_t i) {
    const double dx = gx.points[k] - x[i];
    const auto [lo, hi] = truncate ? window(gy, y[i], ry) : std::pair<std::size_t, std::size_t>{0, gm};
    double* row = p.data() + k * gm;
    for (std::size_t l = lo; l < hi; ++l) {
      const double dy = gy.points[l] - y[i];
      const double m = q.a * dx * dx + 2.0 * q.b * dx * dy + q.c * dy * dy;
      if (truncate && m > r2) continue;
      row[l] += std::exp(-m * inv2h2);
    }
  };

  if (exec == Exec::serial) {
    // Reference: sample-major scatter.
    for (std::size_t i = 0; i < n; ++i) {
      auto [klo, khi] = truncate ? window(gx, x[i], rx) : std::pair<std::size_t, std::size_t>{0, gn};
      // Widen by one and apply the same predicate as the parallel path.
      klo = klo > 0 ? klo - 1 : 0;
      khi = std::min(gn, khi + 1);
      for (std::size_t k = klo; k < khi; ++k) {
        if (truncate && std::abs(gx.points[k] - x[i]) > rx) continue;
        accumulate_row(k, i);
      }
    }
  } else {
    // Row-parallel gather; each cell still sums samples in ascending order.
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t k = 0; k < gn; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        if (truncate && std::abs(gx.points[k] - x[i]) > rx) continue;
        accumulate_row(k, i);
      }
    }
  }
  normalize(p);
  return p;
}

}  // namespace detail

EntropyEstimate parzen_entropy(std::span<const double> x, std::span<const double> y, const MutualInfoConfig& cfg,
                               Exec exec) {
  cfg.validate();
  if (x.size() != y.size()) throw Error("mutual information: series lengths differ");
  if (x.size() < 64) throw Error("mutual information: need at least 64 samples");
  const auto gx = detail::make_grid(x, cfg);
  const auto gy = detail::make_grid(y, cfg);
  const double h = cfg.bandwidth > 0.0 ? cfg.bandwidth : detail::silverman_factor(x.size());
  const auto px = detail::parzen_marginal(x, gx, h, cfg.cutoff);
  const auto py = detail::parzen_marginal(y, gy, h, cfg.cutoff);
  const auto pxy = detail::parzen_joint(x, y, gx, gy, h, cfg.cutoff, exec);

  const std::size_t gm = py.size();
  double mi = 0.0;
  for (std::size_t k = 0; k < px.size(); ++k) {
    if (px[k] <= 0.0) continue;
    for (std::size_t l = 0; l < gm; ++l) {
      const double pj = pxy[k * gm + l];
      if (pj <= 0.0 || py[l] <= 0.0) continue;
      mi += pj * std::log(pj / (px[k] * py[l]));
    }
  }
  double hy = 0.0;
  for (double v : py)
    if (v > 0.0) hy -= v * std::log(v);

  EntropyEstimate e;
  e.mutual_information = std::max(0.0, mi);
  e.entropy_y = hy;
  e.conditional_entropy = std::max(0.0, hy - e.mutual_information);
  return e;
}

double mutual_information(std::span<const double> x, std::span<const double> y, const MutualInfoConfig& cfg, Exec exec) {
  return parzen_entropy(x, y, cfg, exec).mutual_information;
}

double conditional_entropy(std::span<const double> x, std::span<const double> y, const MutualInfoConfig& cfg, Exec exec) {
  return parzen_entropy(x, y, cfg, exec).conditional_entropy;
}

}  // namespace affectlab::eeg
