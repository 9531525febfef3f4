#include "affectlab/harness/stats.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/moments.hpp"

namespace affectlab::harness {

Interval binomial_ci(std::size_t k, std::size_t n, double level) {
  if (n == 0 || k > n) throw Error("binomial_ci: need 0 <= k <= n, n > 0");
  if (!(level > 0 && level < 1)) throw Error("binomial_ci: level must be in (0, 1)");
  const double alpha = 1.0 - level;
  const auto kd = static_cast<double>(k), nd = static_cast<double>(n);
  Interval ci;
  ci.lo = k == 0 ? 0.0 : boost::math::quantile(boost::math::beta_distribution<>(kd, nd - kd + 1), alpha / 2);
  ci.hi = k == n ? 1.0 : boost::math::quantile(boost::math::beta_distribution<>(kd + 1, nd - kd), 1 - alpha / 2);
  return ci;
}

TTest welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch_t_test: each sample needs at least 2 values");
  const auto var = [](std::span<const double> x) {
    const double m = dsp::mean(x);
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
  };
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double va = var(a) / na, vb = var(b) / nb;
  TTest r;
  const double diff = dsp::mean(a) - dsp::mean(b);
  if (va + vb == 0.0) {
    r.t = diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    r.df = na + nb - 2;
    r.p_value = diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = diff / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) / (va * va / (na - 1) + vb * vb / (nb - 1));
  const boost::math::students_t dist(r.df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

}  // namespace affectlab::harness
