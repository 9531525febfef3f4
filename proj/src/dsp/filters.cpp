#include "affectlab/dsp/filters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "affectlab/core/error.hpp"

namespace affectlab::dsp {

std::vector<double> moving_average(std::span<const double> signal, double fs, double window_s) {
  if (signal.empty()) throw Error("moving_average: empty signal");
  const auto width = static_cast<std::ptrdiff_t>(std::lround(window_s * fs));
  if (width < 1) throw Error("moving_average: window shorter than one sample");
  const std::ptrdiff_t left = (width - 1) / 2;
  const std::ptrdiff_t right = width / 2;
  const auto n = static_cast<std::ptrdiff_t>(signal.size());
  std::vector<double> out(signal.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, i - left);
    const std::ptrdiff_t b = std::min(n - 1, i + right);
    double s = 0.0;
    for (std::ptrdiff_t k = a; k <= b; ++k) s += signal[k];
    out[i] = s / static_cast<double>(b - a + 1);
  }
  return out;
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

// Q factors of the two conjugate pole pairs of a 4th-order Butterworth.
constexpr std::array<double, 2> kButter4Q = {0.54119610014619698, 1.3065629648763766};

Biquad cookbook(double fc, double fs, double q, bool highpass) {
  const double w0 = 2.0 * std::numbers::pi * fc / fs;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  Biquad s{};
  if (highpass) {
    s.b0 = (1.0 + c) / 2.0 / a0;
    s.b1 = -(1.0 + c) / a0;
  } else {
    s.b0 = (1.0 - c) / 2.0 / a0;
    s.b1 = (1.0 - c) / a0;
  }
  s.b2 = s.b0;
  s.a1 = -2.0 * c / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

}  // namespace

std::vector<double> bandpass(std::span<const double> signal, double fs, double low, double high) {
  if (!(low > 0.0 && low < high && high < fs / 2.0))
    throw Error("bandpass: band [" + std::to_string(low) + ", " + std::to_string(high) + "] invalid for fs " +
                std::to_string(fs));
  if (signal.empty()) return {};
  std::vector<Biquad> sections;
  for (double q : kButter4Q) sections.push_back(cookbook(low, fs, q, true));
  for (double q : kButter4Q) sections.push_back(cookbook(high, fs, q, false));

  const std::size_t n = signal.size();
  const std::size_t pad = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::lround(3.0 * fs / low)));
  std::vector<double> x;
  x.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) x.push_back(2.0 * signal[0] - signal[i]);
  x.insert(x.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) x.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  for (const auto& s : sections) s.run(x);
  std::reverse(x.begin(), x.end());
  for (const auto& s : sections) s.run(x);
  std::reverse(x.begin(), x.end());
  return {x.begin() + static_cast<std::ptrdiff_t>(pad), x.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> minmax_scale(std::span<const double> signal) {
  std::vector<double> out(signal.size(), 0.0);
  if (signal.empty()) return out;
  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < signal.size(); ++i) out[i] = (signal[i] - *lo) / range;
  return out;
}

}  // namespace affectlab::dsp
