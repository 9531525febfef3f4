#include "affectlab/dsp/spectrogram_image.hpp"

#include <cmath>

namespace affectlab::dsp {

RgbImage spectrogram_image(std::span<const double> signal, double fs, double fmax, const WindowConfig& window,
                           int size) {
  const auto s = stft_spectrogram(signal, fs, fmax, window);
  const Eigen::MatrixXd logp = (s.values.array() + 1e-12).log10().matrix();
  const double lo = logp.minCoeff(), hi = logp.maxCoeff();
  const auto bins = static_cast<int>(logp.rows()), frames = static_cast<int>(logp.cols());
  RgbImage raw(frames, bins);
  for (int k = 0; k < bins; ++k)
    for (int f = 0; f < frames; ++f) {
      const double t = hi > lo ? (logp(k, f) - lo) / (hi - lo) : 0.0;
      const Rgb c = parula(t);
      auto* px = raw.at(f, bins - 1 - k);
      px[0] = c.r;
      px[1] = c.g;
      px[2] = c.b;
    }
  return resize_bilinear(raw, size, size);
}

}  // namespace affectlab::dsp
