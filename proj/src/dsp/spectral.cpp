#include "affectlab/dsp/spectral.hpp"

#include <cmath>
#include <numbers>

#include "affectlab/core/error.hpp"

namespace affectlab::dsp {

const std::vector<BandDefinition>& eeg_bands() {
  static const std::vector<BandDefinition> bands = {{"theta", 4.0, 7.0}, {"alpha", 7.0, 13.0}, {"beta", 13.0, 30.0}};
  return bands;
}

namespace {

// Hann-windowed DFT restricted to bins 0..kmax, using twiddle tables indexed
// by (k * n) mod L.
class FramePower {
 public:
  FramePower(std::size_t length, std::size_t kmax) : length_(length), kmax_(kmax), window_(length), cos_(length), sin_(length) {
    for (std::size_t n = 0; n < length; ++n) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length);
      window_[n] = 0.5 * (1.0 - std::cos(phase));
      cos_[n] = std::cos(phase);
      sin_[n] = std::sin(phase);
      window_energy_ += window_[n] * window_[n];
    }
  }

  // |X_k|^2 for k = 0..kmax of the windowed frame.
  void operator()(std::span<const double> frame, std::vector<double>& out) const {
    out.assign(kmax_ + 1, 0.0);
    tmp_.resize(length_);
    for (std::size_t n = 0; n < length_; ++n) tmp_[n] = frame[n] * window_[n];
    for (std::size_t k = 0; k <= kmax_; ++k) {
      double re = 0.0, im = 0.0;
      std::size_t idx = 0;
      for (std::size_t n = 0; n < length_; ++n) {
        re += tmp_[n] * cos_[idx];
        im -= tmp_[n] * sin_[idx];
        idx += k;
        if (idx >= length_) idx -= length_;
      }
      out[k] = re * re + im * im;
    }
  }

  double window_energy() const { return window_energy_; }

 private:
  std::size_t length_, kmax_;
  std::vector<double> window_, cos_, sin_;
  double window_energy_ = 0.0;
  mutable std::vector<double> tmp_;
};

struct Framing {
  std::size_t win, hop, frames;
};

Framing framing(std::size_t n, double fs, const WindowConfig& w) {
  if (!(fs > 0)) throw Error("spectral: fs must be positive");
  const auto win = static_cast<std::size_t>(std::lround(w.win_s * fs));
  const auto hop = static_cast<std::size_t>(std::lround(w.hop_s * fs));
  if (win < 4) throw Error("spectral: window shorter than 4 samples");
  if (hop < 1 || hop > win) throw Error("spectral: hop must be in [1, window]");
  if (n < win) throw Error("spectral: signal shorter than one window");
  return {win, hop, (n - win) / hop + 1};
}

std::size_t max_bin(std::size_t win, double fs, double fmax) {
  const double df = fs / static_cast<double>(win);
  auto k = static_cast<std::size_t>(std::floor(fmax / df + 1e-9));
  return std::min(k, win / 2);
}

}  // namespace

PsdEstimate welch_psd(std::span<const double> signal, double fs, const WindowConfig& window, double fmax) {
  const auto f = framing(signal.size(), fs, window);
  const std::size_t kmax = max_bin(f.win, fs, fmax);
  FramePower power(f.win, kmax);

  PsdEstimate psd;
  psd.df = fs / static_cast<double>(f.win);
  psd.frames = f.frames;
  psd.density.assign(kmax + 1, 0.0);
  std::vector<double> p;
  for (std::size_t fr = 0; fr < f.frames; ++fr) {
    power(signal.subspan(fr * f.hop, f.win), p);
    for (std::size_t k = 0; k <= kmax; ++k) psd.density[k] += p[k];
  }
  const double scale = 1.0 / (fs * power.window_energy() * static_cast<double>(f.frames));
  for (std::size_t k = 0; k <= kmax; ++k) {
    const bool edge = k == 0 || (f.win % 2 == 0 && k == f.win / 2);
    psd.density[k] *= scale * (edge ? 1.0 : 2.0);
    psd.freqs.push_back(static_cast<double>(k) * psd.df);
  }
  return psd;
}

double band_power(const PsdEstimate& psd, const BandDefinition& band) {
  double s = 0.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k)
    if (psd.freqs[k] >= band.low - 1e-9 && psd.freqs[k] < band.high - 1e-9) s += psd.density[k];
  return s * psd.df;
}

double welch_band_power(std::span<const double> signal, double fs, const BandDefinition& band,
                        const WindowConfig& window) {
  if (!(band.low > 0 && band.low < band.high)) throw Error("band " + band.name + ": need 0 < low < high");
  return band_power(welch_psd(signal, fs, window, band.high), band);
}

SpectrogramMatrix stft_spectrogram(std::span<const double> signal, double fs, double fmax, const WindowConfig& window) {
  if (!(fmax > 0 && fmax < fs / 2)) throw Error("spectrogram: fmax must be in (0, fs/2)");
  const auto f = framing(signal.size(), fs, window);
  const std::size_t kmax = max_bin(f.win, fs, fmax);
  FramePower power(f.win, kmax);

  SpectrogramMatrix s;
  s.fs = fs;
  s.values.resize(static_cast<Eigen::Index>(kmax + 1), static_cast<Eigen::Index>(f.frames));
  std::vector<double> p;
  for (std::size_t fr = 0; fr < f.frames; ++fr) {
    power(signal.subspan(fr * f.hop, f.win), p);
    for (std::size_t k = 0; k <= kmax; ++k) s.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(fr)) = p[k];
    s.time_axis.push_back((static_cast<double>(fr * f.hop) + 0.5 * static_cast<double>(f.win)) / fs);
  }
  for (std::size_t k = 0; k <= kmax; ++k) s.freq_axis.push_back(static_cast<double>(k) * fs / static_cast<double>(f.win));
  return s;
}

}  // namespace affectlab::dsp
