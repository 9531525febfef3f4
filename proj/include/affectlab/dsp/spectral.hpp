#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace affectlab::dsp {

struct BandDefinition {
  std::string name;
  double low = 0.0;
  double high = 0.0;
};

// theta, alpha, beta
const std::vector<BandDefinition>& eeg_bands();

struct WindowConfig {
  double win_s = 1.0;
  double hop_s = 0.5;
};

// Welch one-sided power spectral density (Hann window), averaged over frames.
// Bins run from 0 Hz up to the largest bin <= fmax.
struct PsdEstimate {
  std::vector<double> freqs;
  std::vector<double> density;
  double df = 0.0;
  std::size_t frames = 0;
};

PsdEstimate welch_psd(std::span<const double> signal, double fs, const WindowConfig& window, double fmax);

// Integrated power over bins with low <= f < high.
double band_power(const PsdEstimate& psd, const BandDefinition& band);

double welch_band_power(std::span<const double> signal, double fs, const BandDefinition& band,
                        const WindowConfig& window = {});

struct SpectrogramMatrix {
  Eigen::MatrixXd values;  // [freq bin x frame], |X|^2
  std::vector<double> freq_axis;
  std::vector<double> time_axis;  // frame centers, seconds
  double fs = 0.0;
};

SpectrogramMatrix stft_spectrogram(std::span<const double> signal, double fs, double fmax, const WindowConfig& window);

}  // namespace affectlab::dsp
