#pragma once

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "affectlab/core/rng.hpp"
#include "affectlab/core/types.hpp"

namespace testing {

inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("affectlab_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<double> sine(double freq, double amp, double fs, double seconds, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::lround(fs * seconds));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * freq * i / fs + phase);
  return x;
}

inline std::vector<double> noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  affectlab::Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sd * rng.normal();
  return x;
}

// Narrow Gaussian pulses at the given beat times.
inline std::vector<double> pulse_train(const std::vector<double>& beats, double fs, double seconds, double width_s = 0.03) {
  const auto n = static_cast<std::size_t>(std::lround(fs * seconds));
  std::vector<double> x(n, 0.0);
  for (double b : beats)
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (static_cast<double>(i) / fs - b) / width_s;
      if (std::abs(d) < 8) x[i] += std::exp(-0.5 * d * d);
    }
  return x;
}

inline std::vector<double> regular_beats(double bpm, double seconds, double offset = 0.3) {
  std::vector<double> b;
  for (double t = offset; t < seconds; t += 60.0 / bpm) b.push_back(t);
  return b;
}

// Multichannel Gaussian-noise recording.
inline affectlab::TrialRecording noise_trial(const std::vector<std::string>& channels, double fs, double seconds,
                                             std::uint64_t seed, affectlab::Modality m = affectlab::Modality::EEG) {
  affectlab::TrialRecording t;
  t.trial_id = "t" + std::to_string(seed);
  t.subject_id = "s1";
  t.modality = m;
  t.channels = channels;
  t.fs = fs;
  for (std::size_t c = 0; c < channels.size(); ++c)
    t.samples.push_back(noise(static_cast<std::size_t>(std::lround(fs * seconds)), seed * 1000 + c));
  return t;
}

}  // namespace testing
