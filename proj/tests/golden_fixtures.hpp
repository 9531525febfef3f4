#pragma once

// Fixed inputs for the shipped golden PNGs (unit test and acceptance run).

#include <cmath>
#include <string>
#include <vector>

#include "affectlab/cardiac/features.hpp"
#include "affectlab/eeg/features.hpp"
#include "affectlab/gsr/features.hpp"
#include "affectlab/image/image.hpp"
#include "support.hpp"

namespace testing::golden {

inline affectlab::TrialRecording eeg_trial() {
  using namespace affectlab;
  const auto layout = eeg::ScalpLayout::builtin("emotiv14");
  TrialRecording t;
  t.trial_id = "golden_eeg";
  t.modality = Modality::EEG;
  t.fs = 128;
  for (const auto& e : layout.entries()) t.channels.push_back(e.name);
  for (std::size_t c = 0; c < t.channels.size(); ++c) {
    const auto th = sine(6.0, 1.0 + 0.15 * c, 128, 8);
    const auto al = sine(10.0, 2.5 - 0.12 * c, 128, 8, 0.2 * c);
    const auto be = sine(21.0, 0.4 + 0.05 * ((c * 5) % 14), 128, 8);
    const auto nz = noise(th.size(), 1000 + c, 0.3);
    std::vector<double> x(th.size());
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = th[n] + al[n] + be[n] + nz[n];
    t.samples.push_back(x);
  }
  return t;
}

inline affectlab::TrialRecording ppg_trial() {
  using namespace affectlab;
  TrialRecording t;
  t.trial_id = "golden_ppg";
  t.modality = Modality::PPG;
  t.fs = 64;
  t.channels = {"ppg"};
  std::vector<double> beats;
  for (double s = 0.3; s < 30; s += 60.0 / (66.0 + 10.0 * std::sin(s / 5.0))) beats.push_back(s);
  auto x = pulse_train(beats, 64, 30, 0.08);
  const auto drift = sine(0.2, 0.3, 64, 30);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] += drift[n];
  t.samples = {x};
  return t;
}

inline affectlab::TrialRecording gsr_trial() {
  using namespace affectlab;
  TrialRecording t;
  t.trial_id = "golden_gsr";
  t.modality = Modality::GSR;
  t.fs = 32;
  t.channels = {"gsr"};
  const std::size_t n = 32 * 40;
  std::vector<double> x(n);
  const auto nz = noise(n, 77, 0.002);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / 32.0;
    x[i] = 2.0 + 0.01 * s + nz[i];
    for (double onset : {5.0, 13.5, 22.0, 31.0})
      if (s > onset) x[i] += 0.3 * (std::exp(-(s - onset) / 4.0) - std::exp(-(s - onset) / 0.75));
  }
  t.samples = {x};
  return t;
}

struct Render {
  std::string file;
  affectlab::RgbImage image;
};

inline std::vector<Render> renders() {
  using namespace affectlab;
  const auto layout = eeg::ScalpLayout::builtin("emotiv14");
  const auto e = eeg_trial();
  return {{"topo_emotiv14.png", eeg::trial_topo_image(e, layout)},
          {"topo_second0.png", eeg::per_second_eeg_images(e, layout).front()},
          {"cardiac_spec.png", cardiac::cardiac_spectrogram_image(ppg_trial(), 0)},
          {"gsr_spec.png", gsr::gsr_spectrogram_image(gsr_trial())}};
}

}  // namespace testing::golden
