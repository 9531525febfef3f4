#include "affectlab/cardiac/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/filters.hpp"
#include "affectlab/dsp/peaks.hpp"
#include "affectlab/dsp/spectrogram_image.hpp"

namespace affectlab::cardiac {

namespace {

void require_cardiac(const TrialRecording& trial, const char* what) {
  if (trial.modality != Modality::ECG && trial.modality != Modality::PPG)
    throw Error(std::string(what) + ": trial " + trial.trial_id + " is not ECG/PPG");
  trial.validate();
}

}  // namespace

std::vector<std::size_t> cardiac_peaks(const TrialRecording& trial, std::size_t channel) {
  require_cardiac(trial, "cardiac_peaks");
  if (channel >= trial.n_channels()) throw Error("cardiac_peaks: channel index out of range");
  const auto raw = trial.channel(channel);
  const auto [rlo, rhi] = std::minmax_element(raw.begin(), raw.end());
  const auto smooth = dsp::moving_average(raw, trial.fs, 0.25);
  const auto [lo, hi] = std::minmax_element(smooth.begin(), smooth.end());
  // averaging a constant can leave rounding-level ripple
  if (!(*rhi > *rlo) || !(*hi - *lo > 1e-12 * std::max(1.0, std::abs(*hi)))) throw Error("trial " + trial.trial_id + ": channel " + trial.channels[channel] + ": constant signal");
  return dsp::detect_peaks(dsp::minmax_scale(smooth), trial.fs, 0.5, 0.5);
}

RrSeries rr_intervals(std::span<const std::size_t> peaks, double fs, const std::string& channel) {
  if (!(fs > 0)) throw Error("rr_intervals: fs must be positive");
  RrSeries rr;
  rr.source_channel = channel;
  for (std::size_t i = 1; i < peaks.size(); ++i)
    rr.intervals.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) / fs);
  return rr;
}

double pnn50(std::span<const double> rr) {
  if (rr.size() < 2) throw Error("pnn50: need at least 2 RR intervals");
  std::size_t over = 0;
  for (std::size_t i = 0; i + 1 < rr.size(); ++i)
    if (std::llround(std::abs(rr[i + 1] - rr[i]) * 1e9) > 50'000'000) ++over;
  return 100.0 * static_cast<double>(over) / static_cast<double>(rr.size() - 1);
}

double pnn50(const RrSeries& rr) { return pnn50(rr.intervals); }

double heart_rate(std::size_t peak_count, double duration_s) {
  if (!(duration_s > 0)) throw Error("heart_rate: duration must be positive");
  return static_cast<double>(peak_count) * 60.0 / duration_s;
}

RgbImage cardiac_spectrogram_image(const TrialRecording& trial, std::size_t channel) {
  require_cardiac(trial, "cardiac_spectrogram_image");
  if (channel >= trial.n_channels()) throw Error("cardiac_spectrogram_image: channel index out of range");
  if (!(trial.fs > 10.0)) throw Error("cardiac_spectrogram_image: fs must exceed 10 Hz");
  if (trial.duration_s() < 4.0) throw Error("trial " + trial.trial_id + ": too short for one 4 s STFT window");
  return dsp::spectrogram_image(trial.channel(channel), trial.fs, 5.0, {4.0, 0.5});
}

FeatureBlock cardiac_hrv_features(const TrialRecording& trial) {
  FeatureBlock block;
  block.trial_id = trial.trial_id;
  block.family = "cardiac_hrv";
  for (std::size_t c = 0; c < trial.n_channels(); ++c) {
    const auto peaks = cardiac_peaks(trial, c);
    const auto rr = rr_intervals(peaks, trial.fs, trial.channels[c]);
    double p = 0.0;
    try {
      p = pnn50(rr);
    } catch (const Error& e) {
      throw Error("trial " + trial.trial_id + ": channel " + trial.channels[c] + ": " + e.what());
    }
    block.names.push_back("hr:" + trial.channels[c]);
    block.values.push_back(heart_rate(peaks.size(), trial.duration_s()));
    block.names.push_back("pnn50:" + trial.channels[c]);
    block.values.push_back(p);
  }
  return block;
}

Eigen::VectorXd cardiac_spectrogram_embedding(const TrialRecording& trial,
                                              const embedding::EmbeddingProvider& provider) {
  const auto img = cardiac_spectrogram_image(trial, 0);
  try {
    return provider.embed(img, embedding::ImageProfile::generic);
  } catch (const std::exception& e) {
    throw Error("trial " + trial.trial_id + ": embedding failed: " + e.what());
  }
}

FeatureBlock cardiac_features(const TrialRecording& trial, const embedding::EmbeddingProvider& provider,
                              const learn::PcaModel& pca) {
  if (pca.k() > 30) throw Error("cardiac_features: PCA keeps more than 30 components");
  if (pca.d() != static_cast<Eigen::Index>(provider.dim())) throw Error("cardiac_features: PCA input dim != provider dim");
  auto block = cardiac_hrv_features(trial);
  block.family = "cardiac";
  const auto z = pca.transform(cardiac_spectrogram_embedding(trial, provider));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    block.names.push_back("cardiac_spec:pc" + std::to_string(i + 1));
    block.values.push_back(z(i));
  }
  return block;
}

}  // namespace affectlab::cardiac
