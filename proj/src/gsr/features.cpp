#include "affectlab/gsr/features.hpp"

#include <cmath>
#include <exception>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/filters.hpp"
#include "affectlab/dsp/moments.hpp"
#include "affectlab/dsp/peaks.hpp"
#include "affectlab/dsp/spectrogram_image.hpp"

namespace affectlab::gsr {

namespace {

void require_gsr(const TrialRecording& trial, const char* what) {
  if (trial.modality != Modality::GSR) throw Error(std::string(what) + ": trial " + trial.trial_id + " is not GSR");
  trial.validate();
  if (trial.n_channels() != 1) throw Error(std::string(what) + ": trial " + trial.trial_id + ": expected one GSR channel");
}

}  // namespace

FeatureBlock gsr_stat_features(const TrialRecording& trial) {
  require_gsr(trial, "gsr_stat_features");
  if (trial.duration_s() < 3.0) throw Error("trial " + trial.trial_id + ": GSR shorter than 3 s");
  const auto smooth = dsp::moving_average(trial.channel(0), trial.fs, 0.25);
  const auto peaks = dsp::detect_peaks(dsp::minmax_scale(smooth), trial.fs, 1.0, 0.1);
  const double base = dsp::percentile(smooth, 0.10);
  double height = 0.0;
  for (auto p : peaks) height += std::abs(smooth[p] - base);
  if (!peaks.empty()) height /= static_cast<double>(peaks.size());
  const auto m = dsp::diff_moments(smooth);

  FeatureBlock block;
  block.trial_id = trial.trial_id;
  block.family = "gsr_stats";
  block.names = {"peak_count", "mean_peak_height", "mean", "std", "mean_abs_d1", "mean_abs_d1_norm", "mean_abs_d2",
                 "mean_abs_d2_norm"};
  block.values = {static_cast<double>(peaks.size()), height, m.mean, m.std, m.mean_abs_d1, m.mean_abs_d1_norm,
                  m.mean_abs_d2, m.mean_abs_d2_norm};
  return block;
}

RgbImage gsr_spectrogram_image(const TrialRecording& trial) {
  require_gsr(trial, "gsr_spectrogram_image");
  if (!(trial.fs > 4.0)) throw Error("gsr_spectrogram_image: fs must exceed 4 Hz");
  if (trial.duration_s() < 8.0) throw Error("trial " + trial.trial_id + ": too short for one 8 s STFT window");
  return dsp::spectrogram_image(trial.channel(0), trial.fs, 2.0, {8.0, 1.0});
}

Eigen::VectorXd gsr_spectrogram_embedding(const TrialRecording& trial, const embedding::EmbeddingProvider& provider) {
  const auto img = gsr_spectrogram_image(trial);
  try {
    return provider.embed(img, embedding::ImageProfile::generic);
  } catch (const std::exception& e) {
    throw Error("trial " + trial.trial_id + ": embedding failed: " + e.what());
  }
}

FeatureBlock gsr_features(const TrialRecording& trial, const embedding::EmbeddingProvider& provider,
                          const learn::PcaModel& pca) {
  if (pca.k() > 30) throw Error("gsr_features: PCA keeps more than 30 components");
  if (pca.d() != static_cast<Eigen::Index>(provider.dim())) throw Error("gsr_features: PCA input dim != provider dim");
  auto block = gsr_stat_features(trial);
  block.family = "gsr";
  const auto z = pca.transform(gsr_spectrogram_embedding(trial, provider));
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    block.names.push_back("gsr_spec:pc" + std::to_string(i + 1));
    block.values.push_back(z(i));
  }
  return block;
}

}  // namespace affectlab::gsr
