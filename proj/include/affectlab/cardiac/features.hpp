#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "affectlab/core/types.hpp"
#include "affectlab/embedding/provider.hpp"
#include "affectlab/image/image.hpp"
#include "affectlab/learn/pca.hpp"

namespace affectlab::cardiac {

struct RrSeries {
  std::vector<double> intervals;  // seconds
  std::string source_channel;
};

// moving average (0.25 s) -> min-max to [0, 1] -> peaks at least 0.5 s apart
// and at least 0.5 high. A constant channel is an error ("constant signal").
std::vector<std::size_t> cardiac_peaks(const TrialRecording& trial, std::size_t channel);

RrSeries rr_intervals(std::span<const std::size_t> peaks, double fs, const std::string& channel = {});

// Percentage of successive differences strictly above 50 ms. Differences are
// compared at 1 ns resolution so an exact 50 ms step never counts because of
// rounding. Needs at least 2 intervals.
double pnn50(std::span<const double> intervals);
double pnn50(const RrSeries& rr);

// Peaks per minute over the actual trial duration.
double heart_rate(std::size_t peak_count, double duration_s);

// 0-5 Hz log-power spectrogram (4 s Hann, 0.5 s hop) as a 224x224 Parula image.
RgbImage cardiac_spectrogram_image(const TrialRecording& trial, std::size_t channel);

// Per channel [HR bpm, pNN50 %], names "hr:<ch>", "pnn50:<ch>".
FeatureBlock cardiac_hrv_features(const TrialRecording& trial);

// Embedding of the channel-0 spectrogram image.
Eigen::VectorXd cardiac_spectrogram_embedding(const TrialRecording& trial,
                                              const embedding::EmbeddingProvider& provider);

// HRV block followed by the PCA-projected spectrogram embedding (<= 30).
FeatureBlock cardiac_features(const TrialRecording& trial, const embedding::EmbeddingProvider& provider,
                              const learn::PcaModel& pca);

}  // namespace affectlab::cardiac
