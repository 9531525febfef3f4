#pragma once

#include <Eigen/Core>

#include "affectlab/core/types.hpp"
#include "affectlab/embedding/provider.hpp"
#include "affectlab/image/image.hpp"
#include "affectlab/learn/pca.hpp"

namespace affectlab::gsr {

// On the 0.25 s moving average: [peak count, mean |peak height|] followed by
// the six diff moments. Peaks are found on the 0-1 scaled smoothed signal
// (>= 1 s apart, >= 0.1 high); heights are taken on the smoothed signal
// relative to its 10th percentile. One channel, at least 3 s.
FeatureBlock gsr_stat_features(const TrialRecording& trial);

// 0-2 Hz log-power spectrogram (8 s Hann, 1 s hop) as a 224x224 Parula image.
RgbImage gsr_spectrogram_image(const TrialRecording& trial);

Eigen::VectorXd gsr_spectrogram_embedding(const TrialRecording& trial, const embedding::EmbeddingProvider& provider);

// Stats block followed by the PCA-projected spectrogram embedding (<= 30).
FeatureBlock gsr_features(const TrialRecording& trial, const embedding::EmbeddingProvider& provider,
                          const learn::PcaModel& pca);

}  // namespace affectlab::gsr
