#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "affectlab/core/exec.hpp"
#include "affectlab/core/types.hpp"
#include "affectlab/embedding/provider.hpp"
#include "affectlab/eeg/layout.hpp"
#include "affectlab/eeg/mutual_info.hpp"
#include "affectlab/eeg/topo.hpp"
#include "affectlab/image/image.hpp"
#include "affectlab/learn/pca.hpp"

namespace affectlab::eeg {

inline constexpr std::size_t kDeepFeatures = 30;

// 4-45 Hz band-pass of every channel, for recordings marked raw.
TrialRecording preprocess_raw_eeg(const TrialRecording& trial);

// Welch band power [band][channel] for theta, alpha, beta (1 s Hann, 0.5 s hop).
std::array<std::vector<double>, 3> band_powers(const TrialRecording& trial, Exec exec = Exec::parallel);

// 3*C features, band-major: theta:<ch>..., alpha:<ch>..., beta:<ch>...
// Every channel must resolve in the layout.
FeatureBlock band_psd_features(const TrialRecording& trial, const ScalpLayout& layout, Exec exec = Exec::parallel);

// Which channel of the pair (i < j) is conditioned on.
enum class PairDirection { j_given_i, i_given_j };

struct EntropyFeatureConfig {
  MutualInfoConfig estimator;
  PairDirection direction = PairDirection::j_given_i;
};

// C(C-1)/2 conditional entropies, pairs in lexicographic (i, j) order.
// Pairs run in parallel; each pair is computed the same way either way, so
// serial and parallel results are identical.
FeatureBlock pairwise_entropy_features(const TrialRecording& trial, const EntropyFeatureConfig& cfg = {},
                                       Exec exec = Exec::parallel);

// Band powers -> three normalized topo maps -> weighted RGB composite.
RgbImage topo_rgb(const std::array<std::vector<double>, 3>& powers, std::span<const std::string> channels,
                  const ScalpLayout& layout, int grid = kTopoGrid);
RgbImage trial_topo_image(const TrialRecording& trial, const ScalpLayout& layout, int grid = kTopoGrid);

// Trial topo image resized to 224x224 and embedded (generic profile).
Eigen::VectorXd eeg_topo_embedding(const TrialRecording& trial, const ScalpLayout& layout,
                                   const embedding::EmbeddingProvider& provider);

// Embedding projected by a fitted PCA with at most 30 components.
FeatureBlock eeg_deep_features(const TrialRecording& trial, const ScalpLayout& layout,
                               const embedding::EmbeddingProvider& provider, const learn::PcaModel& pca);

// One topo image per whole second, each from that second alone (a single
// 1 s Welch frame). Needs at least 1 s of signal.
std::vector<RgbImage> per_second_eeg_images(const TrialRecording& trial, const ScalpLayout& layout,
                                            int grid = kTopoGrid);

}  // namespace affectlab::eeg
