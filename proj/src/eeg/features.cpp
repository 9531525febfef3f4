#include "affectlab/eeg/features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/filters.hpp"
#include "affectlab/dsp/spectral.hpp"

namespace affectlab::eeg {

namespace {

void require_eeg(const TrialRecording& trial, const char* what) {
  if (trial.modality != Modality::EEG) throw Error(std::string(what) + ": trial " + trial.trial_id + " is not EEG");
  trial.validate();
}

std::array<double, 3> powers_from_psd(const dsp::PsdEstimate& psd) {
  const auto& bands = dsp::eeg_bands();
  return {dsp::band_power(psd, bands[0]), dsp::band_power(psd, bands[1]), dsp::band_power(psd, bands[2])};
}

double band_top() { return dsp::eeg_bands().back().high; }

}  // namespace

TrialRecording preprocess_raw_eeg(const TrialRecording& trial) {
  require_eeg(trial, "preprocess_raw_eeg");
  TrialRecording out = trial;
  for (auto& ch : out.samples) ch = dsp::bandpass(ch, trial.fs, 4.0, 45.0);
  return out;
}

std::array<std::vector<double>, 3> band_powers(const TrialRecording& trial, Exec exec) {
  require_eeg(trial, "band_powers");
  const std::size_t c = trial.n_channels();
  std::array<std::vector<double>, 3> out;
  for (auto& b : out) b.assign(c, 0.0);
  std::vector<std::string> errors(c);
  const auto one = [&](std::size_t i) {
    try {
      const auto p = powers_from_psd(dsp::welch_psd(trial.channel(i), trial.fs, {}, band_top()));
      for (int b = 0; b < 3; ++b) out[b][i] = p[b];
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < c; ++i) one(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < c; ++i) one(i);
  }
  for (std::size_t i = 0; i < c; ++i)
    if (!errors[i].empty()) throw Error("trial " + trial.trial_id + ": channel " + trial.channels[i] + ": " + errors[i]);
  return out;
}

FeatureBlock band_psd_features(const TrialRecording& trial, const ScalpLayout& layout, Exec exec) {
  require_eeg(trial, "band_psd_features");
  for (const auto& ch : trial.channels)
    if (!layout.find(ch)) throw Error("trial " + trial.trial_id + ": unknown channel '" + ch + "' for scalp layout");
  const auto p = band_powers(trial, exec);
  FeatureBlock block;
  block.trial_id = trial.trial_id;
  block.family = "eeg_psd";
  const auto& bands = dsp::eeg_bands();
  for (int b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < trial.n_channels(); ++i) {
      block.names.push_back(bands[b].name + ":" + trial.channels[i]);
      block.values.push_back(p[b][i]);
    }
  return block;
}

FeatureBlock pairwise_entropy_features(const TrialRecording& trial, const EntropyFeatureConfig& cfg, Exec exec) {
  require_eeg(trial, "pairwise_entropy_features");
  cfg.estimator.validate();
  const std::size_t c = trial.n_channels();
  if (c < 2) throw Error("trial " + trial.trial_id + ": entropy features need at least 2 channels");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i + 1; j < c; ++j) pairs.emplace_back(i, j);

  std::vector<double> values(pairs.size(), 0.0);
  std::vector<std::string> errors(pairs.size());
  const auto one = [&](std::size_t k) {
    auto [i, j] = pairs[k];
    if (cfg.direction == PairDirection::i_given_j) std::swap(i, j);
    try {
      // H(ch_j | ch_i): ch_i is the conditioning series
      values[k] = parzen_entropy(trial.channel(i), trial.channel(j), cfg.estimator, Exec::serial).conditional_entropy;
    } catch (const std::exception& e) {
      errors[k] = "pair (" + trial.channels[pairs[k].first] + ", " + trial.channels[pairs[k].second] + "): " + e.what();
    }
  };
  if (exec == Exec::serial) {
    for (std::size_t k = 0; k < pairs.size(); ++k) one(k);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t k = 0; k < pairs.size(); ++k) one(k);
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error("trial " + trial.trial_id + ": entropy feature set failed: " + e);

  FeatureBlock block;
  block.trial_id = trial.trial_id;
  block.family = "eeg_entropy";
  block.values = std::move(values);
  for (const auto& [i, j] : pairs) {
    const auto& given = cfg.direction == PairDirection::j_given_i ? trial.channels[i] : trial.channels[j];
    const auto& target = cfg.direction == PairDirection::j_given_i ? trial.channels[j] : trial.channels[i];
    block.names.push_back("H(" + target + "|" + given + ")");
  }
  return block;
}

RgbImage topo_rgb(const std::array<std::vector<double>, 3>& powers, std::span<const std::string> channels,
                  const ScalpLayout& layout, int grid) {
  std::array<TopoImage, 3> maps;
  std::array<double, 3> maxima{};
  for (int b = 0; b < 3; ++b) {
    maps[b] = render_topo_band(powers[b], channels, layout, grid);
    maxima[b] = *std::max_element(powers[b].begin(), powers[b].end());
  }
  return compose_rgb_topo(maps[0], maps[1], maps[2], maxima);
}

RgbImage trial_topo_image(const TrialRecording& trial, const ScalpLayout& layout, int grid) {
  return topo_rgb(band_powers(trial), trial.channels, layout, grid);
}

Eigen::VectorXd eeg_topo_embedding(const TrialRecording& trial, const ScalpLayout& layout,
                                   const embedding::EmbeddingProvider& provider) {
  const auto img = resize_bilinear(trial_topo_image(trial, layout), kEmbeddingImageSize, kEmbeddingImageSize);
  try {
    return provider.embed(img, embedding::ImageProfile::generic);
  } catch (const std::exception& e) {
    throw Error("trial " + trial.trial_id + ": embedding failed: " + e.what());
  }
}

FeatureBlock eeg_deep_features(const TrialRecording& trial, const ScalpLayout& layout,
                               const embedding::EmbeddingProvider& provider, const learn::PcaModel& pca) {
  if (pca.k() > static_cast<Eigen::Index>(kDeepFeatures)) throw Error("eeg_deep_features: PCA keeps more than 30 components");
  if (pca.d() != static_cast<Eigen::Index>(provider.dim())) throw Error("eeg_deep_features: PCA input dim != provider dim");
  const auto z = pca.transform(eeg_topo_embedding(trial, layout, provider));
  FeatureBlock block;
  block.trial_id = trial.trial_id;
  block.family = "eeg_topo";
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    block.names.push_back("topo:pc" + std::to_string(i + 1));
    block.values.push_back(z(i));
  }
  return block;
}

std::vector<RgbImage> per_second_eeg_images(const TrialRecording& trial, const ScalpLayout& layout, int grid) {
  require_eeg(trial, "per_second_eeg_images");
  const auto win = static_cast<std::size_t>(std::lround(trial.fs));
  const auto seconds = static_cast<std::size_t>(std::floor(trial.duration_s() + 1e-9));
  if (seconds < 1 || trial.n_samples() < win) throw Error("trial " + trial.trial_id + ": shorter than 1 s");
  std::vector<RgbImage> out;
  std::array<std::vector<double>, 3> p;
  for (auto& b : p) b.assign(trial.n_channels(), 0.0);
  for (std::size_t s = 0; s < seconds; ++s) {
    const auto start = static_cast<std::size_t>(std::lround(static_cast<double>(s) * trial.fs));
    if (start + win > trial.n_samples()) break;
    for (std::size_t i = 0; i < trial.n_channels(); ++i) {
      const auto seg = trial.channel(i).subspan(start, win);
      const auto bp = powers_from_psd(dsp::welch_psd(seg, trial.fs, {1.0, 1.0}, band_top()));
      for (int b = 0; b < 3; ++b) p[b][i] = bp[b];
    }
    out.push_back(topo_rgb(p, trial.channels, layout, grid));
  }
  return out;
}

}  // namespace affectlab::eeg
