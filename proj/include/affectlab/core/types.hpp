#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affectlab {

enum class Modality { EEG, ECG, PPG, GSR };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view s);

// One modality of one stimulus presentation. samples[c][t] in signal units.
struct TrialRecording {
  std::string trial_id;
  std::string subject_id;
  Modality modality = Modality::EEG;
  std::vector<std::string> channels;
  std::vector<std::vector<double>> samples;
  double fs = 0.0;

  std::size_t n_channels() const { return samples.size(); }
  std::size_t n_samples() const { return samples.empty() ? 0 : samples.front().size(); }
  double duration_s() const { return fs > 0 ? static_cast<double>(n_samples()) / fs : 0.0; }
  std::span<const double> channel(std::size_t c) const { return samples.at(c); }

  // fs > 0, >= 1 channel, equal lengths, names match rows, all finite.
  void validate() const;
};

// Named, ordered feature vector with provenance.
struct FeatureBlock {
  std::string trial_id;
  std::string family;
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct RatingScale {
  double min = 1.0;
  double max = 9.0;
  double midpoint() const { return 0.5 * (min + max); }
  bool contains(double r) const { return r >= min && r <= max; }
};

struct TrialLabels {
  double valence = 0.0;
  double arousal = 0.0;
  std::optional<double> liking;
  double scale_midpoint = 5.0;
};

enum class ClassLabel { Low = 0, High = 1 };
enum class EmotionClass { HVHA = 0, LVHA = 1, LVLA = 2, HVLA = 3 };

std::string_view to_string(EmotionClass e);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct FaceBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
};

inline constexpr std::size_t kLandmarkCount = 49;

struct LandmarkFrame {
  double t = 0.0;
  std::array<Point2, kLandmarkCount> points{};
  FaceBox box;
};

struct FaceLandmarkTrack {
  std::string trial_id;
  std::vector<LandmarkFrame> frames;

  // box w,h > 0; timestamps strictly increasing.
  void validate() const;
};

}  // namespace affectlab
