#include "affectlab/core/types.hpp"

#include <cmath>

#include "affectlab/core/error.hpp"

namespace affectlab {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::EEG: return "EEG";
    case Modality::ECG: return "ECG";
    case Modality::PPG: return "PPG";
    case Modality::GSR: return "GSR";
  }
  return "?";
}

Modality parse_modality(std::string_view s) {
  if (s == "EEG") return Modality::EEG;
  if (s == "ECG") return Modality::ECG;
  if (s == "PPG") return Modality::PPG;
  if (s == "GSR") return Modality::GSR;
  throw Error("unknown modality '" + std::string(s) + "'");
}

std::string_view to_string(EmotionClass e) {
  switch (e) {
    case EmotionClass::HVHA: return "HVHA";
    case EmotionClass::LVHA: return "LVHA";
    case EmotionClass::LVLA: return "LVLA";
    case EmotionClass::HVLA: return "HVLA";
  }
  return "?";
}

void TrialRecording::validate() const {
  const std::string ctx = "trial " + trial_id + " (" + std::string(to_string(modality)) + "): ";
  if (!(fs > 0.0)) throw Error(ctx + "sampling rate must be positive");
  if (samples.empty()) throw Error(ctx + "no channels");
  if (channels.size() != samples.size())
    throw Error(ctx + "channel name count " + std::to_string(channels.size()) + " != data columns " +
                std::to_string(samples.size()));
  const std::size_t n = samples.front().size();
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c].size() != n) throw Error(ctx + "channels differ in length");
    for (double v : samples[c])
      if (!std::isfinite(v)) throw Error(ctx + "non-finite sample in channel " + channels[c]);
  }
}

void FaceLandmarkTrack::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (!(f.box.w > 0.0) || !(f.box.h > 0.0))
      throw Error("landmarks " + trial_id + ": degenerate face box at frame " + std::to_string(i));
    if (i > 0 && !(f.t > frames[i - 1].t))
      throw Error("landmarks " + trial_id + ": timestamps not strictly increasing at frame " + std::to_string(i));
  }
}

}  // namespace affectlab
