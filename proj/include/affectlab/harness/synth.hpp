#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace affectlab::harness {

// What a planted effect drives, for trials whose target class is High:
//   "alpha", "beta", "theta"  extra band rhythm at the effect electrodes
//   "hr"                      +12 bpm per unit size, and lower beat jitter
//   "scr"                     skin-conductance event rate x (1 + size)
//   "mouth"                   mouth corners pulled out and up (a smile)
//   "brow"                    eyebrows and upper lids raised
struct PlantedEffect {
  std::string feature;
  double size = 1.0;
};

struct SynthConfig {
  std::string dataset_id = "synth";
  int n_subjects = 10;
  int trials_per_subject = 20;
  double trial_length_s = 20.0;
  std::string montage = "deap32";  // or "emotiv14"
  double eeg_fs = 128.0;
  double cardiac_fs = 64.0;
  int cardiac_channels = 1;  // 1 = PPG, more = ECG leads
  double gsr_fs = 32.0;
  double face_fps = 4.0;
  int face_images = 3;  // face crops per trial
  // target ("valence", "arousal") -> effects; an empty map plants nothing.
  std::map<std::string, std::vector<PlantedEffect>> effects;
  // Probability that a trial lacks each of cardiac, GSR and face data.
  double missing_rate = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// valence: alpha over left-frontal sites + smile; arousal: beta over
// posterior sites + faster heart + more SCRs + raised brows.
std::map<std::string, std::vector<PlantedEffect>> default_effects(double size);

// EEG sites that carry each target's band effect (present in both montages).
const std::vector<std::string>& effect_sites(const std::string& target);

// JSON object with the SynthConfig field names; "effects" maps a target to
// a list of {"feature", "size"}, or "effect_size": x plants default_effects(x).
// Unknown keys are an error.
SynthConfig parse_synth_config(const std::string& json_text);

// Writes signals (CSV), landmarks (CSV), face crops (PNG) and manifest.json
// under `dir`; returns the manifest path. Same config, same bytes.
std::filesystem::path synth_generate(const SynthConfig& cfg, const std::filesystem::path& dir);

}  // namespace affectlab::harness
