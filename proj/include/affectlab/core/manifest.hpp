#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affectlab/core/types.hpp"

namespace affectlab {

struct TrialEntry {
  std::string id;
  // Modalities absent from this map are missing for the trial.
  std::map<Modality, std::filesystem::path> signals;
  std::optional<std::filesystem::path> landmarks;
  std::vector<std::filesystem::path> face_frames;
  TrialLabels labels;

  bool has(Modality m) const { return signals.count(m) != 0; }
};

struct SubjectEntry {
  std::string id;
  std::vector<TrialEntry> trials;
};

struct DatasetManifest {
  std::string dataset_id;
  std::vector<SubjectEntry> subjects;
  RatingScale rating_scale;
  std::map<Modality, double> sampling_rates;
  std::map<Modality, std::vector<std::string>> channels;
  // Builtin layout name ("deap32", "emotiv14") or a JSON path relative to root.
  std::string scalp_layout_ref;
  // "raw" EEG is band-passed 4-45 Hz before feature extraction.
  bool raw_eeg = false;
  std::string notes;
  std::filesystem::path root;

  std::size_t trial_count() const;
  bool provides_liking() const;
};

// Parses and validates: unique subject ids, unique trial ids, rating min < max,
// ratings inside the scale, every listed file present.
DatasetManifest load_manifest(const std::filesystem::path& path);

// Paths are written relative to `manifest.root`.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

TrialRecording load_trial(const DatasetManifest& manifest, const SubjectEntry& subject,
                          const TrialEntry& trial, Modality modality);

FaceLandmarkTrack load_landmarks(const DatasetManifest& manifest, const TrialEntry& trial);

}  // namespace affectlab
