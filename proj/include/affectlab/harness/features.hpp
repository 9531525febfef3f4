#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "affectlab/core/exec.hpp"
#include "affectlab/core/manifest.hpp"
#include "affectlab/eeg/features.hpp"
#include "affectlab/embedding/provider.hpp"

namespace affectlab::harness {

// Per-trial extraction methods. Embedding methods yield the raw embedding;
// the PCA down to 30 is fitted per fold on training rows only.
enum class Method {
  eeg_psd,
  eeg_entropy,
  eeg_topo,      // embedding of the trial topo image
  cardiac_hrv,
  cardiac_spec,  // embedding of the channel-0 spectrogram
  gsr_stats,
  gsr_spec,      // embedding of the spectrogram
  face_geometry,
  face_emb,      // mean/p95/std of per-crop embeddings
  eeg_face_seconds,  // per-second [topo embedding ++ mean frame geometry], for the LSTM
};

std::string_view to_string(Method m);
Method parse_method(std::string_view s);
bool is_embedding(Method m);
bool is_sequence(Method m);
const std::vector<Method>& all_methods();

// Whether a trial has the inputs the method needs; `why` names what is missing.
bool available(Method m, const TrialEntry& trial, std::string* why = nullptr);

struct ExtractConfig {
  eeg::EntropyFeatureConfig entropy;
  const embedding::EmbeddingProvider* provider = nullptr;  // needed by embedding methods
};

// Raw output of one method on one trial. Sequence methods store a row-major
// [rows x names.size()] matrix, one row per second.
struct RawFeatures {
  std::vector<std::string> names;
  std::vector<double> values;
  std::size_t rows = 1;
};

// Canonical text of everything the method's output depends on except the
// input bytes: method, parameters, layout, raw flag, provider id.
std::string method_config(Method m, const DatasetManifest& manifest, const ExtractConfig& cfg);

// FNV-1a 64, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

RawFeatures compute_method(Method m, const DatasetManifest& manifest, const SubjectEntry& subject,
                           const TrialEntry& trial, const ExtractConfig& cfg);

// Versioned binary cache, one file per (trial, method, key):
//   <dir>/<dataset>/<trial>__<method>__<key>.bin
// The key hashes the method config and the trial's input file bytes, so a
// change to either misses only the affected methods. Unreadable or
// old-version files are recomputed with a notice. Thread-safe.
class FeatureStore {
 public:
  static constexpr std::uint32_t kVersion = 1;

  // An empty dir disables caching.
  explicit FeatureStore(std::filesystem::path dir);
  // $AFFECTLAB_CACHE if set, else `fallback`.
  static std::filesystem::path resolve_dir(const std::filesystem::path& fallback);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path_for(const std::string& dataset, const std::string& trial, Method m,
                                 const std::string& key) const;
  std::optional<RawFeatures> get(const std::string& dataset, const std::string& trial, Method m, const std::string& key);
  void put(const std::string& dataset, const std::string& trial, Method m, const std::string& key,
           const RawFeatures& f);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  std::vector<std::string> notices() const;

 private:
  std::filesystem::path dir_;
  std::atomic<std::size_t> hits_{0}, misses_{0};
  mutable std::mutex mu_;
  std::vector<std::string> notices_;
};

// Which trials a missing modality removes.
//   per_experiment   only trials lacking an input this experiment uses
//   all_experiments  trials lacking any modality the dataset records
enum class MissingPolicy { per_experiment, all_experiments };

std::string_view to_string(MissingPolicy p);
MissingPolicy parse_missing_policy(std::string_view s);

struct SkippedTrial {
  std::string trial_id;
  std::string reason;
};

// Extracted features of one dataset, rows aligned with trial_ids.
struct FeatureTable {
  std::string dataset_id;
  RatingScale scale;
  bool provides_liking = false;
  std::string layout_ref;
  std::vector<std::string> subjects;  // every subject in the manifest, in order
  std::vector<std::string> trial_ids;
  std::vector<std::string> subject_ids;
  std::vector<TrialLabels> labels;
  std::map<Method, Eigen::MatrixXd> raw;  // rows = trials; sequences flattened row-major
  std::map<Method, std::vector<std::string>> names;
  std::map<Method, std::size_t> seq_rows;  // sequence methods: timesteps per trial
  std::vector<SkippedTrial> skipped;
  MissingPolicy policy = MissingPolicy::per_experiment;

  std::size_t size() const { return trial_ids.size(); }
  std::vector<Method> methods() const;
};

// Trials are extracted in parallel; a trial whose extraction throws is
// skipped with the error as its reason.
FeatureTable extract_table(const DatasetManifest& manifest, std::span<const Method> methods, const ExtractConfig& cfg,
                           FeatureStore* store, MissingPolicy policy = MissingPolicy::per_experiment,
                           Exec exec = Exec::parallel);

// Concatenates tables with identical method sets. Every method must carry the
// same feature names on every table, else FeatureSetMismatch naming the block.
// Subject ids are prefixed with the dataset id to keep them apart.
FeatureTable concat_tables(std::span<const FeatureTable> tables);

}  // namespace affectlab::harness
