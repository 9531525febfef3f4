#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affectlab/eeg/features.hpp"
#include "affectlab/harness/features.hpp"
#include "affectlab/harness/stats.hpp"
#include "affectlab/learn/elm.hpp"
#include "affectlab/learn/lstm.hpp"
#include "affectlab/learn/metrics.hpp"
#include "affectlab/learn/pca.hpp"
#include "affectlab/learn/scaler.hpp"

namespace affectlab::harness {

enum class Target { valence, arousal, liking, emotion };
enum class Protocol { loso, split, combined, transfer };

std::string_view to_string(Target t);
std::string_view to_string(Protocol p);
Target parse_target(std::string_view s);
Protocol parse_protocol(std::string_view s);
int class_count(Target t);

struct ClassifierConfig {
  learn::ElmConfig elm;          // elm.seed is replaced per fold
  std::vector<int> hidden_grid;  // non-empty: pick H per fold on a train-only holdout
  int pca_components = 30;       // per embedding block, capped at n_train - 1
  // Sequence path: per-second topo embedding -> PCA, then the 30 geometry
  // values appended (30 + 30 = 60 per step by default).
  int sequence_pca = 30;
  learn::LstmConfig lstm;
};

struct ExperimentSpec {
  std::string name = "experiment";
  // Aliases EEG, Cardiac, GSR, Face1, Face2, EEG+Face-LSTM, or method names.
  std::vector<std::string> feature_sets;
  bool eeg_entropy = true;  // whether the EEG alias includes the pairwise entropy block
  Target target = Target::valence;
  Protocol protocol = Protocol::loso;
  std::vector<std::filesystem::path> datasets;    // loso: 1, split: >= 1, combined: >= 2
  std::vector<std::filesystem::path> train_sets;  // transfer
  std::filesystem::path test_set;                 // transfer
  int resamples = 10;
  double test_fraction = 0.2;
  ClassifierConfig classifier;
  MissingPolicy missing = MissingPolicy::per_experiment;
  eeg::EntropyFeatureConfig entropy;
  std::string provider = "stub";  // "stub" or "sidecar"
  std::uint64_t provider_seed = 0;
  std::filesystem::path sidecar_root;
  double sidecar_timeout_s = 600.0;
  bool shuffle_labels = false;  // permutation control
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<Method> methods() const;
};

// Relative dataset paths are resolved against `base`.
ExperimentSpec parse_spec(const std::string& json_text, const std::filesystem::path& base = {});
ExperimentSpec load_spec(const std::filesystem::path& path);
// Canonical JSON (sorted keys, 2-space indent); parse_spec(spec_to_json(s)) == s.
std::string spec_to_json(const ExperimentSpec& spec);

std::vector<int> target_labels(const FeatureTable& table, Target target);

// Everything fitted on one training set. Fitting reads only training rows.
struct FittedPipeline {
  std::vector<Method> methods;
  std::map<Method, learn::PcaModel> pca;
  learn::RangeScaler scaler;
  int hidden = 0;
  std::optional<learn::ElmModel> elm;
  std::optional<learn::LstmModel> lstm;

  // Serialized parameters; equal bytes mean equal models.
  std::vector<std::uint8_t> fingerprint() const;
};

FittedPipeline fit_pipeline(const FeatureTable& table, std::span<const std::size_t> train,
                            const std::vector<int>& labels, int classes, const ClassifierConfig& cfg,
                            std::uint64_t seed);
std::vector<int> predict_pipeline(const FittedPipeline& p, const FeatureTable& table, std::span<const std::size_t> rows);

struct TrialPrediction {
  std::string trial_id;
  std::string subject_id;
  std::string fold;
  int truth = 0;
  int pred = 0;
};

struct ExperimentReport {
  std::string name;
  std::string protocol;
  std::string target;
  int classes = 2;
  std::vector<std::string> methods;
  std::string datasets;
  learn::EvalReport eval;
  std::size_t n_scored = 0;
  std::size_t n_correct = 0;
  Interval accuracy_ci;  // Clopper-Pearson 95 % on pooled predictions, as fractions
  std::vector<TrialPrediction> predictions;
  std::string missing_policy;
  std::vector<SkippedTrial> excluded;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> provenance;
};

// One fold per subject; folds run concurrently and merge in subject order.
ExperimentReport run_loso(const FeatureTable& table, const ExperimentSpec& spec);
// `resamples` seeded 80/20 splits; a split whose training part lacks a class
// is redrawn (up to 10 times). Accuracy/F1 are means over resamples.
ExperimentReport run_split(const FeatureTable& table, const ExperimentSpec& spec);
// Fits on the union of the training tables, scores every test trial once.
ExperimentReport run_transfer(std::span<const FeatureTable> train, const FeatureTable& test,
                              const ExperimentSpec& spec);

struct PurityResult {
  bool ok = true;
  std::vector<std::string> failures;
};

// Per LOSO fold: the fit must not change when test rows and test labels are
// replaced by garbage, and scoring the test rows twice must agree. Then the
// whole LOSO report is produced twice and compared.
PurityResult purity_check(const FeatureTable& table, const ExperimentSpec& spec);

// Loads the spec's manifests, extracts (through the store), runs the protocol.
ExperimentReport run_experiment(const ExperimentSpec& spec, const embedding::EmbeddingProvider& provider,
                                FeatureStore* store);

// Provider named by the spec: stub(seed) or sidecar(root).
std::unique_ptr<embedding::EmbeddingProvider> make_provider(const ExperimentSpec& spec);

}  // namespace affectlab::harness
