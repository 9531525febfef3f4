#include "affectlab/harness/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iterator>
#include <set>

#include "affectlab/cardiac/features.hpp"
#include "affectlab/core/binary_io.hpp"
#include "affectlab/core/csv.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/dsp/spectral.hpp"
#include "affectlab/face/features.hpp"
#include "affectlab/gsr/features.hpp"

namespace affectlab::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMethodNames[] = {"eeg_psd",      "eeg_entropy", "eeg_topo",      "cardiac_hrv", "cardiac_spec",
                                        "gsr_stats",    "gsr_spec",    "face_geometry", "face_emb",    "eeg_face_seconds"};

std::optional<Modality> cardiac_modality(const TrialEntry& t) {
  if (t.has(Modality::ECG)) return Modality::ECG;
  if (t.has(Modality::PPG)) return Modality::PPG;
  return std::nullopt;
}

std::vector<fs::path> inputs_of(Method m, const TrialEntry& t) {
  switch (m) {
    case Method::eeg_psd:
    case Method::eeg_entropy:
    case Method::eeg_topo:
      return {t.signals.at(Modality::EEG)};
    case Method::cardiac_hrv:
    case Method::cardiac_spec:
      return {t.signals.at(*cardiac_modality(t))};
    case Method::gsr_stats:
    case Method::gsr_spec:
      return {t.signals.at(Modality::GSR)};
    case Method::face_geometry:
      return {*t.landmarks};
    case Method::face_emb:
      return t.face_frames;
    case Method::eeg_face_seconds:
      return {t.signals.at(Modality::EEG), *t.landmarks};
  }
  return {};
}

void fnv_update(std::uint64_t& h, const char* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(p[i]);
    h *= 0x100000001b3ULL;
  }
}

std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

std::string input_digest(const DatasetManifest& m, Method method, const TrialEntry& t) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& rel : inputs_of(method, t)) {
    std::ifstream in(m.root / rel, std::ios::binary);
    if (!in) throw Error("missing trial file: " + (m.root / rel).string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    fnv_update(h, rel.generic_string().data(), rel.generic_string().size());
    fnv_update(h, bytes.data(), bytes.size());
  }
  return hex64(h);
}

std::string layout_text(const DatasetManifest& m) {
  std::string s = "layout=" + m.scalp_layout_ref + "[";
  const auto layout = eeg::resolve_layout(m.scalp_layout_ref, m.root);
  for (const auto& e : layout.entries())
    s += e.name + ":" + format_double(e.u) + "," + format_double(e.v) + ";";
  return s + "]";
}

std::string bands_text() {
  std::string s = "bands=";
  for (const auto& b : dsp::eeg_bands()) s += b.name + ":" + format_double(b.low) + "-" + format_double(b.high) + ";";
  return s;
}

RawFeatures from_block(const FeatureBlock& b) { return {b.names, b.values, 1}; }

RawFeatures from_embedding(const Eigen::VectorXd& e, const std::string& prefix) {
  RawFeatures r;
  r.values.assign(e.data(), e.data() + e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) r.names.push_back(prefix + std::to_string(i));
  return r;
}

TrialRecording load_eeg(const DatasetManifest& m, const SubjectEntry& s, const TrialEntry& t) {
  auto rec = load_trial(m, s, t, Modality::EEG);
  return m.raw_eeg ? eeg::preprocess_raw_eeg(rec) : rec;
}

const embedding::EmbeddingProvider& provider_of(const ExtractConfig& cfg, Method m) {
  if (!cfg.provider) throw Error(std::string("method ") + std::string(to_string(m)) + " needs an embedding provider");
  return *cfg.provider;
}

RawFeatures eeg_face_seconds(const DatasetManifest& m, const SubjectEntry& s, const TrialEntry& t,
                             const ExtractConfig& cfg) {
  const auto rec = load_eeg(m, s, t);
  const auto layout = eeg::resolve_layout(m.scalp_layout_ref, m.root);
  const auto& provider = provider_of(cfg, Method::eeg_face_seconds);
  std::vector<RgbImage> imgs;
  for (const auto& img : eeg::per_second_eeg_images(rec, layout))
    imgs.push_back(resize_bilinear(img, kEmbeddingImageSize, kEmbeddingImageSize));
  const auto emb = provider.embed_batch(imgs, embedding::ImageProfile::generic);
  const auto track = load_landmarks(m, t);
  track.validate();

  RawFeatures r;
  r.rows = imgs.size();
  for (std::size_t i = 0; i < provider.dim(); ++i) r.names.push_back("topo_emb" + std::to_string(i));
  for (const auto& n : face::geometry_names()) r.names.push_back("geom:" + n);
  for (std::size_t sec = 0; sec < r.rows; ++sec) {
    std::array<double, face::kGeometryFeatures> mean{};
    int count = 0;
    for (const auto& f : track.frames) {
      if (f.t < static_cast<double>(sec) || f.t >= static_cast<double>(sec + 1)) continue;
      const auto g = face::frame_geometry(f.points, f.box);
      for (std::size_t k = 0; k < g.size(); ++k) mean[k] += g[k];
      ++count;
    }
    if (count == 0) throw Error("trial " + t.id + ": no face frames in second " + std::to_string(sec));
    const auto& e = emb[sec];
    r.values.insert(r.values.end(), e.data(), e.data() + e.size());
    for (double v : mean) r.values.push_back(v / count);
  }
  return r;
}

}  // namespace

std::string_view to_string(Method m) { return kMethodNames[static_cast<int>(m)]; }

Method parse_method(std::string_view s) {
  for (int i = 0; i < static_cast<int>(std::size(kMethodNames)); ++i)
    if (s == kMethodNames[i]) return static_cast<Method>(i);
  throw Error("unknown feature method '" + std::string(s) + "'");
}

bool is_embedding(Method m) {
  return m == Method::eeg_topo || m == Method::cardiac_spec || m == Method::gsr_spec || m == Method::face_emb;
}

bool is_sequence(Method m) { return m == Method::eeg_face_seconds; }

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = [] {
    std::vector<Method> v;
    for (int i = 0; i < static_cast<int>(std::size(kMethodNames)); ++i) v.push_back(static_cast<Method>(i));
    return v;
  }();
  return all;
}

bool available(Method m, const TrialEntry& t, std::string* why) {
  const auto miss = [&](const char* what) {
    if (why) *why = std::string("missing ") + what;
    return false;
  };
  switch (m) {
    case Method::eeg_psd:
    case Method::eeg_entropy:
    case Method::eeg_topo:
      return t.has(Modality::EEG) || miss("EEG");
    case Method::cardiac_hrv:
    case Method::cardiac_spec:
      return cardiac_modality(t).has_value() || miss("ECG/PPG");
    case Method::gsr_stats:
    case Method::gsr_spec:
      return t.has(Modality::GSR) || miss("GSR");
    case Method::face_geometry:
      return t.landmarks.has_value() || miss("landmarks");
    case Method::face_emb:
      return !t.face_frames.empty() || miss("face frames");
    case Method::eeg_face_seconds:
      if (!t.has(Modality::EEG)) return miss("EEG");
      return t.landmarks.has_value() || miss("landmarks");
  }
  return false;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv_update(h, bytes.data(), bytes.size());
  return hex64(h);
}

std::string method_config(Method m, const DatasetManifest& manifest, const ExtractConfig& cfg) {
  std::string s = std::string(to_string(m)) + ";v1;";
  const std::string raw = manifest.raw_eeg ? "raw=1;" : "raw=0;";
  const auto prov = [&] { return "provider=" + provider_of(cfg, m).id() + ";"; };
  switch (m) {
    case Method::eeg_psd:
      return s + raw + bands_text() + "welch=1,0.5;" + layout_text(manifest);
    case Method::eeg_entropy: {
      const auto& e = cfg.entropy.estimator;
      return s + raw + "h=" + format_double(e.bandwidth) + ";grid=" + std::to_string(e.eval_grid) +
             ";span=" + format_double(e.span_sigma) + ";cutoff=" + format_double(e.cutoff) +
             ";dir=" + (cfg.entropy.direction == eeg::PairDirection::j_given_i ? "j|i" : "i|j");
    }
    case Method::eeg_topo:
      return s + raw + bands_text() + "grid=" + std::to_string(eeg::kTopoGrid) + ";" + prov() + layout_text(manifest);
    case Method::cardiac_hrv:
      return s + "ma=0.25;dist=0.5;height=0.5;pnn=50ms";
    case Method::cardiac_spec:
      return s + "win=4,0.5;fmax=5;" + prov();
    case Method::gsr_stats:
      return s + "ma=0.25;dist=1;height=0.1;base=p10";
    case Method::gsr_spec:
      return s + "win=8,1;fmax=2;" + prov();
    case Method::face_geometry:
      return s + "table=1";
    case Method::face_emb:
      return s + "agg=mean,p95,std;" + prov();
    case Method::eeg_face_seconds:
      return s + raw + bands_text() + "grid=" + std::to_string(eeg::kTopoGrid) + ";geom=1;" + prov() +
             layout_text(manifest);
  }
  return s;
}

RawFeatures compute_method(Method m, const DatasetManifest& manifest, const SubjectEntry& subject,
                           const TrialEntry& trial, const ExtractConfig& cfg) {
  std::string why;
  if (!available(m, trial, &why)) throw Error("trial " + trial.id + ": " + why);
  switch (m) {
    case Method::eeg_psd: {
      const auto layout = eeg::resolve_layout(manifest.scalp_layout_ref, manifest.root);
      return from_block(eeg::band_psd_features(load_eeg(manifest, subject, trial), layout, Exec::serial));
    }
    case Method::eeg_entropy:
      return from_block(eeg::pairwise_entropy_features(load_eeg(manifest, subject, trial), cfg.entropy, Exec::serial));
    case Method::eeg_topo: {
      const auto layout = eeg::resolve_layout(manifest.scalp_layout_ref, manifest.root);
      return from_embedding(eeg::eeg_topo_embedding(load_eeg(manifest, subject, trial), layout, provider_of(cfg, m)),
                            "emb");
    }
    case Method::cardiac_hrv:
      return from_block(cardiac::cardiac_hrv_features(load_trial(manifest, subject, trial, *cardiac_modality(trial))));
    case Method::cardiac_spec:
      return from_embedding(cardiac::cardiac_spectrogram_embedding(
                                load_trial(manifest, subject, trial, *cardiac_modality(trial)), provider_of(cfg, m)),
                            "emb");
    case Method::gsr_stats:
      return from_block(gsr::gsr_stat_features(load_trial(manifest, subject, trial, Modality::GSR)));
    case Method::gsr_spec:
      return from_embedding(
          gsr::gsr_spectrogram_embedding(load_trial(manifest, subject, trial, Modality::GSR), provider_of(cfg, m)),
          "emb");
    case Method::face_geometry:
      return from_block(face::geometry_features(load_landmarks(manifest, trial)));
    case Method::face_emb: {
      std::vector<RgbImage> frames;
      for (const auto& rel : trial.face_frames) {
        auto img = read_png(manifest.root / rel);
        if (img.width != kEmbeddingImageSize || img.height != kEmbeddingImageSize)
          img = resize_bilinear(img, kEmbeddingImageSize, kEmbeddingImageSize);
        frames.push_back(std::move(img));
      }
      const auto agg = face::face_embedding_aggregate(frames, provider_of(cfg, m), trial.id);
      RawFeatures r;
      r.values.assign(agg.data(), agg.data() + agg.size());
      const auto d = static_cast<std::size_t>(agg.size() / 3);
      for (const char* stat : {"mean", "p95", "std"})
        for (std::size_t i = 0; i < d; ++i) r.names.push_back(std::string(stat) + ":emb" + std::to_string(i));
      return r;
    }
    case Method::eeg_face_seconds:
      return eeg_face_seconds(manifest, subject, trial, cfg);
  }
  throw Error("compute_method: unhandled method");
}

// ---- cache

FeatureStore::FeatureStore(fs::path dir) : dir_(std::move(dir)) {}

fs::path FeatureStore::resolve_dir(const fs::path& fallback) {
  if (const char* env = std::getenv("AFFECTLAB_CACHE"); env && *env) return fs::path(env);
  return fallback;
}

fs::path FeatureStore::path_for(const std::string& dataset, const std::string& trial, Method m,
                                const std::string& key) const {
  return dir_ / dataset / (trial + "__" + std::string(to_string(m)) + "__" + key + ".bin");
}

std::optional<RawFeatures> FeatureStore::get(const std::string& dataset, const std::string& trial, Method m,
                                             const std::string& key) {
  if (dir_.empty()) {
    ++misses_;
    return std::nullopt;
  }
  const auto p = path_for(dataset, trial, m, key);
  if (!fs::exists(p)) {
    ++misses_;
    return std::nullopt;
  }
  try {
    auto r = BinaryReader::open(p, "AFCF", kVersion);
    RawFeatures f;
    if (r.str() != to_string(m) || r.str() != trial) throw Error("record belongs to another entry");
    f.names = r.strings();
    f.rows = static_cast<std::size_t>(r.u64());
    const auto v = r.vec();
    f.values.assign(v.data(), v.data() + v.size());
    if (!r.done() || f.rows == 0 || f.values.size() != f.rows * f.names.size()) throw Error("inconsistent record");
    ++hits_;
    return f;
  } catch (const std::exception& e) {
    std::lock_guard lock(mu_);
    notices_.push_back("cache entry " + p.string() + " unusable (" + e.what() + "), recomputing");
    ++misses_;
    return std::nullopt;
  }
}

void FeatureStore::put(const std::string& dataset, const std::string& trial, Method m, const std::string& key,
                       const RawFeatures& f) {
  if (dir_.empty()) return;
  BinaryWriter w("AFCF", kVersion);
  w.str(std::string(to_string(m)));
  w.str(trial);
  w.strings(f.names);
  w.u64(f.rows);
  w.vec(Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size())));
  const auto p = path_for(dataset, trial, m, key);
  fs::create_directories(p.parent_path());
  // unique temp name per thread, then rename into place
  const auto tmp = p.string() + ".tmp" + std::to_string(std::hash<std::string>{}(trial + key));
  w.save(tmp);
  fs::rename(tmp, p);
}

std::vector<std::string> FeatureStore::notices() const {
  std::lock_guard lock(mu_);
  return notices_;
}

std::string_view to_string(MissingPolicy p) {
  return p == MissingPolicy::per_experiment ? "per_experiment" : "all_experiments";
}

MissingPolicy parse_missing_policy(std::string_view s) {
  if (s == "per_experiment") return MissingPolicy::per_experiment;
  if (s == "all_experiments") return MissingPolicy::all_experiments;
  throw Error("unknown missing-data policy '" + std::string(s) + "'");
}

std::vector<Method> FeatureTable::methods() const {
  std::vector<Method> out;
  for (const auto& [m, _] : raw) out.push_back(m);
  return out;
}

FeatureTable extract_table(const DatasetManifest& manifest, std::span<const Method> methods, const ExtractConfig& cfg,
                           FeatureStore* store, MissingPolicy policy, Exec exec) {
  if (methods.empty()) throw Error("extract: no feature methods selected");
  // configuration errors are not per-trial failures
  if (std::find(methods.begin(), methods.end(), Method::eeg_entropy) != methods.end()) cfg.entropy.estimator.validate();
  for (Method m : methods)
    if (is_embedding(m) || is_sequence(m)) provider_of(cfg, m);
  FeatureTable table;
  table.dataset_id = manifest.dataset_id;
  table.scale = manifest.rating_scale;
  table.provides_liking = manifest.provides_liking();
  table.layout_ref = manifest.scalp_layout_ref;
  table.policy = policy;

  // Under all_experiments a trial needs every input kind the dataset has anywhere.
  std::vector<Method> required(methods.begin(), methods.end());
  if (policy == MissingPolicy::all_experiments) {
    for (Method m : all_methods()) {
      if (std::find(required.begin(), required.end(), m) != required.end()) continue;
      bool any = false;
      for (const auto& s : manifest.subjects)
        for (const auto& t : s.trials) any = any || available(m, t);
      if (any) required.push_back(m);
    }
  }

  struct Job {
    const SubjectEntry* subject;
    const TrialEntry* trial;
  };
  std::vector<Job> jobs;
  for (const auto& s : manifest.subjects) {
    table.subjects.push_back(s.id);
    for (const auto& t : s.trials) jobs.push_back({&s, &t});
  }

  std::vector<std::string> configs;
  for (Method m : methods) configs.push_back(method_config(m, manifest, cfg));

  std::vector<std::vector<RawFeatures>> results(jobs.size());
  std::vector<std::string> skip(jobs.size());
  const auto one = [&](std::size_t j) {
    const auto& t = *jobs[j].trial;
    for (Method m : required) {
      std::string why;
      if (!available(m, t, &why)) {
        skip[j] = why;
        return;
      }
    }
    try {
      for (std::size_t k = 0; k < methods.size(); ++k) {
        const Method m = methods[k];
        const std::string key = fnv1a_hex(configs[k] + "|" + input_digest(manifest, m, t));
        std::optional<RawFeatures> f;
        if (store) f = store->get(manifest.dataset_id, t.id, m, key);
        if (!f) {
          f = compute_method(m, manifest, *jobs[j].subject, t, cfg);
          if (store) store->put(manifest.dataset_id, t.id, m, key, *f);
        }
        results[j].push_back(std::move(*f));
      }
    } catch (const std::exception& e) {
      results[j].clear();
      skip[j] = std::string("extraction failed: ") + e.what();
    }
  };
  if (exec == Exec::serial) {
    for (std::size_t j = 0; j < jobs.size(); ++j) one(j);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < jobs.size(); ++j) one(j);
  }

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!skip[j].empty()) {
      table.skipped.push_back({jobs[j].trial->id, skip[j]});
      continue;
    }
    keep.push_back(j);
  }
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const Method m = methods[k];
    if (keep.empty()) {
      table.raw[m] = Eigen::MatrixXd(0, 0);
      continue;
    }
    const auto& first = results[keep.front()][k];
    for (std::size_t j : keep) {
      const auto& f = results[j][k];
      if (f.names != first.names)
        throw FeatureSetMismatch(std::string(to_string(m)), "trial " + jobs[j].trial->id + " has a different feature set");
      if (f.rows != first.rows)
        throw Error("trial " + jobs[j].trial->id + ": " + std::string(to_string(m)) + " has " +
                    std::to_string(f.rows) + " timesteps, expected " + std::to_string(first.rows) +
                    " (the sequence path needs fixed-length trials)");
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(first.values.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
      const auto& v = results[keep[r]][k].values;
      X.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    table.raw[m] = std::move(X);
    table.names[m] = first.names;
    if (is_sequence(m)) table.seq_rows[m] = first.rows;
  }
  for (std::size_t j : keep) {
    table.trial_ids.push_back(jobs[j].trial->id);
    table.subject_ids.push_back(jobs[j].subject->id);
    table.labels.push_back(jobs[j].trial->labels);
  }
  return table;
}

FeatureTable concat_tables(std::span<const FeatureTable> tables) {
  if (tables.empty()) throw Error("concat_tables: no tables");
  FeatureTable out;
  const auto& first = tables.front();
  out.dataset_id = first.dataset_id;
  out.scale = first.scale;
  out.provides_liking = true;
  out.layout_ref = first.layout_ref;
  out.policy = first.policy;
  for (std::size_t i = 1; i < tables.size(); ++i) out.dataset_id += "+" + tables[i].dataset_id;
  for (const auto& t : tables) {
    out.provides_liking = out.provides_liking && t.provides_liking;
    if (t.methods() != first.methods()) throw Error("concat_tables: tables were extracted with different methods");
    for (const auto& [m, names] : first.names) {
      const auto it = t.names.find(m);
      if (it == t.names.end() || it->second != names) {
        const std::string detail = "dataset '" + t.dataset_id + "' has " +
                                   std::to_string(it == t.names.end() ? 0 : it->second.size()) +
                                   " features named differently from dataset '" + first.dataset_id + "' (" +
                                   std::to_string(names.size()) + ")";
        throw FeatureSetMismatch(std::string(to_string(m)), detail);
      }
      if (is_sequence(m) && t.seq_rows.at(m) != first.seq_rows.at(m))
        throw FeatureSetMismatch(std::string(to_string(m)), "sequence lengths differ between datasets");
    }
  }
  for (const auto& [m, names] : first.names) {
    out.names[m] = names;
    if (is_sequence(m)) out.seq_rows[m] = first.seq_rows.at(m);
    Eigen::Index rows = 0;
    for (const auto& t : tables) rows += t.raw.at(m).rows();
    Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(first.raw.at(m).cols()));
    Eigen::Index at = 0;
    for (const auto& t : tables) {
      X.middleRows(at, t.raw.at(m).rows()) = t.raw.at(m);
      at += t.raw.at(m).rows();
    }
    out.raw[m] = std::move(X);
  }
  for (const auto& t : tables) {
    for (const auto& s : t.subjects) out.subjects.push_back(t.dataset_id + "/" + s);
    for (std::size_t i = 0; i < t.size(); ++i) {
      out.trial_ids.push_back(t.dataset_id + "/" + t.trial_ids[i]);
      out.subject_ids.push_back(t.dataset_id + "/" + t.subject_ids[i]);
      out.labels.push_back(t.labels[i]);
    }
    for (const auto& s : t.skipped) out.skipped.push_back({t.dataset_id + "/" + s.trial_id, s.reason});
  }
  return out;
}

}  // namespace affectlab::harness
