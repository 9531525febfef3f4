#include "affectlab/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>

#include "affectlab/core/binary_io.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/labels.hpp"
#include "affectlab/core/manifest.hpp"
#include "affectlab/core/rng.hpp"
#include "affectlab/embedding/exchange.hpp"
#include "affectlab/harness/report.hpp"

namespace affectlab::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kTargets[] = {"valence", "arousal", "liking", "emotion"};
constexpr const char* kProtocols[] = {"loso", "split", "combined", "transfer"};
constexpr const char* kVersion = "affectlab 0.1.0";

std::vector<Method> alias_methods(const std::string& set, bool entropy) {
  if (set == "EEG") {
    if (entropy) return {Method::eeg_psd, Method::eeg_entropy, Method::eeg_topo};
    return {Method::eeg_psd, Method::eeg_topo};
  }
  if (set == "Cardiac") return {Method::cardiac_hrv, Method::cardiac_spec};
  if (set == "GSR") return {Method::gsr_stats, Method::gsr_spec};
  if (set == "Face1") return {Method::face_geometry};
  if (set == "Face2") return {Method::face_emb};
  if (set == "EEG+Face-LSTM") return {Method::eeg_face_seconds};
  return {parse_method(set)};
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Eigen::Index capped_k(int want, Eigen::Index n, Eigen::Index d) {
  return std::max<Eigen::Index>(1, std::min<Eigen::Index>({static_cast<Eigen::Index>(want), n - 1, d}));
}

bool is_sequence_pipeline(const FeatureTable& t) {
  const auto ms = t.methods();
  return ms.size() == 1 && is_sequence(ms.front());
}

// Flat row of a sequence method -> [T x D].
Eigen::MatrixXd unflatten(const Eigen::MatrixXd& X, Eigen::Index row, std::size_t T) {
  const Eigen::Index D = X.cols() / static_cast<Eigen::Index>(T);
  Eigen::MatrixXd S(static_cast<Eigen::Index>(T), D);
  for (Eigen::Index t = 0; t < S.rows(); ++t) S.row(t) = X.block(row, t * D, 1, D);
  return S;
}

Eigen::Index embedding_columns(const std::vector<std::string>& names) {
  return std::count_if(names.begin(), names.end(), [](const std::string& n) { return n.rfind("topo_emb", 0) == 0; });
}

// Per-step features of one trial before scaling: [T x (k + G)].
Eigen::MatrixXd sequence_steps(const FittedPipeline& p, const FeatureTable& t, Method m, Eigen::Index row) {
  const auto S = unflatten(t.raw.at(m), row, t.seq_rows.at(m));
  const Eigen::Index E = embedding_columns(t.names.at(m));
  const auto& pca = p.pca.at(m);
  Eigen::MatrixXd out(S.rows(), pca.k() + (S.cols() - E));
  out.leftCols(pca.k()) = pca.transform(Eigen::MatrixXd(S.leftCols(E)));
  out.rightCols(S.cols() - E) = S.rightCols(S.cols() - E);
  return out;
}

Eigen::MatrixXd design(const FittedPipeline& p, const FeatureTable& t, std::span<const std::size_t> rows) {
  std::vector<Eigen::MatrixXd> parts;
  Eigen::Index cols = 0;
  for (Method m : p.methods) {
    auto X = take_rows(t.raw.at(m), rows);
    if (is_embedding(m)) X = p.pca.at(m).transform(X);
    cols += X.cols();
    parts.push_back(std::move(X));
  }
  Eigen::MatrixXd D(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::Index at = 0;
  for (const auto& X : parts) {
    D.middleCols(at, X.cols()) = X;
    at += X.cols();
  }
  return D;
}

std::vector<int> labels_at(const std::vector<int>& labels, std::span<const std::size_t> rows) {
  std::vector<int> out;
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

struct FoldPlan {
  std::string name;
  std::vector<std::size_t> train, test;
};

struct FoldOutcome {
  std::vector<int> preds;
  std::string error;
  std::string warning;
};

std::size_t distinct(const std::vector<int>& v) { return std::set<int>(v.begin(), v.end()).size(); }

FoldOutcome run_fold(const FeatureTable& t, const FoldPlan& f, const std::vector<int>& labels, int classes,
                     const ClassifierConfig& cfg, std::uint64_t seed) {
  FoldOutcome out;
  if (distinct(labels_at(labels, f.train)) < 2) {
    out.warning = "fold " + f.name + ": training set has a single class, fold skipped";
    return out;
  }
  try {
    const auto p = fit_pipeline(t, f.train, labels, classes, cfg, seed);
    out.preds = predict_pipeline(p, t, f.test);
  } catch (const std::exception& e) {
    out.error = "fold " + f.name + ": " + e.what();
  }
  return out;
}

std::vector<FoldOutcome> run_folds(const FeatureTable& t, const std::vector<FoldPlan>& plans,
                                   const std::vector<int>& labels, int classes, const ExperimentSpec& spec) {
  std::vector<FoldOutcome> out(plans.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < plans.size(); ++i)
    out[i] = run_fold(t, plans[i], labels, classes, spec.classifier, mix_seed(spec.seed, 0x464f4c44 + i));
  for (const auto& o : out)
    if (!o.error.empty()) throw Error(o.error);
  return out;
}

std::vector<int> experiment_labels(const FeatureTable& t, const ExperimentSpec& spec) {
  auto labels = target_labels(t, spec.target);
  if (spec.shuffle_labels) {
    Rng rng(spec.seed, 0x5348554646);
    rng.shuffle(labels.begin(), labels.end());
  }
  return labels;
}

ExperimentReport base_report(const FeatureTable& t, const ExperimentSpec& spec) {
  ExperimentReport r;
  r.name = spec.name;
  r.protocol = std::string(to_string(spec.protocol));
  r.target = std::string(to_string(spec.target));
  r.classes = class_count(spec.target);
  for (Method m : t.methods()) r.methods.push_back(std::string(to_string(m)));
  r.datasets = t.dataset_id;
  r.missing_policy = std::string(to_string(t.policy));
  r.excluded = t.skipped;
  r.provenance["tool"] = kVersion;
  r.provenance["seed"] = std::to_string(spec.seed);
  r.provenance["spec_hash"] = fnv1a_hex(spec_to_json(spec));
  return r;
}

// Pools predictions of the kept folds, in plan order.
void merge(ExperimentReport& r, const FeatureTable& t, const std::vector<FoldPlan>& plans,
           const std::vector<FoldOutcome>& outs, const std::vector<int>& labels, bool mean_over_folds) {
  std::vector<int> preds, truth;
  std::vector<double> acc, f1;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!outs[i].warning.empty()) r.warnings.push_back(outs[i].warning);
    if (outs[i].preds.empty()) continue;
    std::vector<int> fp, ft;
    for (std::size_t k = 0; k < plans[i].test.size(); ++k) {
      const auto row = plans[i].test[k];
      r.predictions.push_back({t.trial_ids[row], t.subject_ids[row], plans[i].name, labels[row], outs[i].preds[k]});
      fp.push_back(outs[i].preds[k]);
      ft.push_back(labels[row]);
    }
    const auto fr = learn::metrics(fp, ft, r.classes);
    r.eval.per_fold.push_back({plans[i].name, fp.size(), fr.accuracy, fr.macro_f1});
    acc.push_back(fr.accuracy);
    f1.push_back(fr.macro_f1);
    preds.insert(preds.end(), fp.begin(), fp.end());
    truth.insert(truth.end(), ft.begin(), ft.end());
  }
  if (preds.empty()) throw Error("experiment '" + r.name + "': no fold produced predictions");
  auto per_fold = std::move(r.eval.per_fold);
  r.eval = learn::metrics(preds, truth, r.classes);
  r.eval.per_fold = std::move(per_fold);
  const auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  double m = 0;
  mean_std(acc, m, r.eval.accuracy_std);
  if (mean_over_folds) r.eval.accuracy = m;
  mean_std(f1, m, r.eval.macro_f1_std);
  if (mean_over_folds) r.eval.macro_f1 = m;
  r.n_scored = preds.size();
  r.n_correct = static_cast<std::size_t>(r.eval.confusion.trace());
  r.accuracy_ci = binomial_ci(r.n_correct, r.n_scored);
}

std::vector<FoldPlan> loso_plans(const FeatureTable& t, std::vector<std::string>* warnings) {
  std::vector<FoldPlan> plans;
  for (const auto& s : t.subjects) {
    FoldPlan p;
    p.name = s;
    for (std::size_t i = 0; i < t.size(); ++i) (t.subject_ids[i] == s ? p.test : p.train).push_back(i);
    if (p.test.empty()) {
      if (warnings) warnings->push_back("subject " + s + ": no usable trials, fold skipped");
      continue;
    }
    plans.push_back(std::move(p));
  }
  return plans;
}

void require_target(const FeatureTable& t, Target target) {
  if (target == Target::liking && !t.provides_liking)
    throw Error("target liking needs datasets that provide liking ratings ('" + t.dataset_id + "' does not)");
}

json classifier_json(const ClassifierConfig& c) {
  json l;
  l["layers"] = c.lstm.layers;
  l["learning_rate"] = c.lstm.learning_rate;
  l["momentum"] = c.lstm.momentum;
  l["epochs"] = c.lstm.epochs;
  l["batch_size"] = c.lstm.batch_size;
  l["clip_norm"] = c.lstm.clip_norm;
  l["patience"] = c.lstm.patience;
  l["validation_fraction"] = c.lstm.validation_fraction;
  json j;
  j["hidden"] = c.elm.hidden;
  j["ridge"] = c.elm.ridge;
  j["hidden_grid"] = c.hidden_grid;
  j["pca_components"] = c.pca_components;
  j["sequence_pca"] = c.sequence_pca;
  j["lstm"] = l;
  return j;
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, _] : j.items())
    if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end())
      throw Error("spec: unknown key '" + k + "' in " + where);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() || base.empty() ? q : base / q;
}

}  // namespace

std::string_view to_string(Target t) { return kTargets[static_cast<int>(t)]; }
std::string_view to_string(Protocol p) { return kProtocols[static_cast<int>(p)]; }

Target parse_target(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (s == kTargets[i]) return static_cast<Target>(i);
  throw Error("unknown target '" + std::string(s) + "'");
}

Protocol parse_protocol(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (s == kProtocols[i]) return static_cast<Protocol>(i);
  throw Error("unknown protocol '" + std::string(s) + "'");
}

int class_count(Target t) { return t == Target::emotion ? 4 : 2; }

void ExperimentSpec::validate() const {
  if (feature_sets.empty()) throw Error("spec: no feature sets");
  const auto ms = methods();
  if (std::any_of(ms.begin(), ms.end(), is_sequence) && ms.size() > 1)
    throw Error("spec: EEG+Face-LSTM cannot be fused with other feature sets");
  switch (protocol) {
    case Protocol::loso:
      if (datasets.size() != 1) throw Error("spec: loso takes exactly one dataset");
      break;
    case Protocol::split:
      if (datasets.empty()) throw Error("spec: split needs at least one dataset");
      break;
    case Protocol::combined:
      if (datasets.size() < 2) throw Error("spec: combined needs at least two datasets");
      break;
    case Protocol::transfer:
      if (train_sets.empty() || test_set.empty()) throw Error("spec: transfer needs train_sets and test_set");
      for (const auto& p : train_sets)
        if (fs::weakly_canonical(p) == fs::weakly_canonical(test_set))
          throw Error("spec: transfer train and test sets must be disjoint");
      break;
  }
  if (resamples < 1) throw Error("spec: resamples must be >= 1");
  if (!(test_fraction > 0 && test_fraction < 1)) throw Error("spec: test_fraction must be in (0, 1)");
  if (classifier.elm.hidden < 1 || !(classifier.elm.ridge >= 0)) throw Error("spec: bad ELM hidden size or ridge");
  for (int h : classifier.hidden_grid)
    if (h < 1) throw Error("spec: hidden_grid entries must be >= 1");
  if (classifier.pca_components < 1 || classifier.sequence_pca < 1) throw Error("spec: PCA sizes must be >= 1");
  if (provider != "stub" && provider != "sidecar") throw Error("spec: provider must be 'stub' or 'sidecar'");
  if (provider == "sidecar" && sidecar_root.empty()) throw Error("spec: sidecar provider needs a root");
  entropy.estimator.validate();
}

std::vector<Method> ExperimentSpec::methods() const {
  std::vector<Method> out;
  for (const auto& s : feature_sets)
    for (Method m : alias_methods(s, eeg_entropy))
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentSpec parse_spec(const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(std::string("spec parse error: ") + e.what());
  }
  ExperimentSpec s;
  try {
    check_keys(j,
               {"name", "feature_sets", "eeg_entropy", "target", "protocol", "datasets", "train_sets", "test_set",
                "resamples", "test_fraction", "classifier", "missing_policy", "entropy", "provider", "shuffle_labels",
                "seed"},
               "spec");
    read_opt(j, "name", s.name);
    read_opt(j, "feature_sets", s.feature_sets);
    read_opt(j, "eeg_entropy", s.eeg_entropy);
    if (j.contains("target")) s.target = parse_target(j.at("target").get<std::string>());
    if (j.contains("protocol")) s.protocol = parse_protocol(j.at("protocol").get<std::string>());
    for (const auto& p : j.value("datasets", std::vector<std::string>{})) s.datasets.push_back(resolve(base, p));
    for (const auto& p : j.value("train_sets", std::vector<std::string>{})) s.train_sets.push_back(resolve(base, p));
    if (j.contains("test_set")) s.test_set = resolve(base, j.at("test_set").get<std::string>());
    read_opt(j, "resamples", s.resamples);
    read_opt(j, "test_fraction", s.test_fraction);
    if (j.contains("classifier")) {
      const auto& c = j.at("classifier");
      check_keys(c, {"hidden", "ridge", "hidden_grid", "pca_components", "sequence_pca", "lstm"}, "classifier");
      read_opt(c, "hidden", s.classifier.elm.hidden);
      read_opt(c, "ridge", s.classifier.elm.ridge);
      read_opt(c, "hidden_grid", s.classifier.hidden_grid);
      read_opt(c, "pca_components", s.classifier.pca_components);
      read_opt(c, "sequence_pca", s.classifier.sequence_pca);
      if (c.contains("lstm")) {
        const auto& l = c.at("lstm");
        check_keys(l,
                   {"layers", "learning_rate", "momentum", "epochs", "batch_size", "clip_norm", "patience",
                    "validation_fraction"},
                   "lstm");
        auto& L = s.classifier.lstm;
        read_opt(l, "layers", L.layers);
        read_opt(l, "learning_rate", L.learning_rate);
        read_opt(l, "momentum", L.momentum);
        read_opt(l, "epochs", L.epochs);
        read_opt(l, "batch_size", L.batch_size);
        read_opt(l, "clip_norm", L.clip_norm);
        read_opt(l, "patience", L.patience);
        read_opt(l, "validation_fraction", L.validation_fraction);
      }
    }
    if (j.contains("missing_policy")) s.missing = parse_missing_policy(j.at("missing_policy").get<std::string>());
    if (j.contains("entropy")) {
      const auto& e = j.at("entropy");
      check_keys(e, {"bandwidth", "eval_grid", "span_sigma", "cutoff", "direction"}, "entropy");
      read_opt(e, "bandwidth", s.entropy.estimator.bandwidth);
      read_opt(e, "eval_grid", s.entropy.estimator.eval_grid);
      read_opt(e, "span_sigma", s.entropy.estimator.span_sigma);
      if (e.contains("cutoff"))
        s.entropy.estimator.cutoff =
            e.at("cutoff").is_null() ? std::numeric_limits<double>::infinity() : e.at("cutoff").get<double>();
      if (e.contains("direction")) {
        const auto d = e.at("direction").get<std::string>();
        if (d == "j_given_i") s.entropy.direction = eeg::PairDirection::j_given_i;
        else if (d == "i_given_j") s.entropy.direction = eeg::PairDirection::i_given_j;
        else throw Error("unknown entropy direction '" + d + "'");
      }
    }
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      check_keys(p, {"kind", "seed", "root", "timeout_s"}, "provider");
      read_opt(p, "kind", s.provider);
      read_opt(p, "seed", s.provider_seed);
      if (p.contains("root")) s.sidecar_root = resolve(base, p.at("root").get<std::string>());
      read_opt(p, "timeout_s", s.sidecar_timeout_s);
    }
    read_opt(j, "shuffle_labels", s.shuffle_labels);
    read_opt(j, "seed", s.seed);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string("spec parse error: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path.parent_path());
}

std::string spec_to_json(const ExperimentSpec& s) {
  json j;
  j["name"] = s.name;
  j["feature_sets"] = s.feature_sets;
  j["eeg_entropy"] = s.eeg_entropy;
  j["target"] = std::string(to_string(s.target));
  j["protocol"] = std::string(to_string(s.protocol));
  const auto paths = [](const std::vector<fs::path>& v) {
    std::vector<std::string> out;
    for (const auto& p : v) out.push_back(p.generic_string());
    return out;
  };
  j["datasets"] = paths(s.datasets);
  j["train_sets"] = paths(s.train_sets);
  j["test_set"] = s.test_set.generic_string();
  j["resamples"] = s.resamples;
  j["test_fraction"] = s.test_fraction;
  j["classifier"] = classifier_json(s.classifier);
  j["missing_policy"] = std::string(to_string(s.missing));
  json e;
  e["bandwidth"] = s.entropy.estimator.bandwidth;
  e["eval_grid"] = s.entropy.estimator.eval_grid;
  e["span_sigma"] = s.entropy.estimator.span_sigma;
  if (std::isinf(s.entropy.estimator.cutoff)) e["cutoff"] = nullptr;
  else e["cutoff"] = s.entropy.estimator.cutoff;
  e["direction"] = s.entropy.direction == eeg::PairDirection::j_given_i ? "j_given_i" : "i_given_j";
  j["entropy"] = e;
  json p;
  p["kind"] = s.provider;
  p["seed"] = s.provider_seed;
  if (!s.sidecar_root.empty()) p["root"] = s.sidecar_root.generic_string();
  p["timeout_s"] = s.sidecar_timeout_s;
  j["provider"] = p;
  j["shuffle_labels"] = s.shuffle_labels;
  j["seed"] = s.seed;
  return j.dump(2);
}

std::vector<int> target_labels(const FeatureTable& t, Target target) {
  require_target(t, target);
  std::vector<int> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& l = t.labels[i];
    const double mid = l.scale_midpoint;
    switch (target) {
      case Target::valence:
        out.push_back(static_cast<int>(binarize(l.valence, mid)));
        break;
      case Target::arousal:
        out.push_back(static_cast<int>(binarize(l.arousal, mid)));
        break;
      case Target::liking:
        if (!l.liking) throw Error("trial " + t.trial_ids[i] + ": no liking rating");
        out.push_back(static_cast<int>(binarize(*l.liking, mid)));
        break;
      case Target::emotion:
        out.push_back(static_cast<int>(emotion_class(binarize(l.valence, mid), binarize(l.arousal, mid))));
        break;
    }
  }
  return out;
}

std::vector<std::uint8_t> FittedPipeline::fingerprint() const {
  BinaryWriter w("AFPP", 1);
  for (Method m : methods) {
    w.str(std::string(to_string(m)));
    if (const auto it = pca.find(m); it != pca.end()) {
      w.vec(it->second.mean);
      w.mat(it->second.components);
    }
  }
  w.vec(scaler.min);
  w.vec(scaler.max);
  w.u32(static_cast<std::uint32_t>(hidden));
  if (elm) {
    w.mat(elm->input_weights);
    w.vec(elm->biases);
    w.mat(elm->output_weights);
  }
  if (lstm) w.vec(lstm->params());
  return w.bytes();
}

FittedPipeline fit_pipeline(const FeatureTable& t, std::span<const std::size_t> train, const std::vector<int>& labels,
                            int classes, const ClassifierConfig& cfg, std::uint64_t seed) {
  if (train.size() < 2) throw Error("fit: need at least 2 training trials");
  FittedPipeline p;
  p.methods = t.methods();
  const auto y = labels_at(labels, train);
  const auto n = static_cast<Eigen::Index>(train.size());

  if (is_sequence_pipeline(t)) {
    const Method m = p.methods.front();
    const std::size_t T = t.seq_rows.at(m);
    const Eigen::Index E = embedding_columns(t.names.at(m));
    Eigen::MatrixXd stacked(n * static_cast<Eigen::Index>(T), E);
    for (Eigen::Index i = 0; i < n; ++i)
      stacked.middleRows(i * static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T)) =
          unflatten(t.raw.at(m), static_cast<Eigen::Index>(train[static_cast<std::size_t>(i)]), T).leftCols(E);
    p.pca[m] = learn::pca_fit(stacked, capped_k(cfg.sequence_pca, stacked.rows(), E));
    std::vector<Eigen::MatrixXd> steps;
    for (auto r : train) steps.push_back(sequence_steps(p, t, m, static_cast<Eigen::Index>(r)));
    Eigen::MatrixXd all(n * static_cast<Eigen::Index>(T), steps.front().cols());
    for (Eigen::Index i = 0; i < n; ++i) all.middleRows(i * static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T)) = steps[static_cast<std::size_t>(i)];
    p.scaler = learn::rescale_fit(all);
    std::vector<learn::Sequence> seqs;
    for (const auto& s : steps) seqs.push_back(p.scaler.apply(s).transpose());
    auto lc = cfg.lstm;
    lc.seed = seed;
    p.lstm = learn::lstm_train(seqs, y, classes, lc).model;
    return p;
  }

  for (Method m : p.methods) {
    if (!is_embedding(m)) continue;
    const auto X = take_rows(t.raw.at(m), train);
    p.pca[m] = learn::pca_fit(X, capped_k(cfg.pca_components, X.rows(), X.cols()));
  }
  const auto D = design(p, t, train);
  p.scaler = learn::rescale_fit(D);
  const auto Ds = p.scaler.apply(D);
  auto ec = cfg.elm;
  ec.seed = seed;
  p.hidden = learn::elm_select_hidden(Ds, y, classes, ec, cfg.hidden_grid);
  ec.hidden = p.hidden;
  p.elm = learn::elm_train(Ds, y, classes, ec);
  return p;
}

std::vector<int> predict_pipeline(const FittedPipeline& p, const FeatureTable& t, std::span<const std::size_t> rows) {
  if (p.lstm) {
    const Method m = p.methods.front();
    std::vector<int> out;
    for (auto r : rows) out.push_back(p.lstm->predict(p.scaler.apply(sequence_steps(p, t, m, static_cast<Eigen::Index>(r))).transpose()));
    return out;
  }
  if (!p.elm) throw Error("predict: pipeline is not fitted");
  return p.elm->predict(p.scaler.apply(design(p, t, rows)));
}

ExperimentReport run_loso(const FeatureTable& t, const ExperimentSpec& spec) {
  auto r = base_report(t, spec);
  r.protocol = "loso";
  if (t.subjects.size() < 2) throw Error("loso: need at least 2 subjects");
  const auto labels = experiment_labels(t, spec);
  const auto plans = loso_plans(t, &r.warnings);
  const auto outs = run_folds(t, plans, labels, r.classes, spec);
  merge(r, t, plans, outs, labels, false);
  return r;
}

ExperimentReport run_split(const FeatureTable& t, const ExperimentSpec& spec) {
  auto r = base_report(t, spec);
  const auto labels = experiment_labels(t, spec);
  const std::size_t n = t.size();
  if (n < 5) throw Error("split: need at least 5 trials");
  const auto n_test = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(spec.test_fraction * static_cast<double>(n))), 1, n - 2);
  const auto classes_present = distinct(labels);
  std::vector<FoldPlan> plans;
  for (int k = 0; k < spec.resamples; ++k) {
    FoldPlan p;
    p.name = "resample" + std::to_string(k + 1);
    bool ok = false;
    for (int attempt = 0; attempt <= 10 && !ok; ++attempt) {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      Rng rng(spec.seed, 0x53504c54ULL + 64 * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(attempt));
      rng.shuffle(idx.begin(), idx.end());
      p.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
      p.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
      std::sort(p.test.begin(), p.test.end());
      std::sort(p.train.begin(), p.train.end());
      ok = distinct(labels_at(labels, p.train)) == classes_present;
      if (!ok && attempt < 10) r.warnings.push_back(p.name + ": class absent from training split, redrawn");
    }
    if (!ok) throw Error(p.name + ": a class is absent from every training split after 10 retries");
    plans.push_back(std::move(p));
  }
  const auto outs = run_folds(t, plans, labels, r.classes, spec);
  merge(r, t, plans, outs, labels, true);
  return r;
}

ExperimentReport run_transfer(std::span<const FeatureTable> train, const FeatureTable& test, const ExperimentSpec& spec) {
  if (train.empty()) throw Error("transfer: no training datasets");
  std::vector<FeatureTable> all(train.begin(), train.end());
  all.push_back(test);
  const auto joint = concat_tables(all);  // throws FeatureSetMismatch on differing blocks
  auto r = base_report(joint, spec);
  std::size_t n_train = 0;
  for (const auto& t : train) n_train += t.size();
  FoldPlan p;
  p.name = "transfer";
  for (std::size_t i = 0; i < joint.size(); ++i) (i < n_train ? p.train : p.test).push_back(i);
  if (p.test.empty() || p.train.empty()) throw Error("transfer: empty training or test set after exclusions");
  const auto labels = experiment_labels(joint, spec);
  const auto outs = run_folds(joint, {p}, labels, r.classes, spec);
  merge(r, joint, {p}, outs, labels, false);
  return r;
}

PurityResult purity_check(const FeatureTable& t, const ExperimentSpec& spec) {
  PurityResult res;
  const auto labels = experiment_labels(t, spec);
  const int classes = class_count(spec.target);
  const auto plans = loso_plans(t, nullptr);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& f = plans[i];
    if (distinct(labels_at(labels, f.train)) < 2) continue;
    const auto seed = mix_seed(spec.seed, 0x464f4c44 + i);
    const auto clean = fit_pipeline(t, f.train, labels, classes, spec.classifier, seed);

    auto dirty = t;
    auto dirty_labels = labels;
    Rng rng(spec.seed, 0xd1e7 + i);
    for (auto& [m, X] : dirty.raw)
      for (auto r : f.test)
        for (Eigen::Index c = 0; c < X.cols(); ++c) X(static_cast<Eigen::Index>(r), c) = 1e3 * rng.normal();
    for (auto r : f.test) dirty_labels[r] = (labels[r] + 1) % classes;
    const auto refit = fit_pipeline(dirty, f.train, dirty_labels, classes, spec.classifier, seed);
    if (refit.fingerprint() != clean.fingerprint())
      res.failures.push_back("fold " + f.name + ": fitted model depends on test rows");

    const auto a = predict_pipeline(clean, t, f.test);
    const auto b = predict_pipeline(clean, t, f.test);
    if (a != b) res.failures.push_back("fold " + f.name + ": scoring the test rows twice disagrees");
    if (predict_pipeline(refit, t, f.test) != a)
      res.failures.push_back("fold " + f.name + ": refit model scores the test rows differently");
  }
  if (report_json(run_loso(t, spec)) != report_json(run_loso(t, spec)))
    res.failures.push_back("two LOSO runs produced different reports");
  res.ok = res.failures.empty();
  return res;
}

std::unique_ptr<embedding::EmbeddingProvider> make_provider(const ExperimentSpec& spec) {
  if (spec.provider == "stub") return std::make_unique<embedding::StubProvider>(spec.provider_seed);
  if (spec.provider == "sidecar")
    return std::make_unique<embedding::SidecarProvider>(
        spec.sidecar_root, embedding::kDefaultDim,
        std::chrono::milliseconds(static_cast<std::int64_t>(spec.sidecar_timeout_s * 1000)));
  throw Error("unknown provider '" + spec.provider + "'");
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const embedding::EmbeddingProvider& provider,
                                FeatureStore* store) {
  spec.validate();
  const auto methods = spec.methods();
  ExtractConfig cfg;
  cfg.entropy = spec.entropy;
  cfg.provider = &provider;
  std::map<std::string, std::string> method_hashes;
  const auto extract = [&](const fs::path& path) {
    const auto m = load_manifest(path);
    for (Method me : methods)
      method_hashes["method:" + std::string(to_string(me)) + "@" + m.dataset_id] = fnv1a_hex(method_config(me, m, cfg));
    auto t = extract_table(m, methods, cfg, store, spec.missing);
    require_target(t, spec.target);
    return t;
  };

  ExperimentReport r;
  switch (spec.protocol) {
    case Protocol::loso:
      r = run_loso(extract(spec.datasets.front()), spec);
      break;
    case Protocol::split:
    case Protocol::combined: {
      std::vector<FeatureTable> tables;
      for (const auto& p : spec.datasets) tables.push_back(extract(p));
      r = tables.size() == 1 ? run_split(tables.front(), spec) : run_split(concat_tables(tables), spec);
      break;
    }
    case Protocol::transfer: {
      std::vector<FeatureTable> train;
      for (const auto& p : spec.train_sets) train.push_back(extract(p));
      r = run_transfer(train, extract(spec.test_set), spec);
      break;
    }
  }
  r.protocol = std::string(to_string(spec.protocol));
  r.provenance["provider"] = provider.id();
  r.provenance.insert(method_hashes.begin(), method_hashes.end());
  return r;
}

}  // namespace affectlab::harness
