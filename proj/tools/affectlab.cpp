// affectlab command-line tool: synth, extract, render, evaluate, embed-stub-serve.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "affectlab/cardiac/features.hpp"
#include "affectlab/core/csv.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/exec.hpp"
#include "affectlab/core/manifest.hpp"
#include "affectlab/eeg/features.hpp"
#include "affectlab/embedding/exchange.hpp"
#include "affectlab/gsr/features.hpp"
#include "affectlab/harness/experiment.hpp"
#include "affectlab/harness/features.hpp"
#include "affectlab/harness/report.hpp"
#include "affectlab/harness/synth.hpp"

namespace fs = std::filesystem;
using namespace affectlab;
using namespace affectlab::harness;

namespace {

constexpr int kExitError = 1;
constexpr int kExitMismatch = 2;

std::atomic<bool> g_stop{false};
int g_verbose = 0;

void log(const std::string& s) {
  if (g_verbose > 0) std::cerr << s << "\n";
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

fs::path cache_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  return FeatureStore::resolve_dir(".affectlab_cache");
}

// ---- synth

struct SynthArgs {
  std::string config, out;
  std::int64_t seed = -1;
};

int cmd_synth(const SynthArgs& a) {
  SynthConfig c = a.config.empty() ? SynthConfig{} : parse_synth_config(read_text(a.config));
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
  const auto manifest = synth_generate(c, a.out);
  std::cout << manifest.string() << "\n";
  return 0;
}

// ---- extract

struct ExtractArgs {
  std::string manifest, spec, features = "EEG", cache, out;
  std::uint64_t provider_seed = 0;
  bool no_entropy = false;
  std::string policy = "per_experiment";
};

int cmd_extract(const ExtractArgs& a) {
  ExperimentSpec spec;
  if (!a.spec.empty()) {
    spec = load_spec(a.spec);
  } else {
    spec.feature_sets = split_list(a.features);
    spec.eeg_entropy = !a.no_entropy;
    spec.provider_seed = a.provider_seed;
    spec.missing = parse_missing_policy(a.policy);
  }
  const auto methods = spec.methods();
  const auto provider = make_provider(spec);
  ExtractConfig cfg;
  cfg.entropy = spec.entropy;
  cfg.provider = provider.get();
  FeatureStore store(cache_dir(a.cache));
  const auto m = load_manifest(a.manifest);
  const auto t = extract_table(m, methods, cfg, &store, spec.missing);
  for (const auto& n : store.notices()) std::cerr << "notice: " << n << "\n";

  const std::size_t lookups = store.hits() + store.misses();
  std::printf("dataset %s: %zu trials extracted, %zu skipped\n", m.dataset_id.c_str(), t.size(), t.skipped.size());
  std::printf("cache %s: %zu hits, %zu misses (%.1f%% hits)\n", store.dir().string().c_str(), store.hits(),
              store.misses(), lookups ? 100.0 * static_cast<double>(store.hits()) / static_cast<double>(lookups) : 0.0);
  for (const auto& s : t.skipped) std::printf("skip %s: %s\n", s.trial_id.c_str(), s.reason.c_str());

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    std::ofstream skip(fs::path(a.out) / "skipped.csv");
    skip << "trial,reason\n";
    for (const auto& s : t.skipped) skip << s.trial_id << ",\"" << s.reason << "\"\n";
    for (Method me : methods) {
      if (is_sequence(me)) continue;
      std::ofstream csv(fs::path(a.out) / (std::string(to_string(me)) + ".csv"));
      csv << "trial";
      for (const auto& n : t.names.at(me)) csv << "," << n;
      csv << "\n";
      const auto& X = t.raw.at(me);
      for (Eigen::Index r = 0; r < X.rows(); ++r) {
        csv << t.trial_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < X.cols(); ++c) csv << "," << format_double(X(r, c));
        csv << "\n";
      }
    }
  }
  return 0;
}

// ---- render

struct RenderArgs {
  std::string manifest, out, what = "topo", trials;
};

int cmd_render(const RenderArgs& a) {
  const auto kinds = split_list(a.what);
  for (const auto& k : kinds)
    if (k != "topo" && k != "per-second" && k != "cardiac" && k != "gsr")
      throw Error("render: unknown image kind '" + k + "' (topo, per-second, cardiac, gsr)");
  const auto m = load_manifest(a.manifest);
  const auto only = split_list(a.trials);
  const auto wanted = [&](const std::string& id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };
  const auto has = [&](const char* k) { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); };
  std::size_t written = 0;
  if (!kinds.empty()) fs::create_directories(a.out);
  const auto layout = has("topo") || has("per-second") ? eeg::resolve_layout(m.scalp_layout_ref, m.root) : eeg::ScalpLayout{};
  for (const auto& s : m.subjects)
    for (const auto& t : s.trials) {
      if (!wanted(t.id)) continue;
      const fs::path base = fs::path(a.out) / t.id;
      if ((has("topo") || has("per-second")) && t.has(Modality::EEG)) {
        auto rec = load_trial(m, s, t, Modality::EEG);
        if (m.raw_eeg) rec = eeg::preprocess_raw_eeg(rec);
        if (has("topo")) {
          write_png(base.string() + "_topo.png", eeg::trial_topo_image(rec, layout));
          ++written;
        }
        if (has("per-second")) {
          const auto imgs = eeg::per_second_eeg_images(rec, layout);
          for (std::size_t i = 0; i < imgs.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "_sec%03zu.png", i);
            write_png(base.string() + name, imgs[i]);
            ++written;
          }
        }
      }
      if (has("cardiac")) {
        const Modality cm = t.has(Modality::ECG) ? Modality::ECG : Modality::PPG;
        if (t.has(cm)) {
          write_png(base.string() + "_cardiac_spec.png", cardiac::cardiac_spectrogram_image(load_trial(m, s, t, cm), 0));
          ++written;
        }
      }
      if (has("gsr") && t.has(Modality::GSR)) {
        write_png(base.string() + "_gsr_spec.png", gsr::gsr_spectrogram_image(load_trial(m, s, t, Modality::GSR)));
        ++written;
      }
    }
  std::printf("%zu images written\n", written);
  return 0;
}

// ---- evaluate

struct EvaluateArgs {
  std::string spec, out = "report", cache;
  std::int64_t seed = -1;
};

int cmd_evaluate(const EvaluateArgs& a) {
  auto spec = load_spec(a.spec);
  if (a.seed >= 0) spec.seed = static_cast<std::uint64_t>(a.seed);
  const auto provider = make_provider(spec);
  FeatureStore store(cache_dir(a.cache));
  log("cache: " + store.dir().string());
  const auto r = run_experiment(spec, *provider, &store);
  for (const auto& n : store.notices()) std::cerr << "notice: " << n << "\n";
  write_report_files(r, spec, a.out);
  std::cout << format_table(r);
  log("reports written to " + a.out);
  return 0;
}

// ---- embed-stub-serve

struct ServeArgs {
  std::string root;
  std::uint64_t seed = 0;
  std::size_t dim = embedding::kDefaultDim;
  bool echo = false, once = false;
};

int cmd_serve(const ServeArgs& a) {
  fs::create_directories(a.root);
  const embedding::StubProvider stub(a.seed, a.dim);
  if (a.once) {
    std::printf("%zu jobs handled\n", embedding::serve_pending(a.root, stub, a.echo));
    return 0;
  }
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  log("serving " + a.root + (a.echo ? " (echo)" : ""));
  embedding::serve_forever(a.root, stub, a.echo, g_stop);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affectlab: multi-modal affect features and evaluation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: all cores)");
  app.add_flag("-v,--verbose", g_verbose, "more output on stderr");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with planted effects");
  synth->add_option("--config", sa.config, "synth config JSON");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--seed", sa.seed, "override the config seed");

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "compute and cache feature blocks");
  extract->add_option("--manifest", ea.manifest, "dataset manifest")->required();
  extract->add_option("--spec", ea.spec, "take feature sets, provider and options from an experiment spec");
  extract->add_option("--features", ea.features, "comma-separated feature sets or methods");
  extract->add_flag("--no-entropy", ea.no_entropy, "leave the pairwise entropy block out of EEG");
  extract->add_option("--provider-seed", ea.provider_seed, "stub embedding seed");
  extract->add_option("--missing-policy", ea.policy, "per_experiment or all_experiments");
  extract->add_option("--cache", ea.cache, "cache directory (default $AFFECTLAB_CACHE or ./.affectlab_cache)");
  extract->add_option("--out", ea.out, "also write feature CSVs and skipped.csv here");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "write topo and spectrogram images");
  render->add_option("--manifest", ra.manifest, "dataset manifest")->required();
  render->add_option("--out", ra.out, "output directory")->required();
  render->add_option("--what", ra.what, "comma-separated: topo, per-second, cardiac, gsr");
  render->add_option("--trials", ra.trials, "comma-separated trial ids (default all)");

  EvaluateArgs va;
  auto* evaluate = app.add_subcommand("evaluate", "run an experiment spec");
  evaluate->add_option("--spec", va.spec, "experiment spec JSON")->required();
  evaluate->add_option("--out", va.out, "report directory");
  evaluate->add_option("--seed", va.seed, "override the spec seed");
  evaluate->add_option("--cache", va.cache, "cache directory (default $AFFECTLAB_CACHE or ./.affectlab_cache)");

  ServeArgs sv;
  auto* serve = app.add_subcommand("embed-stub-serve", "answer embedding jobs with the stub network (debug)");
  serve->add_option("--root", sv.root, "exchange directory")->required();
  serve->add_option("--seed", sv.seed, "stub seed");
  serve->add_option("--dim", sv.dim, "embedding dimension");
  serve->add_flag("--echo", sv.echo, "answer with zero vectors");
  serve->add_flag("--once", sv.once, "handle pending jobs and exit");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_threads(threads);

  try {
    if (*synth) return cmd_synth(sa);
    if (*extract) return cmd_extract(ea);
    if (*render) return cmd_render(ra);
    if (*evaluate) return cmd_evaluate(va);
    if (*serve) return cmd_serve(sv);
  } catch (const FeatureSetMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
