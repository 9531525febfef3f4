// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Everything uses the stub embedding provider.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "affectlab/cardiac/features.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/exec.hpp"
#include "affectlab/core/manifest.hpp"
#include "affectlab/dsp/spectral.hpp"
#include "affectlab/eeg/features.hpp"
#include "affectlab/eeg/mutual_info.hpp"
#include "affectlab/face/features.hpp"
#include "affectlab/gsr/features.hpp"
#include "affectlab/harness/experiment.hpp"
#include "affectlab/harness/features.hpp"
#include "affectlab/harness/report.hpp"
#include "affectlab/harness/synth.hpp"
#include "affectlab/learn/elm.hpp"
#include "affectlab/learn/lstm.hpp"
#include "affectlab/learn/pca.hpp"
#include "golden_fixtures.hpp"
#include "oracles.hpp"

using namespace affectlab;
using namespace affectlab::harness;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  const char* id;
  double limit_s;  // 0: no runtime bound
  std::function<void(Outcome&)> body;
};

std::vector<std::string> channel_names(const eeg::ScalpLayout& l) {
  std::vector<std::string> n;
  for (const auto& e : l.entries()) n.push_back(e.name);
  return n;
}

// ---- entropy

void entropy_oracle(Outcome& o) {
  double worst = 0;
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    double prev = -1;
    for (double rho : {0.0, 0.5, 0.9}) {
      std::vector<double> x, y;
      testing::bivariate_gaussian(rho, 2000, seed, x, y);
      const double mi = eeg::mutual_information(x, y);
      const double err = std::abs(mi - testing::histogram_mi(x, y, 32));
      worst = std::max(worst, err);
      o.require(err < 0.1, "seed " + std::to_string(seed) + " rho " + std::to_string(rho));
      o.require(mi > prev, "monotone in rho, seed " + std::to_string(seed));
      prev = mi;
    }
  }
  o.detail << "max |parzen - histogram| = " << worst << " nats over 3 seeds (tol 0.1)";
}

// ---- cardiac

void pnn50_exact(Outcome& o) {
  Rng rng(2024);
  std::size_t mismatches = 0, boundary_hits = 0;
  for (int s = 0; s < 1000; ++s) {
    const std::size_t n = 2 + rng.index(60);
    std::vector<long long> us(n);
    std::vector<double> sec(n);
    for (std::size_t i = 0; i < n; ++i) {
      us[i] = 500'000 + 10'000 * static_cast<long long>(rng.index(60)) +
              (rng.uniform() < 0.3 ? static_cast<long long>(rng.index(1000)) : 0);
      sec[i] = static_cast<double>(us[i]) / 1e6;
    }
    for (std::size_t i = 1; i < n; ++i) boundary_hits += std::llabs(us[i] - us[i - 1]) == 50'000;
    mismatches += cardiac::pnn50(sec) != testing::pnn50_enumerate(us);
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " series disagree");
  o.require(cardiac::pnn50(std::vector<double>{0.800, 0.850}) == 0.0, "exactly 50 ms is not counted");
  o.require(cardiac::pnn50(std::vector<double>{0.800, 0.850001}) == 100.0, "just over 50 ms is counted");
  o.require(boundary_hits > 0, "random series exercise the boundary");
  o.detail << "1000 random series, " << mismatches << " mismatches, " << boundary_hits << " exact 50 ms steps";
}

void peaks_hr(Outcome& o) {
  for (double bpm : {60.0, 75.0, 90.0}) {
    const auto beats = testing::regular_beats(bpm, 60.0);
    TrialRecording t;
    t.trial_id = "hr";
    t.modality = Modality::PPG;
    t.fs = 128;
    t.channels = {"ppg"};
    t.samples = {testing::pulse_train(beats, 128, 60)};
    const auto p = cardiac::cardiac_peaks(t, 0);
    const double hr = cardiac::heart_rate(p.size(), t.duration_s());
    o.detail << bpm << " bpm: " << p.size() << "/" << beats.size() << " peaks, HR " << hr << "; ";
    o.require(p.size() == beats.size(), "peak count at " + std::to_string(bpm));
    o.require(std::abs(hr - bpm) <= 1.0, "HR within 1 bpm at " + std::to_string(bpm));
  }
}

// ---- band power

void band_power(Outcome& o) {
  const double fs = 128;
  const auto x = testing::sine(10.0, 1.0, fs, 60);
  const double alpha = dsp::welch_band_power(x, fs, dsp::eeg_bands()[1]);
  const double total = dsp::welch_band_power(x, fs, {"4-30", 4.0, 30.0});
  const double share = alpha / total;
  // scaling is checked on the sine and on broadband noise; sine bands at the
  // round-off floor (< 1e-12 of the total) carry no power to scale
  double worst = 0;
  std::size_t checked = 0;
  for (const auto& sig : {x, testing::noise(60 * 128, 9)}) {
    const double floor = 1e-12 * dsp::welch_band_power(sig, fs, {"4-30", 4.0, 30.0});
    for (double a : {0.5, 3.0, 10.0}) {
      std::vector<double> y(sig);
      for (auto& v : y) v *= a;
      for (const auto& b : dsp::eeg_bands()) {
        const double p1 = dsp::welch_band_power(sig, fs, b), pa = dsp::welch_band_power(y, fs, b);
        if (p1 <= floor) continue;
        worst = std::max(worst, std::abs(pa - a * a * p1) / (a * a * p1));
        ++checked;
      }
    }
  }
  o.require(share >= 0.99, "alpha share >= 99%");
  o.require(worst <= 1e-6, "quadratic amplitude scaling");
  o.detail << "alpha share " << 100 * share << " %, max scaling error " << worst << " over " << checked << " band powers";
}

// ---- golden images

void golden(Outcome& o) {
  const fs::path dir = fs::path(AFFECTLAB_FIXTURE_DIR) / "golden";
  std::size_t files = 0;
  for (const auto& [name, got] : testing::golden::renders()) {
    const auto path = dir / name;
    if (!fs::exists(path)) {
      o.require(false, "missing " + name);
      continue;
    }
    const auto want = read_png(path);
    std::size_t off = want.data.size() == got.data.size() ? 0 : got.data.size();
    if (off == 0)
      for (std::size_t i = 0; i < got.data.size(); ++i) off += got.data[i] != want.data[i];
    o.require(off == 0 && want.width == got.width, name + ": " + std::to_string(off) + " values differ");
    ++files;
  }
  o.detail << files << " PNGs compared at integer pixels";
}

// ---- cardinalities

void cardinalities(Outcome& o) {
  const auto l32 = eeg::ScalpLayout::builtin("deap32"), l14 = eeg::ScalpLayout::builtin("emotiv14");
  const auto t32 = testing::noise_trial(channel_names(l32), 64, 2, 1);
  const auto t14 = testing::noise_trial(channel_names(l14), 64, 2, 2);
  const auto check = [&](const std::string& what, std::size_t got, std::size_t want) {
    o.detail << what << " " << got << "; ";
    o.require(got == want, what + " should be " + std::to_string(want));
  };
  check("psd32", eeg::band_psd_features(t32, l32).size(), 96);
  check("psd14", eeg::band_psd_features(t14, l14).size(), 42);
  check("entropy32", eeg::pairwise_entropy_features(t32).size(), 496);
  check("entropy14", eeg::pairwise_entropy_features(t14).size(), 91);

  auto g = testing::golden::gsr_trial();
  check("gsr_stats", gsr::gsr_stat_features(g).size(), 8);

  FaceLandmarkTrack track;
  track.trial_id = "f";
  Rng rng(4);
  for (int i = 0; i < 6; ++i) {
    LandmarkFrame f;
    f.t = 0.25 * i;
    f.box = {40, 30, 150, 180};
    const auto& ref = face::reference_landmarks();
    for (std::size_t k = 0; k < ref.size(); ++k)
      f.points[k] = {f.box.x + ref[k].x * f.box.w + rng.normal(), f.box.y + ref[k].y * f.box.h + rng.normal()};
    track.frames.push_back(f);
  }
  check("geometry", face::geometry_features(track).size(), 90);

  // post-PCA deep blocks, PCA fitted on 40 stub embeddings per family
  const embedding::StubProvider stub(7);
  Eigen::MatrixXd Ee(40, 4096), Ec(40, 4096), Eg(40, 4096), Ef(40, 3 * 4096);
  std::vector<TrialRecording> eeg_t, card_t, gsr_t;
  std::vector<std::vector<RgbImage>> faces;
  for (int i = 0; i < 40; ++i) {
    eeg_t.push_back(testing::noise_trial(channel_names(l14), 64, 2, 100 + i));
    Ee.row(i) = eeg::eeg_topo_embedding(eeg_t.back(), l14, stub).transpose();
    TrialRecording c;
    c.trial_id = "c" + std::to_string(i);
    c.modality = Modality::PPG;
    c.fs = 64;
    c.channels = {"ppg"};
    c.samples = {testing::pulse_train(testing::regular_beats(55 + i, 20), 64, 20)};
    card_t.push_back(c);
    Ec.row(i) = cardiac::cardiac_spectrogram_embedding(c, stub).transpose();
    auto gi = g;
    const auto nz = testing::noise(gi.n_samples(), 500 + i, 0.05);
    for (std::size_t n = 0; n < nz.size(); ++n) gi.samples[0][n] += nz[n];
    gsr_t.push_back(gi);
    Eg.row(i) = gsr::gsr_spectrogram_embedding(gi, stub).transpose();
    std::vector<RgbImage> fr;
    for (int k = 0; k < 2; ++k) {
      RgbImage im(224, 224);
      for (std::size_t p = 0; p < im.data.size(); ++p) im.data[p] = static_cast<std::uint8_t>((p * (3 + i + k)) % 256);
      fr.push_back(im);
    }
    faces.push_back(fr);
    Ef.row(i) = face::face_embedding_aggregate(fr, stub).transpose();
  }
  check("eeg deep", eeg::eeg_deep_features(eeg_t[0], l14, stub, learn::pca_fit(Ee, 30)).size(), 30);
  check("cardiac deep", cardiac::cardiac_features(card_t[0], stub, learn::pca_fit(Ec, 30)).size() - 2, 30);
  check("gsr deep", gsr::gsr_features(gsr_t[0], stub, learn::pca_fit(Eg, 30)).size() - 8, 30);
  check("face deep", face::face_embedding_features(faces[0], stub, learn::pca_fit(Ef, 30), "f").size(), 30);
}

// ---- LSTM

void lstm_gradient(Outcome& o) {
  using learn::LstmModel;
  using learn::Sequence;
  Rng rng(21);
  std::vector<Sequence> seqs;
  for (int i = 0; i < 4; ++i) {
    Sequence s(6, 3);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 3; ++c) s(r, c) = rng.normal();
    seqs.push_back(s);
  }
  const std::vector<int> y{0, 2, 1, 0};
  double worst_all = 0;
  for (const auto& layers : {std::vector<int>{4}, std::vector<int>{5, 3}}) {
    const LstmModel model(6, layers, 3, 1);
    std::vector<const Sequence*> batch;
    for (const auto& s : seqs) batch.push_back(&s);
    Eigen::VectorXd g;
    model.loss(batch, y, &g);
    LstmModel probe = model;
    const double eps = 1e-5;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double orig = probe.params()(i);
      probe.params()(i) = orig + eps;
      const double lp = probe.loss(batch, y);
      probe.params()(i) = orig - eps;
      const double lm = probe.loss(batch, y);
      probe.params()(i) = orig;
      const double num = (lp - lm) / (2 * eps);
      const double denom = std::max({std::abs(num), std::abs(g(i)), 1e-6});
      worst_all = std::max(worst_all, std::abs(num - g(i)) / denom);
    }
  }
  o.require(worst_all < 1e-4, "max relative error < 1e-4");
  o.detail << "max relative gradient error " << worst_all << " (1 and 2 layers)";
}

// ---- ELM

void elm(Outcome& o) {
  Rng rng(11);
  Eigen::MatrixXd X(40, 5);
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const int c = i % 2;
    for (int j = 0; j < 5; ++j) X(i, j) = 0.3 * rng.normal() + (c ? 1.5 : -1.5) * (j == 0 ? 1.0 : 0.2);
    y.push_back(c);
  }
  const learn::ElmConfig cfg{200, 1e-3, 5};
  const auto a = learn::elm_train(X, y, 2, cfg), b = learn::elm_train(X, y, 2, cfg);
  const auto pred = a.predict(X);
  std::size_t right = 0;
  for (std::size_t i = 0; i < y.size(); ++i) right += pred[i] == y[i];
  o.require(right == y.size(), "100% train accuracy");
  o.require(a.output_weights == b.output_weights && a.predict(X) == b.predict(X), "same seed, same model");
  o.detail << "H=200 train accuracy " << right << "/" << y.size() << ", refit identical";
}

// ---- end to end

fs::path scratch_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("affectlab_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ExperimentSpec eeg_loso(const fs::path& manifest, Target target) {
  ExperimentSpec s;
  s.name = "acceptance";
  s.feature_sets = {"EEG"};
  s.eeg_entropy = false;
  s.target = target;
  s.protocol = Protocol::loso;
  s.datasets = {manifest};
  s.provider_seed = 3;
  s.seed = 1;
  return s;
}

std::string pct(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.1f", 100 * v);
  return b;
}

void end_to_end(Outcome& o) {
  const auto dir = scratch_dir("e2e");
  SynthConfig c;
  c.n_subjects = 10;
  c.trials_per_subject = 20;
  c.montage = "emotiv14";
  c.seed = 7;
  c.dataset_id = "planted";
  c.effects = default_effects(1.0);
  const auto planted = synth_generate(c, dir / "planted");
  c.dataset_id = "null";
  c.effects = {};
  const auto null = synth_generate(c, dir / "null");

  const embedding::StubProvider stub(3);
  FeatureStore store(dir / "cache");
  for (Target t : {Target::valence, Target::arousal}) {
    const auto r = run_experiment(eeg_loso(planted, t), stub, &store);
    o.detail << "planted " << to_string(t) << " " << r.eval.accuracy << "%; ";
    o.require(r.n_scored == 200, "all 200 planted trials scored");
    o.require(r.eval.accuracy >= 90.0, std::string("planted ") + std::string(to_string(t)) + " >= 90%");
  }
  for (Target t : {Target::valence, Target::arousal, Target::emotion}) {
    const auto r = run_experiment(eeg_loso(null, t), stub, &store);
    const double chance = 1.0 / class_count(t);
    o.detail << "null " << to_string(t) << " " << r.eval.accuracy << "% CI [" << pct(r.accuracy_ci.lo) << ", "
             << pct(r.accuracy_ci.hi) << "]; ";
    o.require(r.accuracy_ci.lo <= chance && chance <= r.accuracy_ci.hi,
              std::string("null ") + std::string(to_string(t)) + " CI covers chance");
  }
  o.detail << "EEG = band PSD + topo, entropy block off";
  fs::remove_all(dir);
}

// ---- purity

// the table restricted to one block, as extraction for that block alone would give
FeatureTable only(const FeatureTable& t, Method keep) {
  FeatureTable out = t;
  std::erase_if(out.raw, [&](const auto& kv) { return kv.first != keep; });
  std::erase_if(out.names, [&](const auto& kv) { return kv.first != keep; });
  std::erase_if(out.seq_rows, [&](const auto& kv) { return kv.first != keep; });
  return out;
}

void purity(Outcome& o) {
  const auto dir = scratch_dir("purity");
  SynthConfig c;
  c.n_subjects = 4;
  c.trials_per_subject = 8;
  c.trial_length_s = 10;
  c.effects = default_effects(1.0);
  c.seed = 21;
  c.montage = "emotiv14";
  c.dataset_id = "p14";
  const auto m14 = load_manifest(synth_generate(c, dir / "p14"));
  c.montage = "deap32";
  c.dataset_id = "p32";
  const auto m32 = load_manifest(synth_generate(c, dir / "p32"));

  const embedding::StubProvider stub(3);
  ExtractConfig cfg;
  cfg.provider = &stub;
  const std::vector<Method> methods{Method::eeg_psd, Method::eeg_topo};
  const auto t14 = extract_table(m14, methods, cfg, nullptr, MissingPolicy::per_experiment);
  const auto t32 = extract_table(m32, methods, cfg, nullptr, MissingPolicy::per_experiment);

  auto s = eeg_loso(dir / "p14/manifest.json", Target::valence);
  s.classifier.elm.hidden = 100;
  const auto pr = purity_check(t14, s);
  for (const auto& f : pr.failures) o.require(false, f);
  o.require(pr.ok, "purity check");
  const auto r1 = report_json(run_loso(t14, s)), r2 = report_json(run_loso(t14, s));
  o.require(r1 == r2, "duplicate scoring gives identical reports");

  s.protocol = Protocol::transfer;
  s.feature_sets = {"eeg_psd"};
  bool rejected = false;
  try {
    run_transfer(std::vector<FeatureTable>{only(t32, Method::eeg_psd)}, only(t14, Method::eeg_psd), s);
  } catch (const FeatureSetMismatch&) {
    rejected = true;
  }
  o.require(rejected, "band PSD transfer 32 -> 14 channels is rejected");
  s.feature_sets = {"eeg_topo"};
  std::size_t scored = 0;
  double acc = 0;
  try {
    const auto r = run_transfer(std::vector<FeatureTable>{only(t32, Method::eeg_topo)}, only(t14, Method::eeg_topo), s);
    scored = r.n_scored;
    acc = r.eval.accuracy;
  } catch (const std::exception& e) {
    o.require(false, std::string("topo transfer threw: ") + e.what());
  }
  o.require(scored == t14.size(), "topo transfer scores every test trial");
  o.detail << "fold fits ignore test rows, reports identical; psd transfer " << (rejected ? "rejected" : "ACCEPTED")
           << ", topo transfer scored " << scored << " trials at " << acc << "%";
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"entropy-oracle", 10, entropy_oracle},
      {"pnn50-exact", 1, pnn50_exact},
      {"peaks-hr", 1, peaks_hr},
      {"band-power", 1, band_power},
      {"golden-images", 5, golden},
      {"cardinalities", 0, cardinalities},
      {"lstm-gradient", 30, lstm_gradient},
      {"elm", 0, elm},
      {"e2e-planted-loso", 300, end_to_end},
      {"purity", 0, purity},
  };
  std::printf("affectlab acceptance, %d thread(s)\n", max_threads());
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs >= c.limit_s) o.require(false, "runtime over limit");
    failed += !o.pass;
    char timing[64];
    if (c.limit_s > 0)
      std::snprintf(timing, sizeof timing, "%.2f s, limit %.0f s", secs, c.limit_s);
    else
      std::snprintf(timing, sizeof timing, "%.2f s", secs);
    std::printf("%s  %-18s %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, o.detail.str().c_str(), timing);
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
