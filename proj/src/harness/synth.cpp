#include "affectlab/harness/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "affectlab/core/csv.hpp"
#include "affectlab/core/error.hpp"
#include "affectlab/core/manifest.hpp"
#include "affectlab/core/rng.hpp"
#include "affectlab/eeg/layout.hpp"
#include "affectlab/face/features.hpp"
#include "affectlab/image/image.hpp"

namespace affectlab::harness {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Keeps the CSV short and the bytes stable.
double quantize(double x) { return std::round(x * 1e5) / 1e5; }

std::vector<double> quantized(std::vector<double> x) {
  for (auto& v : x) v = quantize(v);
  return x;
}

// 1/f noise from white noise through a three-pole pinking filter, unit rms.
std::vector<double> pink_noise(std::size_t n, Rng& rng) {
  std::vector<double> x(n);
  double b0 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < n + 256; ++i) {
    const double w = rng.normal();
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    if (i >= 256) x[i - 256] = b0 + b1 + b2 + w * 0.1848;
  }
  double ss = 0, m = 0;
  for (double v : x) m += v;
  m /= static_cast<double>(n);
  for (auto& v : x) v -= m, ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(n));
  for (auto& v : x) v /= rms;
  return x;
}

double effect(const std::vector<PlantedEffect>& list, const std::string& feature) {
  double s = 0;
  for (const auto& e : list)
    if (e.feature == feature) s += e.size;
  return s;
}

struct BandCentre {
  const char* name;
  double lo, hi;
};
constexpr BandCentre kBands[] = {{"theta", 4.5, 6.5}, {"alpha", 8.5, 11.5}, {"beta", 16.0, 24.0}};

struct TrialPlan {
  bool valence_high = false, arousal_high = false;
  double valence = 5, arousal = 5, liking = 5;
};

double rating(bool high, Rng& rng) { return high ? rng.uniform(5.5, 9.0) : rng.uniform(1.0, 4.5); }

std::vector<double> eeg_channel(const SynthConfig& cfg, const std::string& name, const TrialPlan& plan, double gain,
                                Rng& rng) {
  const auto n = static_cast<std::size_t>(std::lround(cfg.trial_length_s * cfg.eeg_fs));
  auto x = pink_noise(n, rng);
  for (auto& v : x) v *= gain;
  for (const auto& [target, list] : cfg.effects) {
    const bool high = target == "valence" ? plan.valence_high : target == "arousal" ? plan.arousal_high : false;
    const auto& sites = effect_sites(target);
    const bool here = std::find(sites.begin(), sites.end(), name) != sites.end();
    for (const auto& b : kBands) {
      const double size = effect(list, b.name);
      // draw even when unused so streams do not shift with the labels
      const double f = rng.uniform(b.lo, b.hi), ph = rng.uniform(0, kTwoPi);
      if (!(high && here && size > 0)) continue;
      const double amp = size * gain * std::sqrt(2.0);
      for (std::size_t i = 0; i < n; ++i) x[i] += amp * std::sin(kTwoPi * f * static_cast<double>(i) / cfg.eeg_fs + ph);
    }
  }
  return quantized(std::move(x));
}

std::vector<std::vector<double>> cardiac_signal(const SynthConfig& cfg, const TrialPlan& plan, double base_bpm,
                                                Rng& rng) {
  const double hr_size = plan.arousal_high ? effect(cfg.effects.count("arousal") ? cfg.effects.at("arousal")
                                                                                 : std::vector<PlantedEffect>{},
                                                    "hr")
                                           : 0.0;
  const double bpm = base_bpm + 12.0 * hr_size;
  const double jitter = 0.04 / (1.0 + hr_size);
  std::vector<double> beats;
  for (double t = rng.uniform(0.1, 0.6); t < cfg.trial_length_s;) {
    beats.push_back(t);
    t += std::max(0.55, 60.0 / bpm * (1.0 + jitter * rng.normal()));
  }
  const auto n = static_cast<std::size_t>(std::lround(cfg.trial_length_s * cfg.cardiac_fs));
  std::vector<std::vector<double>> out;
  for (int c = 0; c < cfg.cardiac_channels; ++c) {
    std::vector<double> x(n, 0.0);
    const double width = 0.05 + 0.01 * c, wander = rng.uniform(0.05, 0.2), wph = rng.uniform(0, kTwoPi);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / cfg.cardiac_fs;
      x[i] = 0.1 * std::sin(kTwoPi * wander * t + wph) + 0.02 * rng.normal();
    }
    for (double b : beats) {
      const auto lo = static_cast<std::size_t>(std::max(0.0, (b - 6 * width) * cfg.cardiac_fs));
      const auto hi = std::min(n, static_cast<std::size_t>((b + 6 * width) * cfg.cardiac_fs) + 1);
      for (std::size_t i = lo; i < hi; ++i) {
        const double d = (static_cast<double>(i) / cfg.cardiac_fs - b) / width;
        x[i] += std::exp(-0.5 * d * d);
      }
    }
    out.push_back(quantized(std::move(x)));
  }
  return out;
}

std::vector<double> gsr_signal(const SynthConfig& cfg, const TrialPlan& plan, Rng& rng) {
  const double scr = plan.arousal_high && cfg.effects.count("arousal") ? effect(cfg.effects.at("arousal"), "scr") : 0.0;
  const double rate_per_s = 3.0 / 60.0 * (1.0 + scr);
  const auto n = static_cast<std::size_t>(std::lround(cfg.trial_length_s * cfg.gsr_fs));
  std::vector<double> x(n);
  const double level = rng.uniform(2.0, 6.0), slope = rng.uniform(-0.01, 0.01);
  for (std::size_t i = 0; i < n; ++i) x[i] = level + slope * static_cast<double>(i) / cfg.gsr_fs + 0.005 * rng.normal();
  for (double t = -std::log(1.0 - rng.uniform()) / rate_per_s; t < cfg.trial_length_s;
       t += -std::log(1.0 - rng.uniform()) / rate_per_s) {
    const double amp = rng.uniform(0.2, 0.6);
    for (std::size_t i = static_cast<std::size_t>(t * cfg.gsr_fs); i < n; ++i) {
      const double d = static_cast<double>(i) / cfg.gsr_fs - t;
      x[i] += amp * (1.0 - std::exp(-d / 0.7)) * std::exp(-d / 3.0) * 1.9;
    }
  }
  return quantized(std::move(x));
}

std::array<Point2, kLandmarkCount> face_shape(const SynthConfig& cfg, const TrialPlan& plan,
                                              const std::array<Point2, kLandmarkCount>& subject_shape) {
  auto p = subject_shape;
  const auto size_of = [&](const char* target, const char* feature) {
    return cfg.effects.count(target) ? effect(cfg.effects.at(target), feature) : 0.0;
  };
  if (plan.valence_high) {
    const double s = size_of("valence", "mouth");
    p[31].x -= 0.03 * s, p[31].y -= 0.02 * s;
    p[37].x += 0.03 * s, p[37].y -= 0.02 * s;
    for (int i : {32, 42, 43, 48}) p[static_cast<std::size_t>(i)].x -= 0.015 * s;
    for (int i : {36, 38, 45, 46}) p[static_cast<std::size_t>(i)].x += 0.015 * s;
  }
  if (plan.arousal_high) {
    const double s = size_of("arousal", "brow");
    for (int i = 0; i < 10; ++i) p[static_cast<std::size_t>(i)].y -= 0.03 * s;
    for (int i : {20, 21, 26, 27}) p[static_cast<std::size_t>(i)].y -= 0.01 * s;
  }
  return p;
}

RgbImage face_image(const std::array<Point2, kLandmarkCount>& unit_points) {
  RgbImage img(kEmbeddingImageSize, kEmbeddingImageSize);
  std::fill(img.data.begin(), img.data.end(), std::uint8_t{60});
  for (const auto& q : unit_points) {
    const double cx = 12 + q.x * 200, cy = 12 + q.y * 200;
    for (int y = static_cast<int>(cy) - 4; y <= static_cast<int>(cy) + 4; ++y)
      for (int x = static_cast<int>(cx) - 4; x <= static_cast<int>(cx) + 4; ++x) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > 9.0) continue;
        auto* px = img.at(x, y);
        px[0] = px[1] = px[2] = 230;
      }
  }
  return img;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_subjects < 1 || trials_per_subject < 1) throw Error("synth: need at least one subject and one trial");
  if (!(trial_length_s >= 10.0)) throw Error("synth: trial length must be at least 10 s");
  if (montage != "deap32" && montage != "emotiv14") throw Error("synth: unknown montage '" + montage + "'");
  if (!(eeg_fs > 60 && cardiac_fs > 10 && gsr_fs > 4 && face_fps > 0)) throw Error("synth: sampling rates too low");
  if (cardiac_channels < 1 || face_images < 0) throw Error("synth: bad channel or image count");
  if (!(missing_rate >= 0 && missing_rate < 1)) throw Error("synth: missing_rate must be in [0, 1)");
  for (const auto& [target, list] : effects) {
    if (target != "valence" && target != "arousal") throw Error("synth: effects only for valence or arousal");
    for (const auto& e : list) {
      if (!(e.size >= 0)) throw Error("synth: effect sizes must be >= 0");
      static const std::vector<std::string> known{"alpha", "beta", "theta", "hr", "scr", "mouth", "brow"};
      if (std::find(known.begin(), known.end(), e.feature) == known.end())
        throw Error("synth: unknown effect feature '" + e.feature + "'");
    }
  }
}

std::map<std::string, std::vector<PlantedEffect>> default_effects(double size) {
  return {{"valence", {{"alpha", size}, {"mouth", size}}},
          {"arousal", {{"beta", size}, {"hr", size}, {"scr", size}, {"brow", size}}}};
}

const std::vector<std::string>& effect_sites(const std::string& target) {
  static const std::vector<std::string> valence{"AF3", "F3", "F7", "FC5"};
  static const std::vector<std::string> arousal{"P7", "P8", "O1", "O2"};
  static const std::vector<std::string> none;
  return target == "valence" ? valence : target == "arousal" ? arousal : none;
}

SynthConfig parse_synth_config(const std::string& text) {
  SynthConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error("synth config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
      if (k == "dataset_id") c.dataset_id = v.get<std::string>();
      else if (k == "n_subjects") c.n_subjects = v.get<int>();
      else if (k == "trials_per_subject") c.trials_per_subject = v.get<int>();
      else if (k == "trial_length_s") c.trial_length_s = v.get<double>();
      else if (k == "montage") c.montage = v.get<std::string>();
      else if (k == "eeg_fs") c.eeg_fs = v.get<double>();
      else if (k == "cardiac_fs") c.cardiac_fs = v.get<double>();
      else if (k == "cardiac_channels") c.cardiac_channels = v.get<int>();
      else if (k == "gsr_fs") c.gsr_fs = v.get<double>();
      else if (k == "face_fps") c.face_fps = v.get<double>();
      else if (k == "face_images") c.face_images = v.get<int>();
      else if (k == "missing_rate") c.missing_rate = v.get<double>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "effect_size") c.effects = default_effects(v.get<double>());
      else if (k == "effects") {
        c.effects.clear();
        for (const auto& [target, list] : v.items())
          for (const auto& e : list) c.effects[target].push_back({e.at("feature").get<std::string>(), e.at("size").get<double>()});
      } else {
        throw Error("synth config: unknown key '" + k + "'");
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string("synth config parse error: ") + e.what());
  }
  c.validate();
  return c;
}

fs::path synth_generate(const SynthConfig& cfg, const fs::path& dir) {
  cfg.validate();
  const auto layout = eeg::ScalpLayout::builtin(cfg.montage);
  std::vector<std::string> eeg_channels;
  for (const auto& e : layout.entries()) eeg_channels.push_back(e.name);
  std::vector<std::string> cardiac_channels;
  for (int c = 0; c < cfg.cardiac_channels; ++c)
    cardiac_channels.push_back(cfg.cardiac_channels == 1 ? "ppg" : "ecg" + std::to_string(c + 1));
  const Modality cardiac_mod = cfg.cardiac_channels == 1 ? Modality::PPG : Modality::ECG;

  DatasetManifest m;
  m.dataset_id = cfg.dataset_id;
  m.root = dir;
  m.rating_scale = {1.0, 9.0};
  m.sampling_rates = {{Modality::EEG, cfg.eeg_fs}, {cardiac_mod, cfg.cardiac_fs}, {Modality::GSR, cfg.gsr_fs}};
  m.channels = {{Modality::EEG, eeg_channels}, {cardiac_mod, cardiac_channels}, {Modality::GSR, {"gsr"}}};
  m.scalp_layout_ref = cfg.montage;
  m.notes = "synthetic";

  fs::create_directories(dir);
  for (int s = 0; s < cfg.n_subjects; ++s) {
    SubjectEntry subject;
    char sid[16];
    std::snprintf(sid, sizeof sid, "s%02d", s + 1);
    subject.id = sid;
    const fs::path sdir = dir / subject.id;
    fs::create_directories(sdir);

    Rng srng(cfg.seed, 0x5000 + static_cast<std::uint64_t>(s));
    std::vector<double> gains;
    for (std::size_t c = 0; c < eeg_channels.size(); ++c) gains.push_back(srng.uniform(0.8, 1.25));
    const double base_bpm = srng.uniform(60.0, 80.0);
    auto shape = face::reference_landmarks();
    for (auto& q : shape) q = {q.x + 0.004 * srng.normal(), q.y + 0.004 * srng.normal()};

    // balanced classes per subject, shuffled
    std::vector<int> vhigh(static_cast<std::size_t>(cfg.trials_per_subject)), ahigh(vhigh.size());
    for (std::size_t i = 0; i < vhigh.size(); ++i) vhigh[i] = static_cast<int>(i % 2), ahigh[i] = static_cast<int>((i / 2) % 2);
    srng.shuffle(vhigh.begin(), vhigh.end());
    srng.shuffle(ahigh.begin(), ahigh.end());

    for (int k = 0; k < cfg.trials_per_subject; ++k) {
      Rng rng(cfg.seed, (static_cast<std::uint64_t>(s) << 20) + static_cast<std::uint64_t>(k) + 1);
      TrialPlan plan;
      plan.valence_high = vhigh[static_cast<std::size_t>(k)] != 0;
      plan.arousal_high = ahigh[static_cast<std::size_t>(k)] != 0;
      plan.valence = quantize(rating(plan.valence_high, rng));
      plan.arousal = quantize(rating(plan.arousal_high, rng));
      plan.liking = quantize(std::clamp(plan.valence + rng.normal(), 1.0, 9.0));

      TrialEntry trial;
      char tid[32];
      std::snprintf(tid, sizeof tid, "%s_t%02d", subject.id.c_str(), k + 1);
      trial.id = tid;
      trial.labels.valence = plan.valence;
      trial.labels.arousal = plan.arousal;
      trial.labels.liking = plan.liking;
      const bool drop_cardiac = rng.uniform() < cfg.missing_rate;
      const bool drop_gsr = rng.uniform() < cfg.missing_rate;
      const bool drop_face = rng.uniform() < cfg.missing_rate;

      std::vector<std::vector<double>> eeg;
      for (std::size_t c = 0; c < eeg_channels.size(); ++c) eeg.push_back(eeg_channel(cfg, eeg_channels[c], plan, gains[c], rng));
      const fs::path eeg_rel = fs::path(subject.id) / (trial.id + "_eeg.csv");
      write_signal_csv(dir / eeg_rel, eeg);
      trial.signals[Modality::EEG] = eeg_rel;

      const auto card = cardiac_signal(cfg, plan, base_bpm, rng);
      if (!drop_cardiac) {
        const fs::path rel = fs::path(subject.id) / (trial.id + "_cardiac.csv");
        write_signal_csv(dir / rel, card);
        trial.signals[cardiac_mod] = rel;
      }
      const auto gsr = gsr_signal(cfg, plan, rng);
      if (!drop_gsr) {
        const fs::path rel = fs::path(subject.id) / (trial.id + "_gsr.csv");
        write_signal_csv(dir / rel, {gsr});
        trial.signals[Modality::GSR] = rel;
      }

      const auto face = face_shape(cfg, plan, shape);
      FaceLandmarkTrack track;
      track.trial_id = trial.id;
      const FaceBox box{40.0, 30.0, 150.0, 180.0};
      const auto frames = static_cast<int>(std::floor(cfg.trial_length_s * cfg.face_fps));
      for (int f = 0; f < frames; ++f) {
        LandmarkFrame fr;
        fr.t = quantize(f / cfg.face_fps);
        fr.box = box;
        for (std::size_t i = 0; i < kLandmarkCount; ++i)
          fr.points[i] = {quantize(box.x + (face[i].x + 0.003 * rng.normal()) * box.w),
                          quantize(box.y + (face[i].y + 0.003 * rng.normal()) * box.h)};
        track.frames.push_back(fr);
      }
      std::vector<RgbImage> crops;
      for (int f = 0; f < cfg.face_images; ++f) {
        auto q = face;
        for (auto& p : q) p = {p.x + 0.003 * rng.normal(), p.y + 0.003 * rng.normal()};
        crops.push_back(face_image(q));
      }
      if (!drop_face) {
        const fs::path rel = fs::path(subject.id) / (trial.id + "_landmarks.csv");
        write_landmark_csv(dir / rel, track);
        trial.landmarks = rel;
        for (int f = 0; f < cfg.face_images; ++f) {
          char name[64];
          std::snprintf(name, sizeof name, "%s_face%02d.png", trial.id.c_str(), f);
          const fs::path frel = fs::path(subject.id) / name;
          write_png(dir / frel, crops[static_cast<std::size_t>(f)]);
          trial.face_frames.push_back(frel);
        }
      }
      subject.trials.push_back(std::move(trial));
    }
    m.subjects.push_back(std::move(subject));
  }
  const fs::path manifest = dir / "manifest.json";
  save_manifest(m, manifest);
  return manifest;
}

}  // namespace affectlab::harness
