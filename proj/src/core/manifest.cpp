#include "affectlab/core/manifest.hpp"

#include <fstream>
#include <set>

#include "affectlab/core/csv.hpp"
#include "affectlab/core/error.hpp"
#include "json.hpp"

namespace affectlab {

using nlohmann::json;
namespace fs = std::filesystem;

std::size_t DatasetManifest::trial_count() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.trials.size();
  return n;
}

bool DatasetManifest::provides_liking() const {
  for (const auto& s : subjects)
    for (const auto& t : s.trials)
      if (!t.labels.liking) return false;
  return trial_count() > 0;
}

namespace {

TrialEntry parse_trial(const json& j, const DatasetManifest& m, const std::string& ctx) {
  TrialEntry t;
  t.id = j.at("id").get<std::string>();
  if (j.contains("signals"))
    for (const auto& [key, value] : j.at("signals").items()) t.signals[parse_modality(key)] = value.get<std::string>();
  if (j.contains("landmarks") && !j.at("landmarks").is_null()) t.landmarks = j.at("landmarks").get<std::string>();
  if (j.contains("face_frames"))
    for (const auto& p : j.at("face_frames")) t.face_frames.emplace_back(p.get<std::string>());

  const auto& lab = j.at("labels");
  t.labels.valence = lab.at("valence").get<double>();
  t.labels.arousal = lab.at("arousal").get<double>();
  if (lab.contains("liking") && !lab.at("liking").is_null()) t.labels.liking = lab.at("liking").get<double>();
  t.labels.scale_midpoint = m.rating_scale.midpoint();

  const auto check = [&](double r, const char* what) {
    if (!m.rating_scale.contains(r))
      throw Error(ctx + " trial " + t.id + ": " + what + " rating " + format_double(r) + " outside scale");
  };
  check(t.labels.valence, "valence");
  check(t.labels.arousal, "arousal");
  if (t.labels.liking) check(*t.labels.liking, "liking");

  const auto require = [&](const fs::path& rel) {
    if (!fs::exists(m.root / rel)) throw Error("missing trial file: " + (m.root / rel).string());
  };
  for (const auto& [mod, rel] : t.signals) require(rel);
  if (t.landmarks) require(*t.landmarks);
  for (const auto& f : t.face_frames) require(f);
  return t;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("manifest parse error: " + path.string() + ": " + e.what());
  }

  DatasetManifest m;
  m.root = fs::absolute(path).parent_path();
  try {
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.rating_scale.min = j.at("rating_scale").at("min").get<double>();
    m.rating_scale.max = j.at("rating_scale").at("max").get<double>();
    if (!(m.rating_scale.min < m.rating_scale.max)) throw Error("manifest " + path.string() + ": rating min must be < max");
    for (const auto& [key, value] : j.at("sampling_rates").items()) {
      const double fs_hz = value.get<double>();
      if (!(fs_hz > 0)) throw Error("manifest: sampling rate for " + key + " must be positive");
      m.sampling_rates[parse_modality(key)] = fs_hz;
    }
    if (j.contains("channels"))
      for (const auto& [key, value] : j.at("channels").items())
        m.channels[parse_modality(key)] = value.get<std::vector<std::string>>();
    m.scalp_layout_ref = j.value("scalp_layout", std::string{});
    m.raw_eeg = j.value("preprocessing", std::string("clean")) == "raw";
    m.notes = j.value("notes", std::string{});

    std::set<std::string> subject_ids, trial_ids;
    for (const auto& sj : j.at("subjects")) {
      SubjectEntry s;
      s.id = sj.at("id").get<std::string>();
      if (!subject_ids.insert(s.id).second) throw Error("manifest: duplicate subject id '" + s.id + "'");
      for (const auto& tj : sj.at("trials")) {
        auto t = parse_trial(tj, m, "subject " + s.id);
        if (!trial_ids.insert(t.id).second) throw Error("manifest: duplicate trial id '" + t.id + "'");
        for (const auto& [mod, rel] : t.signals)
          if (!m.sampling_rates.count(mod))
            throw Error("manifest: no sampling rate for " + std::string(to_string(mod)));
        s.trials.push_back(std::move(t));
      }
      m.subjects.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error("manifest parse error: " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
  json j;
  j["dataset_id"] = m.dataset_id;
  j["rating_scale"] = {{"min", m.rating_scale.min}, {"max", m.rating_scale.max}};
  j["sampling_rates"] = json::object();
  for (const auto& [mod, hz] : m.sampling_rates) j["sampling_rates"][std::string(to_string(mod))] = hz;
  j["channels"] = json::object();
  for (const auto& [mod, names] : m.channels) j["channels"][std::string(to_string(mod))] = names;
  j["scalp_layout"] = m.scalp_layout_ref;
  j["preprocessing"] = m.raw_eeg ? "raw" : "clean";
  j["notes"] = m.notes;
  j["subjects"] = json::array();
  for (const auto& s : m.subjects) {
    json sj{{"id", s.id}, {"trials", json::array()}};
    for (const auto& t : s.trials) {
      json tj{{"id", t.id}, {"signals", json::object()}};
      for (const auto& [mod, rel] : t.signals) tj["signals"][std::string(to_string(mod))] = rel.generic_string();
      if (t.landmarks) tj["landmarks"] = t.landmarks->generic_string();
      if (!t.face_frames.empty()) {
        tj["face_frames"] = json::array();
        for (const auto& f : t.face_frames) tj["face_frames"].push_back(f.generic_string());
      }
      json lab{{"valence", t.labels.valence}, {"arousal", t.labels.arousal}};
      if (t.labels.liking) lab["liking"] = *t.labels.liking;
      tj["labels"] = lab;
      sj["trials"].push_back(tj);
    }
    j["subjects"].push_back(sj);
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

TrialRecording load_trial(const DatasetManifest& m, const SubjectEntry& subject, const TrialEntry& trial,
                          Modality modality) {
  const auto it = trial.signals.find(modality);
  if (it == trial.signals.end())
    throw Error("trial " + trial.id + ": no " + std::string(to_string(modality)) + " recording");
  TrialRecording rec;
  rec.trial_id = trial.id;
  rec.subject_id = subject.id;
  rec.modality = modality;
  rec.fs = m.sampling_rates.at(modality);
  rec.samples = read_signal_csv(m.root / it->second);
  if (const auto ch = m.channels.find(modality); ch != m.channels.end()) {
    rec.channels = ch->second;
  } else {
    for (std::size_t c = 0; c < rec.samples.size(); ++c) rec.channels.push_back(std::string(to_string(modality)) + std::to_string(c + 1));
  }
  rec.validate();
  return rec;
}

FaceLandmarkTrack load_landmarks(const DatasetManifest& m, const TrialEntry& trial) {
  if (!trial.landmarks) throw Error("trial " + trial.id + ": no landmark track");
  return read_landmark_csv(m.root / *trial.landmarks, trial.id);
}

}  // namespace affectlab
