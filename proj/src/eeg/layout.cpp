#include "affectlab/eeg/layout.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "affectlab/core/error.hpp"
#include "json.hpp"

namespace affectlab::eeg {
namespace {

// BESA spherical angles (degrees): theta = signed inclination from Cz
// (negative = left hemisphere), phi = azimuth from the T7-T8 axis.
struct Spherical {
  const char* name;
  double theta;
  double phi;
};

constexpr Spherical kDeap32[] = {
    {"Fp1", -90, -72}, {"AF3", -74, -65}, {"F3", -60, -51},  {"F7", -90, -36}, {"FC5", -69, -21},
    {"FC1", -31, -46}, {"C3", -45, 0},    {"T7", -90, 0},    {"CP5", -69, 21}, {"CP1", -31, 46},
    {"P3", -60, 51},   {"P7", -90, 36},   {"PO3", -74, 65},  {"O1", -90, 72},  {"Oz", 90, -90},
    {"Pz", 45, -90},   {"Fp2", 90, 72},   {"AF4", 74, 65},   {"Fz", 45, 90},   {"F4", 60, 51},
    {"F8", 90, 36},    {"FC6", 69, 21},   {"FC2", 31, 46},   {"Cz", 0, 0},     {"C4", 45, 0},
    {"T8", 90, 0},     {"CP6", 69, -21},  {"CP2", 31, -46},  {"P4", 60, -51},  {"P8", 90, -36},
    {"PO4", 74, -65},  {"O2", 90, -72},
};

constexpr Spherical kEmotiv14[] = {
    {"AF3", -74, -65}, {"F7", -90, -36}, {"F3", -60, -51}, {"FC5", -69, -21}, {"T7", -90, 0},
    {"P7", -90, 36},   {"O1", -90, 72},  {"O2", 90, -72},  {"P8", 90, -36},   {"T8", 90, 0},
    {"FC6", 69, 21},   {"F4", 60, 51},   {"F8", 90, 36},   {"AF4", 74, 65},
};

constexpr double kEquatorRadius = 0.8;

Electrode project(const Spherical& s) {
  const double deg = std::numbers::pi / 180.0;
  const double x = std::sin(s.theta * deg) * std::cos(s.phi * deg);
  const double y = std::sin(s.theta * deg) * std::sin(s.phi * deg);
  const double r = std::abs(s.theta) / 90.0 * kEquatorRadius;
  const double norm = std::hypot(x, y);
  if (norm == 0.0) return {s.name, 0.0, 0.0};
  return {s.name, r * x / norm, r * y / norm};
}

template <std::size_t N>
std::vector<Electrode> project_all(const Spherical (&table)[N]) {
  std::vector<Electrode> out;
  for (const auto& s : table) out.push_back(project(s));
  return out;
}

}  // namespace

ScalpLayout::ScalpLayout(std::vector<Electrode> entries) : entries_(std::move(entries)) {
  std::set<std::string> names;
  for (const auto& e : entries_) {
    if (!names.insert(e.name).second) throw Error("scalp layout: duplicate electrode '" + e.name + "'");
    if (e.u * e.u + e.v * e.v > 1.0 + 1e-12) throw Error("scalp layout: electrode '" + e.name + "' outside unit disc");
  }
}

ScalpLayout ScalpLayout::builtin(const std::string& name) {
  if (name == "deap32") return ScalpLayout(project_all(kDeap32));
  if (name == "emotiv14") return ScalpLayout(project_all(kEmotiv14));
  throw Error("unknown builtin scalp layout '" + name + "'");
}

ScalpLayout ScalpLayout::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scalp layout " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<Electrode> entries;
    for (const auto& e : j) entries.push_back({e.at("name").get<std::string>(), e.at("u").get<double>(), e.at("v").get<double>()});
    return ScalpLayout(std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error("scalp layout parse error: " + path.string() + ": " + e.what());
  }
}

void ScalpLayout::save_json(const std::filesystem::path& path) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries_) j.push_back({{"name", e.name}, {"u", e.u}, {"v", e.v}});
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::optional<Electrode> ScalpLayout::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  return std::nullopt;
}

const Electrode& ScalpLayout::at(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw Error("unknown channel name '" + name + "' for scalp layout");
}

ScalpLayout resolve_layout(const std::string& ref, const std::filesystem::path& root) {
  if (ref == "deap32" || ref == "emotiv14") return ScalpLayout::builtin(ref);
  if (ref.empty()) throw Error("manifest has no scalp_layout");
  return ScalpLayout::load_json(root / ref);
}

}  // namespace affectlab::eeg
