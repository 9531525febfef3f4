#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace affectlab::eeg {

struct Electrode {
  std::string name;
  double u = 0.0;  // right
  double v = 0.0;  // nose
};

// Electrode positions in the unit head disc (azimuthal-equidistant projection
// of 10-20 positions; the 90 degree ring sits at r = 0.8).
class ScalpLayout {
 public:
  ScalpLayout() = default;
  explicit ScalpLayout(std::vector<Electrode> entries);

  // "deap32" (32-channel 10-20 montage) or "emotiv14".
  static ScalpLayout builtin(const std::string& name);
  // JSON array of {"name", "u", "v"}.
  static ScalpLayout load_json(const std::filesystem::path& path);
  void save_json(const std::filesystem::path& path) const;

  const std::vector<Electrode>& entries() const { return entries_; }
  std::optional<Electrode> find(const std::string& name) const;
  const Electrode& at(const std::string& name) const;  // throws on unknown channel

 private:
  std::vector<Electrode> entries_;
};

// Resolves a manifest layout reference: builtin name, or a path relative to root.
ScalpLayout resolve_layout(const std::string& ref, const std::filesystem::path& root);

}  // namespace affectlab::eeg
