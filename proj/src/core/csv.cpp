#include "affectlab/core/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "affectlab/core/error.hpp"

namespace affectlab {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

template <class F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const auto line = trim(std::string_view(text).substr(pos, end - pos));
    if (!line.empty()) f(line, line_no);
    pos = end + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::vector<double>> read_signal_csv(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  std::vector<std::vector<double>> channels;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (channels.empty()) channels.resize(fields.size());
    if (fields.size() != channels.size())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(channels.size()) +
                  " columns, got " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_number(fields[c]);
      if (!v) throw Error(path.string() + ":" + std::to_string(line_no) + ": parse error '" + std::string(fields[c]) + "'");
      if (!std::isfinite(*v)) throw Error(path.string() + ":" + std::to_string(line_no) + ": non-finite sample");
      channels[c].push_back(*v);
    }
  });
  if (channels.empty()) throw Error(path.string() + ": empty signal file");
  return channels;
}

void write_signal_csv(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const std::size_t n = channels.empty() ? 0 : channels.front().size();
  std::string line;
  for (std::size_t t = 0; t < n; ++t) {
    line.clear();
    for (std::size_t c = 0; c < channels.size(); ++c) {
      if (c) line += ',';
      line += format_double(channels[c][t]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw Error("write failed: " + path.string());
}

FaceLandmarkTrack read_landmark_csv(const std::filesystem::path& path, const std::string& trial_id) {
  constexpr std::size_t kCols = 1 + 2 * kLandmarkCount + 4;
  const std::string text = slurp(path);
  FaceLandmarkTrack track;
  track.trial_id = trial_id;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_fields(line);
    if (fields.size() != kCols)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(kCols) + " columns");
    if (line_no == 1 && !parse_number(fields[0])) return;  // header
    std::array<double, kCols> row{};
    for (std::size_t i = 0; i < kCols; ++i) {
      const auto v = parse_number(fields[i]);
      if (!v || !std::isfinite(*v)) {
        if (i == 0) throw Error(path.string() + ":" + std::to_string(line_no) + ": bad timestamp");
        return;  // detector failure upstream: frame discarded
      }
      row[i] = *v;
    }
    LandmarkFrame f;
    f.t = row[0];
    for (std::size_t k = 0; k < kLandmarkCount; ++k) f.points[k] = {row[1 + k], row[1 + kLandmarkCount + k]};
    const std::size_t b = 1 + 2 * kLandmarkCount;
    f.box = {row[b], row[b + 1], row[b + 2], row[b + 3]};
    track.frames.push_back(f);
  });
  track.validate();
  return track;
}

void write_landmark_csv(const std::filesystem::path& path, const FaceLandmarkTrack& track) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << 't';
  for (std::size_t k = 1; k <= kLandmarkCount; ++k) out << ",x" << k;
  for (std::size_t k = 1; k <= kLandmarkCount; ++k) out << ",y" << k;
  out << ",bx,by,bw,bh\n";
  for (const auto& f : track.frames) {
    std::string line = format_double(f.t);
    for (const auto& p : f.points) line += ',' + format_double(p.x);
    for (const auto& p : f.points) line += ',' + format_double(p.y);
    line += ',' + format_double(f.box.x) + ',' + format_double(f.box.y) + ',' + format_double(f.box.w) + ',' +
            format_double(f.box.h) + '\n';
    out << line;
  }
}

}  // namespace affectlab
