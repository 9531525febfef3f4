#include "affectlab/face/features.hpp"

#include <cmath>
#include <exception>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/moments.hpp"

namespace affectlab::face {

namespace {

enum class Axis { H, V, O };

// A point is a landmark index or the mean of a few landmarks.
struct Ref {
  std::vector<int> ids;
};

struct Distance {
  const char* name;
  Ref a, b;
  Axis axis;
};

const std::vector<int> kEyeL{19, 20, 21, 22, 23, 24};
const std::vector<int> kEyeR{25, 26, 27, 28, 29, 30};

const std::array<Distance, kGeometryFeatures>& table() {
  static const std::array<Distance, kGeometryFeatures> t{{
      {"brow_eye_l", {{2}}, {kEyeL}, Axis::V},
      {"brow_eye_r", {{7}}, {kEyeR}, Axis::V},
      {"inner_brow_eye_l", {{4}}, {{22}}, Axis::V},
      {"inner_brow_eye_r", {{5}}, {{25}}, Axis::V},
      {"outer_brow_eye_l", {{0}}, {{19}}, Axis::V},
      {"outer_brow_eye_r", {{9}}, {{28}}, Axis::V},
      {"inner_brow_gap", {{4}}, {{5}}, Axis::H},
      {"eye_open_l", {{20, 21}}, {{23, 24}}, Axis::V},
      {"eye_open_r", {{26, 27}}, {{29, 30}}, Axis::V},
      {"eye_width_l", {{19}}, {{22}}, Axis::H},
      {"eye_width_r", {{25}}, {{28}}, Axis::H},
      {"nose_upper_lip", {{16}}, {{34}}, Axis::V},
      {"inter_lip_gap", {{44}}, {{47}}, Axis::V},
      {"mouth_width", {{31}}, {{37}}, Axis::H},
      {"inner_mouth_width", {{43, 48}}, {{45, 46}}, Axis::H},
      {"outer_lip_height", {{34}}, {{40}}, Axis::V},
      {"upper_lip_thickness", {{34}}, {{44}}, Axis::V},
      {"lower_lip_thickness", {{47}}, {{40}}, Axis::V},
      {"corner_eye_l", {{31}}, {kEyeL}, Axis::O},
      {"corner_eye_r", {{37}}, {kEyeR}, Axis::O},
      {"corner_nose_l", {{31}}, {{14}}, Axis::O},
      {"corner_nose_r", {{37}}, {{18}}, Axis::O},
      {"nose_length", {{10}}, {{13}}, Axis::V},
      {"nose_width", {{14}}, {{18}}, Axis::H},
      {"brow_nose_l", {{2}}, {{10}}, Axis::O},
      {"brow_nose_r", {{7}}, {{10}}, Axis::O},
      {"inner_eye_gap", {{22}}, {{25}}, Axis::H},
      {"nose_lower_lip", {{16}}, {{40}}, Axis::V},
      {"corner_upper_lip_l", {{31}}, {{34}}, Axis::O},
      {"corner_upper_lip_r", {{37}}, {{34}}, Axis::O},
  }};
  return t;
}

Point2 resolve(const Ref& r, const std::array<Point2, kLandmarkCount>& p) {
  Point2 out;
  for (int i : r.ids) {
    out.x += p[static_cast<std::size_t>(i)].x;
    out.y += p[static_cast<std::size_t>(i)].y;
  }
  out.x /= static_cast<double>(r.ids.size());
  out.y /= static_cast<double>(r.ids.size());
  return out;
}

}  // namespace

const std::array<Point2, kLandmarkCount>& reference_landmarks() {
  static const std::array<Point2, kLandmarkCount> p{{
      {0.18, 0.32}, {0.24, 0.28}, {0.30, 0.27}, {0.36, 0.28}, {0.42, 0.30},                    // brow l
      {0.58, 0.30}, {0.64, 0.28}, {0.70, 0.27}, {0.76, 0.28}, {0.82, 0.32},                    // brow r
      {0.50, 0.38}, {0.50, 0.45}, {0.50, 0.52}, {0.50, 0.58},                                  // bridge
      {0.42, 0.62}, {0.46, 0.63}, {0.50, 0.64}, {0.54, 0.63}, {0.58, 0.62},                    // nose base
      {0.22, 0.40}, {0.27, 0.37}, {0.33, 0.37}, {0.38, 0.40}, {0.33, 0.43}, {0.27, 0.43},      // eye l
      {0.62, 0.40}, {0.67, 0.37}, {0.73, 0.37}, {0.78, 0.40}, {0.73, 0.43}, {0.67, 0.43},      // eye r
      {0.36, 0.75}, {0.40, 0.72}, {0.45, 0.71}, {0.50, 0.72}, {0.55, 0.71}, {0.60, 0.72},      // upper lip
      {0.64, 0.75}, {0.60, 0.79}, {0.55, 0.81}, {0.50, 0.815}, {0.45, 0.81}, {0.40, 0.79},     // lower lip
      {0.44, 0.745}, {0.50, 0.75}, {0.56, 0.745}, {0.56, 0.765}, {0.50, 0.77}, {0.44, 0.765},  // inner lip
  }};
  return p;
}

const std::array<std::string, kGeometryFeatures>& geometry_names() {
  static const auto names = [] {
    std::array<std::string, kGeometryFeatures> n;
    for (std::size_t i = 0; i < kGeometryFeatures; ++i) n[i] = table()[i].name;
    return n;
  }();
  return names;
}

std::array<double, kGeometryFeatures> frame_geometry(const std::array<Point2, kLandmarkCount>& points,
                                                     const FaceBox& box) {
  if (!(box.w > 0 && box.h > 0)) throw Error("frame_geometry: degenerate face box");
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error("frame_geometry: non-finite landmark");
  const double diag = std::sqrt(box.w * box.h);
  std::array<double, kGeometryFeatures> out{};
  for (std::size_t i = 0; i < kGeometryFeatures; ++i) {
    const auto& d = table()[i];
    const Point2 a = resolve(d.a, points), b = resolve(d.b, points);
    const double dx = a.x - b.x, dy = a.y - b.y;
    switch (d.axis) {
      case Axis::H: out[i] = std::abs(dx) / box.w; break;
      case Axis::V: out[i] = std::abs(dy) / box.h; break;
      case Axis::O: out[i] = std::hypot(dx, dy) / diag; break;
    }
  }
  return out;
}

FeatureBlock aggregate_track(const std::vector<std::vector<double>>& per_frame, std::span<const std::string> names,
                             const std::string& trial_id) {
  if (per_frame.empty()) throw Error("aggregate_track: empty track" + (trial_id.empty() ? "" : " in trial " + trial_id));
  const std::size_t d = per_frame.front().size();
  if (names.size() != d) throw Error("aggregate_track: name count != feature count");
  for (const auto& f : per_frame)
    if (f.size() != d) throw Error("aggregate_track: ragged frames");
  FeatureBlock block;
  block.trial_id = trial_id;
  block.family = "face_geometry";
  block.values.assign(3 * d, 0.0);
  std::vector<double> col(per_frame.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < per_frame.size(); ++i) col[i] = per_frame[i][j];
    block.values[j] = dsp::mean(col);
    block.values[d + j] = dsp::percentile(col, 0.95);
    block.values[2 * d + j] = dsp::pstdev(col);
  }
  for (const char* stat : {"mean", "p95", "std"})
    for (const auto& n : names) block.names.push_back(std::string(stat) + ":" + n);
  return block;
}

FeatureBlock geometry_features(const FaceLandmarkTrack& track) {
  track.validate();
  std::vector<std::vector<double>> rows;
  for (const auto& f : track.frames) {
    const auto g = frame_geometry(f.points, f.box);
    rows.emplace_back(g.begin(), g.end());
  }
  return aggregate_track(rows, geometry_names(), track.trial_id);
}

Eigen::VectorXd face_embedding_aggregate(std::span<const RgbImage> frames, const embedding::EmbeddingProvider& provider,
                                         const std::string& trial_id) {
  if (frames.empty()) throw Error("face_embedding_aggregate: no frames" + (trial_id.empty() ? "" : " in trial " + trial_id));
  const auto d = static_cast<Eigen::Index>(provider.dim());
  Eigen::MatrixXd e(static_cast<Eigen::Index>(frames.size()), d);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    try {
      e.row(static_cast<Eigen::Index>(i)) = provider.embed(frames[i], embedding::ImageProfile::face).transpose();
    } catch (const std::exception& ex) {
      throw Error("trial " + trial_id + ": face frame " + std::to_string(i) + ": " + ex.what());
    }
  }
  Eigen::VectorXd out(3 * d);
  std::vector<double> col(frames.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < frames.size(); ++i) col[i] = e(static_cast<Eigen::Index>(i), j);
    out(j) = dsp::mean(col);
    out(d + j) = dsp::percentile(col, 0.95);
    out(2 * d + j) = dsp::pstdev(col);
  }
  return out;
}

FeatureBlock face_embedding_features(std::span<const RgbImage> frames, const embedding::EmbeddingProvider& provider,
                                     const learn::PcaModel& pca, const std::string& trial_id) {
  if (pca.k() > 30) throw Error("face_embedding_features: PCA keeps more than 30 components");
  if (pca.d() != static_cast<Eigen::Index>(3 * provider.dim()))
    throw Error("face_embedding_features: PCA input dim != 3 * provider dim");
  const auto z = pca.transform(face_embedding_aggregate(frames, provider, trial_id));
  FeatureBlock block;
  block.trial_id = trial_id;
  block.family = "face_embedding";
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    block.names.push_back("face_emb:pc" + std::to_string(i + 1));
    block.values.push_back(z(i));
  }
  return block;
}

}  // namespace affectlab::face
