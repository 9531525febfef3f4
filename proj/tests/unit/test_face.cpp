#include <doctest.h>

#include <numeric>
#include <set>

#include "affectlab/core/error.hpp"
#include "affectlab/core/rng.hpp"
#include "affectlab/face/features.hpp"

using namespace affectlab;
using namespace affectlab::face;

namespace {

std::size_t index_of(const std::string& name) {
  const auto& n = geometry_names();
  return static_cast<std::size_t>(std::find(n.begin(), n.end(), name) - n.begin());
}

std::array<Point2, kLandmarkCount> placed(const FaceBox& box) {
  auto p = reference_landmarks();
  for (auto& q : p) q = {box.x + q.x * box.w, box.y + q.y * box.h};
  return p;
}

RgbImage flat_image(std::uint8_t v) {
  RgbImage img(224, 224);
  std::fill(img.data.begin(), img.data.end(), v);
  return img;
}

}  // namespace

TEST_CASE("geometry: 30 unique names, all non-negative") {
  const auto& n = geometry_names();
  CHECK(std::set<std::string>(n.begin(), n.end()).size() == 30);
  const FaceBox box{10, 20, 120, 150};
  for (double v : frame_geometry(placed(box), box)) CHECK(v >= 0.0);
}

TEST_CASE("geometry: scale and translation invariance") {
  const FaceBox box{10, 20, 120, 150};
  auto p = placed(box);
  Rng rng(1);
  for (auto& q : p) q = {q.x + rng.uniform(-2, 2), q.y + rng.uniform(-2, 2)};
  const auto ref = frame_geometry(p, box);
  auto p2 = p;
  for (auto& q : p2) q = {2 * q.x, 2 * q.y};
  const auto s = frame_geometry(p2, {20, 40, 240, 300});
  auto p3 = p;
  for (auto& q : p3) q = {q.x - 55, q.y + 13};
  const auto t = frame_geometry(p3, {-45, 33, 120, 150});
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(s[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    CHECK(t[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("geometry: symmetric face and closed mouth") {
  const FaceBox box{0, 0, 100, 100};
  auto p = placed(box);
  const auto g = frame_geometry(p, box);
  for (const char* side : {"brow_eye", "inner_brow_eye", "outer_brow_eye", "eye_open", "eye_width", "corner_eye",
                           "corner_nose", "brow_nose", "corner_upper_lip"}) {
    const std::string s = side;
    CHECK(g[index_of(s + "_l")] == doctest::Approx(g[index_of(s + "_r")]).epsilon(1e-12));
  }
  CHECK(g[index_of("inter_lip_gap")] > 0.0);
  p[47] = p[44];
  CHECK(frame_geometry(p, box)[index_of("inter_lip_gap")] == 0.0);
  CHECK_THROWS_AS(frame_geometry(p, {0, 0, 0, 10}), Error);
}

TEST_CASE("aggregate: constant frames, percentile, single frame, permutation") {
  const std::vector<std::string> names{"a", "b"};
  const auto c = aggregate_track({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}, names);
  CHECK(c.values == std::vector<double>{1, 2, 1, 2, 0, 0});
  CHECK(c.names == std::vector<std::string>{"mean:a", "mean:b", "p95:a", "p95:b", "std:a", "std:b"});
  std::vector<std::vector<double>> ramp;
  for (int i = 1; i <= 100; ++i) ramp.push_back({static_cast<double>(i), 0.0});
  CHECK(aggregate_track(ramp, names).values[2] == doctest::Approx(95.05));
  CHECK(aggregate_track({{3.0, 4.0}}, names).values[4] == 0.0);
  auto shuffled = ramp;
  Rng rng(2);
  rng.shuffle(shuffled.begin(), shuffled.end());
  const auto a = aggregate_track(ramp, names), b = aggregate_track(shuffled, names);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-12));
  CHECK_THROWS_AS(aggregate_track({}, names), Error);
}

TEST_CASE("geometry features over a track: 90") {
  FaceLandmarkTrack track;
  track.trial_id = "f1";
  for (int i = 0; i < 5; ++i) {
    LandmarkFrame f;
    f.t = i * 0.1;
    f.box = {0, 0, 100, 120};
    f.points = placed(f.box);
    f.points[40].y += i;
    track.frames.push_back(f);
  }
  const auto b = geometry_features(track);
  CHECK(b.size() == 90);
  CHECK(b.trial_id == "f1");
  CHECK(b.values[60 + index_of("outer_lip_height")] > 0.0);
  CHECK(b.values[60 + index_of("mouth_width")] == 0.0);
  FaceLandmarkTrack empty;
  CHECK_THROWS_AS(geometry_features(empty), Error);
}

TEST_CASE("face embedding: 12288 aggregate, identical frames have zero std, 30 after PCA") {
  const embedding::StubProvider stub(4);
  const std::vector<RgbImage> same{flat_image(40), flat_image(40), flat_image(40)};
  const auto agg = face_embedding_aggregate(same, stub);
  CHECK(agg.size() == 12288);
  CHECK(agg.tail(4096).isZero());
  CHECK(agg.head(4096).isApprox(agg.segment(4096, 4096), 1e-14));

  const embedding::StubProvider small(4, 16);
  Eigen::MatrixXd E(40, 48);
  for (int i = 0; i < 40; ++i) {
    const std::vector<RgbImage> f{flat_image(static_cast<std::uint8_t>(i * 5)), flat_image(static_cast<std::uint8_t>(i * 3 + 7))};
    E.row(i) = face_embedding_aggregate(f, small).transpose();
  }
  const auto pca = learn::pca_fit(E, 30);
  const std::vector<RgbImage> f{flat_image(10), flat_image(200)};
  const auto b = face_embedding_features(f, small, pca, "t9");
  CHECK(b.size() == 30);
  CHECK(face_embedding_features(f, small, pca, "t9").values == b.values);
  CHECK_THROWS_AS(face_embedding_aggregate(std::vector<RgbImage>{}, small), Error);
  const std::vector<RgbImage> bad{flat_image(1), RgbImage(10, 10)};
  CHECK_THROWS_WITH_AS(face_embedding_aggregate(bad, small, "t9"), doctest::Contains("face frame 1"), Error);
}
