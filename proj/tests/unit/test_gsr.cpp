#include <doctest.h>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/moments.hpp"
#include "affectlab/gsr/features.hpp"
#include "support.hpp"

using namespace affectlab;
using namespace affectlab::gsr;

namespace {

TrialRecording gsr_trial(std::vector<double> x, double fs = 32) {
  TrialRecording t;
  t.trial_id = "g1";
  t.modality = Modality::GSR;
  t.fs = fs;
  t.channels = {"gsr"};
  t.samples = {std::move(x)};
  return t;
}

// Slow Gaussian bumps of the given heights at the given times.
std::vector<double> bumps(const std::vector<std::pair<double, double>>& at_height, double fs, double seconds) {
  std::vector<double> x(static_cast<std::size_t>(fs * seconds), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (const auto& [t0, h] : at_height) {
      const double d = (static_cast<double>(i) / fs - t0) / 1.0;
      x[i] += h * std::exp(-0.5 * d * d);
    }
  return x;
}

}  // namespace

TEST_CASE("gsr stats: constant signal") {
  const auto b = gsr_stat_features(gsr_trial(std::vector<double>(320, 2.5)));
  REQUIRE(b.size() == 8);
  CHECK(b.values[0] == 0.0);
  CHECK(b.values[1] == 0.0);
  CHECK(b.values[2] == doctest::Approx(2.5));
  for (int i = 3; i < 8; ++i) CHECK(b.values[i] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gsr stats: two bumps of 0.3 and 0.5") {
  const auto b = gsr_stat_features(gsr_trial(bumps({{10, 0.3}, {25, 0.5}}, 32, 40)));
  CHECK(b.values[0] == 2.0);
  CHECK(b.values[1] == doctest::Approx(0.4).epsilon(0.01));
  CHECK(b.names[0] == "peak_count");
  CHECK(b.names[1] == "mean_peak_height");
}

TEST_CASE("gsr stats: offset and affine invariance") {
  auto x = bumps({{8, 0.2}, {20, 0.6}, {31, 0.4}}, 32, 40);
  const auto n = testing::noise(x.size(), 4, 0.01);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += n[i];
  const auto a = gsr_stat_features(gsr_trial(x));
  auto shifted = x;
  for (auto& v : shifted) v += 7.0;
  const auto b = gsr_stat_features(gsr_trial(shifted));
  CHECK(b.values[0] == a.values[0]);
  CHECK(b.values[1] == doctest::Approx(a.values[1]).epsilon(1e-9));
  auto affine = x;
  for (auto& v : affine) v = 3.0 * v + 1.0;
  const auto c = gsr_stat_features(gsr_trial(affine));
  CHECK(c.values[5] == doctest::Approx(a.values[5]).epsilon(1e-9));
  CHECK(c.values[7] == doctest::Approx(a.values[7]).epsilon(1e-9));
}

TEST_CASE("gsr stats: preconditions") {
  CHECK_THROWS_AS(gsr_stat_features(gsr_trial(std::vector<double>(64, 1.0))), Error);
  auto two = gsr_trial(std::vector<double>(320, 1.0));
  two.channels.push_back("b");
  two.samples.push_back(two.samples[0]);
  CHECK_THROWS_AS(gsr_stat_features(two), Error);
  auto eeg = gsr_trial(std::vector<double>(320, 1.0));
  eeg.modality = Modality::EEG;
  CHECK_THROWS_AS(gsr_stat_features(eeg), Error);
}

TEST_CASE("gsr spectrogram: 0.5 Hz modulation peaks at its row") {
  const auto x = testing::sine(0.5, 1.0, 32, 60);
  const auto img = gsr_spectrogram_image(gsr_trial(x));
  CHECK(img.width == 224);
  // 17 bins (0..2 Hz step 0.125), 2 Hz on top: 0.5 Hz is bin 4, row 12 of 17
  const double want = (12.0 + 0.5) * 224.0 / 17.0 - 0.5;
  for (int col : {5, 112, 220}) {
    int best = 0, row = 0;
    for (int y = 0; y < 224; ++y) {
      const auto* p = img.at(col, y);
      if (p[0] + p[1] > best) best = p[0] + p[1], row = y;
    }
    CHECK(std::abs(row - want) <= 224.0 / 17.0);
  }
  CHECK_THROWS_AS(gsr_spectrogram_image(gsr_trial(std::vector<double>(32 * 6, 1.0))), Error);
}

TEST_CASE("gsr features: 38 in total, deterministic") {
  const embedding::StubProvider stub(3, 64);
  Eigen::MatrixXd E(40, 64);
  for (int i = 0; i < 40; ++i) E.row(i) = gsr_spectrogram_embedding(gsr_trial(testing::noise(32 * 20, i)), stub).transpose();
  const auto pca = learn::pca_fit(E, 30);
  const auto t = gsr_trial(bumps({{5, 0.3}, {12, 0.5}}, 32, 20));
  const auto b = gsr_features(t, stub, pca);
  CHECK(b.size() == 38);
  CHECK(gsr_features(t, stub, pca).values == b.values);
  CHECK(b.names[8] == "gsr_spec:pc1");
}
