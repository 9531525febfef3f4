#include <doctest.h>

#include <set>

#include "affectlab/core/error.hpp"
#include "affectlab/dsp/spectral.hpp"
#include "affectlab/eeg/features.hpp"
#include "support.hpp"

using namespace affectlab;
using namespace affectlab::eeg;

namespace {

std::vector<std::string> names_of(const ScalpLayout& l) {
  std::vector<std::string> n;
  for (const auto& e : l.entries()) n.push_back(e.name);
  return n;
}

}  // namespace

TEST_CASE("band psd: cardinality and naming") {
  for (const auto& [layout, want] : {std::pair<std::string, std::size_t>{"deap32", 96}, {"emotiv14", 42}}) {
    const auto l = ScalpLayout::builtin(layout);
    const auto t = testing::noise_trial(names_of(l), 128, 4, 1);
    const auto b = band_psd_features(t, l);
    CHECK(b.size() == want);
    CHECK(b.names.size() == want);
    CHECK(b.names.front() == "theta:" + t.channels.front());
    CHECK(b.names[t.channels.size()] == "alpha:" + t.channels.front());
    CHECK(b.names.back() == "beta:" + t.channels.back());
    CHECK(std::set<std::string>(b.names.begin(), b.names.end()).size() == want);
    for (double v : b.values) CHECK(v > 0.0);
    CHECK(band_psd_features(t, l, Exec::serial).values == b.values);
  }
}

TEST_CASE("band psd: a 10 Hz channel is dominated by alpha") {
  const auto l = ScalpLayout::builtin("emotiv14");
  auto t = testing::noise_trial(names_of(l), 128, 8, 2);
  t.samples[3] = testing::sine(10.0, 1.0, 128, 8);
  const auto b = band_psd_features(t, l);
  const std::size_t c = t.channels.size();
  const double theta = b.values[3], alpha = b.values[c + 3], beta = b.values[2 * c + 3];
  CHECK(alpha >= 50.0 * theta);
  CHECK(alpha >= 50.0 * beta);
}

TEST_CASE("band psd: errors") {
  const auto l = ScalpLayout::builtin("emotiv14");
  auto t = testing::noise_trial(names_of(l), 128, 4, 3);
  t.channels[0] = "Xx9";
  CHECK_THROWS_WITH_AS(band_psd_features(t, l), doctest::Contains("unknown channel"), Error);
  auto g = testing::noise_trial({"a"}, 128, 4, 3, Modality::GSR);
  CHECK_THROWS_AS(band_powers(g), Error);
  auto shortt = testing::noise_trial(names_of(l), 128, 0.5, 3);
  CHECK_THROWS_AS(band_powers(shortt), Error);
}

TEST_CASE("entropy features: cardinality, order, duplicate channel") {
  const auto l14 = ScalpLayout::builtin("emotiv14");
  auto t = testing::noise_trial(names_of(l14), 128, 8, 4);
  t.samples[5] = t.samples[2];
  const auto b = pairwise_entropy_features(t);
  CHECK(b.size() == 91);
  CHECK(b.names[0] == "H(" + t.channels[1] + "|" + t.channels[0] + ")");
  CHECK(b.names[1] == "H(" + t.channels[2] + "|" + t.channels[0] + ")");
  // pair (2, 5): index = sum of (13 - i) for i < 2, plus 5 - 2 - 1
  const std::size_t dup = 13 + 12 + 2;
  CHECK(b.names[dup] == "H(" + t.channels[5] + "|" + t.channels[2] + ")");
  CHECK(b.values[dup] <= 0.05);
  for (std::size_t k = 0; k < b.size(); ++k)
    if (k != dup) CHECK(b.values[k] > 1.0);

  const auto l32 = ScalpLayout::builtin("deap32");
  const auto t32 = testing::noise_trial(names_of(l32), 64, 2, 5);
  CHECK(pairwise_entropy_features(t32).size() == 496);
}

TEST_CASE("entropy features: serial equals parallel; direction option") {
  const auto t = testing::noise_trial({"a", "b", "c", "d"}, 128, 4, 6);
  auto x = t;
  // make c partly predictable from a so the two directions differ
  for (std::size_t n = 0; n < x.n_samples(); ++n) x.samples[2][n] = 0.8 * x.samples[0][n] + 0.2 * x.samples[2][n];
  const auto p = pairwise_entropy_features(x);
  CHECK(pairwise_entropy_features(x, {}, Exec::serial).values == p.values);
  EntropyFeatureConfig rev;
  rev.direction = PairDirection::i_given_j;
  const auto r = pairwise_entropy_features(x, rev);
  CHECK(r.names[1] == "H(a|c)");
  CHECK(p.names[1] == "H(c|a)");
  CHECK(r.values[1] != p.values[1]);
  CHECK(p.values[1] < p.values[2] - 0.5);  // H(c|a) well below H(d|a)
}

TEST_CASE("entropy features: a constant channel fails the feature set") {
  auto t = testing::noise_trial({"a", "b", "c"}, 128, 4, 7);
  t.samples[1].assign(t.n_samples(), 3.0);
  CHECK_THROWS_WITH_AS(pairwise_entropy_features(t), doctest::Contains("constant signal"), Error);
  CHECK_THROWS_WITH_AS(pairwise_entropy_features(t), doctest::Contains("entropy feature set"), Error);
  const auto one = testing::noise_trial({"a"}, 128, 4, 7);
  CHECK_THROWS_AS(pairwise_entropy_features(one), Error);
}

TEST_CASE("topo rgb: theta only is red; per-trial image") {
  const auto l = ScalpLayout::builtin("emotiv14");
  const auto names = names_of(l);
  std::array<std::vector<double>, 3> p;
  p[0] = testing::noise(14, 3);
  for (auto& v : p[0]) v = std::abs(v) + 0.1;
  p[1].assign(14, 0.0);
  p[2].assign(14, 0.0);
  const auto img = topo_rgb(p, names, l);
  CHECK(img.width == kTopoGrid);
  int red = 0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      CHECK(img.at(x, y)[1] == 0);
      CHECK(img.at(x, y)[2] == 0);
      red += img.at(x, y)[0] > 0;
    }
  CHECK(red > 1000);
  const auto t = testing::noise_trial(names, 128, 4, 8);
  CHECK(trial_topo_image(t, l) == trial_topo_image(t, l));
}

TEST_CASE("deep features: 30 after PCA on 100 embeddings, deterministic") {
  const auto l = ScalpLayout::builtin("emotiv14");
  const embedding::StubProvider stub(42);
  Eigen::MatrixXd E(100, 4096);
  std::vector<TrialRecording> trials;
  for (int i = 0; i < 100; ++i) {
    trials.push_back(testing::noise_trial(names_of(l), 64, 2, 100 + i));
    E.row(i) = eeg_topo_embedding(trials.back(), l, stub).transpose();
  }
  const auto pca = learn::pca_fit(E, 30);
  const auto a = eeg_deep_features(trials[0], l, stub, pca);
  CHECK(a.size() == 30);
  CHECK(a.names[0] == "topo:pc1");
  CHECK(a.values == eeg_deep_features(trials[0], l, stub, pca).values);
  const embedding::StubProvider stub2(42);
  CHECK(a.values == eeg_deep_features(trials[0], l, stub2, pca).values);
  auto copy = trials[0];
  copy.trial_id = "other";
  CHECK(eeg_deep_features(copy, l, stub, pca).values == a.values);

  const auto wide = learn::pca_fit(E, 31);
  CHECK_THROWS_AS(eeg_deep_features(trials[0], l, stub, wide), Error);
  const embedding::StubProvider small(1, 64);
  CHECK_THROWS_AS(eeg_deep_features(trials[0], l, small, pca), Error);
}

TEST_CASE("deep features: provider errors carry the trial id") {
  struct Broken final : embedding::EmbeddingProvider {
    std::size_t dim() const override { return 4096; }
    std::string id() const override { return "broken"; }
    std::vector<Eigen::VectorXd> embed_batch(std::span<const RgbImage>, embedding::ImageProfile) const override {
      throw Error("boom");
    }
  };
  const auto l = ScalpLayout::builtin("emotiv14");
  const auto t = testing::noise_trial(names_of(l), 64, 2, 9);
  CHECK_THROWS_WITH_AS(eeg_topo_embedding(t, l, Broken{}), doctest::Contains(t.trial_id.c_str()), Error);
}

TEST_CASE("per-second images: counts and floor rule") {
  const auto l = ScalpLayout::builtin("emotiv14");
  const auto names = names_of(l);
  CHECK(per_second_eeg_images(testing::noise_trial(names, 128, 60, 10), l).size() == 60);
  CHECK(per_second_eeg_images(testing::noise_trial(names, 128, 1.5, 10), l).size() == 1);
  CHECK(per_second_eeg_images(testing::noise_trial(names, 128, 1.0, 10), l).size() == 1);
  CHECK_THROWS_AS(per_second_eeg_images(testing::noise_trial(names, 128, 0.9, 10), l), Error);
}

TEST_CASE("per-second images: a stationary signal gives the same image every second") {
  const auto l = ScalpLayout::builtin("emotiv14");
  TrialRecording t;
  t.trial_id = "stat";
  t.modality = Modality::EEG;
  t.fs = 128;
  t.channels = names_of(l);
  for (std::size_t c = 0; c < t.channels.size(); ++c) {
    const auto th = testing::sine(5.0, 1.0 + 0.1 * c, 128, 10);
    const auto al = testing::sine(10.0, 2.0 - 0.05 * c, 128, 10, 0.3 * c);
    const auto be = testing::sine(20.0, 0.5 + 0.02 * c * c, 128, 10, 0.1);
    std::vector<double> x(th.size());
    for (std::size_t n = 0; n < x.size(); ++n) x[n] = th[n] + al[n] + be[n];
    t.samples.push_back(x);
  }
  const auto imgs = per_second_eeg_images(t, l);
  REQUIRE(imgs.size() == 10);
  for (const auto& im : imgs)
    for (std::size_t i = 0; i < im.data.size(); ++i) CHECK(std::abs(im.data[i] - imgs[0].data[i]) <= 1);
}

TEST_CASE("raw preprocessing removes out-of-band content") {
  TrialRecording t;
  t.trial_id = "raw";
  t.fs = 128;
  t.channels = {"Fz", "Cz"};
  const auto slow = testing::sine(1.0, 5.0, 128, 20), mid = testing::sine(10.0, 1.0, 128, 20);
  std::vector<double> x(slow.size());
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = slow[n] + mid[n];
  t.samples = {x, mid};
  const auto y = preprocess_raw_eeg(t);
  const dsp::BandDefinition low{"low", 0.5, 2.0};
  CHECK(dsp::welch_band_power(y.samples[0], 128, low) < 1e-2 * dsp::welch_band_power(x, 128, low));
  const auto a = dsp::welch_band_power(y.samples[1], 128, dsp::eeg_bands()[1]);
  CHECK(a == doctest::Approx(dsp::welch_band_power(mid, 128, dsp::eeg_bands()[1])).epsilon(0.05));
}
