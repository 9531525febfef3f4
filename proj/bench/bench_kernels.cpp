// Serial reference vs OpenMP kernels; thread count from OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "affectlab/core/rng.hpp"
#include "affectlab/eeg/features.hpp"
#include "affectlab/eeg/mutual_info.hpp"
#include "affectlab/eeg/topo.hpp"
#include "affectlab/embedding/provider.hpp"

using namespace affectlab;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

TrialRecording trial(const eeg::ScalpLayout& l, double seconds) {
  TrialRecording t;
  t.trial_id = "bench";
  t.modality = Modality::EEG;
  t.fs = 128;
  std::uint64_t s = 1;
  for (const auto& e : l.entries()) {
    t.channels.push_back(e.name);
    t.samples.push_back(noise(static_cast<std::size_t>(128 * seconds), s++));
  }
  return t;
}

void BM_ParzenJoint(benchmark::State& st) {
  const auto x = noise(7680, 1), y = noise(7680, 2);
  const eeg::MutualInfoConfig cfg;
  const auto gx = eeg::detail::make_grid(x, cfg), gy = eeg::detail::make_grid(y, cfg);
  const double h = eeg::detail::silverman_factor(x.size());
  for (auto _ : st) benchmark::DoNotOptimize(eeg::detail::parzen_joint(x, y, gx, gy, h, cfg.cutoff, exec_of(st)));
}

void BM_PairwiseEntropy(benchmark::State& st) {
  const auto t = trial(eeg::ScalpLayout::builtin("emotiv14"), 12);
  for (auto _ : st) benchmark::DoNotOptimize(eeg::pairwise_entropy_features(t, {}, exec_of(st)));
}

void BM_TopoRender(benchmark::State& st) {
  const auto l = eeg::ScalpLayout::builtin("deap32");
  std::vector<std::string> names;
  for (const auto& e : l.entries()) names.push_back(e.name);
  const auto v = noise(names.size(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(eeg::render_topo_band(v, names, l, 224, exec_of(st)));
}

void BM_StubProjection(benchmark::State& st) {
  const embedding::StubProvider stub(1, embedding::kDefaultDim, exec_of(st));
  RgbImage img(224, 224);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<std::uint8_t>(i % 251);
  benchmark::DoNotOptimize(stub.embed(img, embedding::ImageProfile::generic));  // projection setup
  for (auto _ : st) benchmark::DoNotOptimize(stub.embed(img, embedding::ImageProfile::generic));
}

void BM_BandPowers(benchmark::State& st) {
  const auto t = trial(eeg::ScalpLayout::builtin("deap32"), 60);
  for (auto _ : st) benchmark::DoNotOptimize(eeg::band_powers(t, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_ParzenJoint)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseEntropy)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK(BM_TopoRender)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StubProjection)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BandPowers)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
