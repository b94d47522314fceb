#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ccsp/csp.hpp"
#include "ccsp/dsp.hpp"
#include "ccsp/model.hpp"
#include "ccsp/ops.hpp"
#include "ccsp/preprocess.hpp"

using namespace ccsp;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Matrix spd(int c, std::uint64_t seed) {
  const auto v = noise(static_cast<std::size_t>(c * 4 * c), seed);
  Eigen::Map<const Matrix> a(v.data(), c, 4 * c);
  return a * a.transpose() / (4.0 * c) + Matrix::Identity(c, c) * 1e-3;
}

void BM_ConvTemporal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t c = 62, t = 250, k = 4, len = 32;
  auto x = ad::Var::parameter(ad::Tensor({n, 1, c, t}, noise(n * c * t, 1)));
  auto w = ad::Var::parameter(ad::Tensor({k, len}, noise(k * len, 2)));
  for (auto _ : state) {
    auto y = ad::conv_temporal(x, w);
    benchmark::DoNotOptimize(y.value().raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ConvTemporal)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CspSolve(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const Matrix a = spd(c, 3), b = spd(c, 4);
  for (auto _ : state) {
    auto s = csp::solve_csp(a, b);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_CspSolve)->Arg(20)->Arg(62)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_FilterTrial(benchmark::State& state) {
  // one raw 62 x 4000 trial at 1 kHz through the full pre-processing chain
  const auto raw = noise(62 * 4000, 5);
  RowMatrix trial = Eigen::Map<const RowMatrix>(raw.data(), 62, 4000);
  for (auto _ : state) {
    auto out = data::preprocess_trial(trial, 1000.0);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_FilterTrial)->Unit(benchmark::kMillisecond);

void BM_Bandpass(benchmark::State& state) {
  const auto cascade = dsp::design_bandpass(8.0, 30.0, static_cast<int>(state.range(0)), 100.0);
  const auto signal = noise(250, 6);
  for (auto _ : state) {
    auto y = dsp::filter_forward(cascade, signal);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Bandpass)->Arg(2)->Arg(4)->Arg(8);

void BM_TrainStep(benchmark::State& state) {
  ModelConfig cfg;
  cfg.n_channels = 20;
  cfg.batch_size = static_cast<int>(state.range(0));
  const auto n = static_cast<std::size_t>(cfg.batch_size);
  const auto x = noise(n * 20 * 250, 7);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 2);
  Model model(cfg);
  for (auto _ : state) {
    auto losses = model.train_step({x, n, y});
    benchmark::DoNotOptimize(losses);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
