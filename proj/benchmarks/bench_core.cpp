#include <benchmark/benchmark.h>

#include <vector>

#include "qcap/bounds.hpp"
#include "qcap/haar.hpp"
#include "qcap/moments.hpp"
#include "qcap/montecarlo.hpp"
#include "qcap/random.hpp"
#include "qcap/waveform.hpp"

using namespace qcap;

static void BM_TxMomentsQuadrature(benchmark::State& state) {
  const auto q = QuantizerSpec::uniform_midrise_loaded(static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(tx_moments(q, 1.0));
}
BENCHMARK(BM_TxMomentsQuadrature)->Arg(1)->Arg(4)->Arg(8);

static void BM_ChainMomentsAwgn(benchmark::State& state) {
  const auto q = QuantizerSpec::uniform_midrise_loaded(3, 1.0);
  const auto ch = ChannelSpec::awgn(0.3);
  for (auto _ : state) benchmark::DoNotOptimize(chain_moments(q, ch, q, 1.0));
}
BENCHMARK(BM_ChainMomentsAwgn);

static void BM_HaarSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto rng = make_rng(1, "bench");
  for (auto _ : state) benchmark::DoNotOptimize(HaarUnitary::sample(n, rng));
}
BENCHMARK(BM_HaarSample)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_HaarApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto rng = make_rng(1, "bench");
  const auto v = HaarUnitary::sample(n, rng);
  std::vector<cplx> x(n, cplx{1.0, 0.0});
  for (auto _ : state) {
    v.apply(x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_HaarApply)->Arg(256)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);

static void BM_TxTrial(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.trials = 1;
  cfg.workers = 1;
  cfg.transform = state.range(1) ? TransformKind::fft : TransformKind::haar;
  cfg.plan = SubbandPlan({0.5, 0.5}, {2.0, 0.0});
  cfg.qtx = QuantizerSpec::uniform_midrise(1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(run_tx_trials(cfg));
}
BENCHMARK(BM_TxTrial)->Args({2048, 0})->Args({2048, 1})->Unit(benchmark::kMillisecond);

static void BM_WelchPsd(benchmark::State& state) {
  const WaveformConfig cfg;
  const auto stream = synthesize_baseband(cfg, 10, 1);
  for (auto _ : state) benchmark::DoNotOptimize(welch_psd(stream, cfg.baseband_rate(), cfg.psd));
}
BENCHMARK(BM_WelchPsd)->Unit(benchmark::kMillisecond);

static void BM_RateFunction(benchmark::State& state) {
  const auto cset = constellation_of(QuantizerSpec::uniform_midrise(static_cast<int>(state.range(0)), 1.0));
  const double s = 0.5 * (cset.e_mean() + cset.e_max());
  for (auto _ : state) benchmark::DoNotOptimize(rate_function(cset, s));
}
BENCHMARK(BM_RateFunction)->Arg(2)->Arg(6);

BENCHMARK_MAIN();
