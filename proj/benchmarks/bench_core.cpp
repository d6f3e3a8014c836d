#include <benchmark/benchmark.h>

#include <memory>

#include "odesys/alloc.hpp"
#include "odesys/imap.hpp"
#include "odesys/oracle.hpp"
#include "odesys/pfm.hpp"
#include "odesys/random.hpp"
#include "odesys/windfarm.hpp"

using namespace odesys;

namespace {

void BM_CurveEvaluate(benchmark::State& state) {
  std::vector<Breakpoint> bps;
  const auto n = std::size_t(state.range(0));
  for (std::size_t i = 0; i < n; ++i) bps.push_back({double(i), 100.0 * double(i) / double(n - 1)});
  const PreferenceCurve curve(bps, CurveDirection::ascending);
  Rng rng(1);
  double acc = 0.0;
  for (auto _ : state) acc += curve(rng.uniform(0.0, double(n)));
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_CurveEvaluate)->Arg(2)->Arg(8)->Arg(64);

void BM_ZNormalizeAggregate(benchmark::State& state) {
  const auto rows = std::size_t(state.range(0));
  std::vector<ScoreKey> keys;
  WeightMatrix w;
  for (std::size_t c = 0; c < 8; ++c) {
    keys.push_back({c / 4, c % 4});
    w.set(keys.back(), 0.125);
  }
  ScoreTable table(keys);
  Rng rng(2);
  std::vector<double> row(keys.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& v : row) v = rng.uniform(0.0, 100.0);
    table.add_row(row);
  }
  for (auto _ : state) benchmark::DoNotOptimize(afine_aggregate(z_normalize(table), w));
  state.SetItemsProcessed(state.iterations() * std::int64_t(rows));
}
BENCHMARK(BM_ZNormalizeAggregate)->Arg(100)->Arg(10000);

void BM_AllocDecode(benchmark::State& state) {
  auto inst = std::make_shared<const alloc::AllocInstance>(
      alloc::stress_instance(std::size_t(state.range(0)), std::size_t(state.range(1)), 3));
  alloc::AllocDecoder decoder(inst);
  Rng rng(3);
  std::vector<double> keys(decoder.key_count());
  for (auto _ : state) {
    for (auto& k : keys) k = rng.uniform();
    benchmark::DoNotOptimize(decoder.decode(keys));
  }
}
BENCHMARK(BM_AllocDecode)->Args({2, 3})->Args({6, 14})->Args({12, 40});

ProblemDefinition windfarm_problem() {
  auto m = std::make_shared<windfarm::WindfarmModel>(windfarm::fixture_params(), 0.1);
  return windfarm::make_problem(m, windfarm::performance_extrema(windfarm::fixture_params(), 0.1));
}

void BM_WindfarmSolve(benchmark::State& state) {
  const auto p = windfarm_problem();
  GaConfig config;
  for (auto _ : state) {
    config.rng_seed += 1;
    benchmark::DoNotOptimize(solve(p, config));
  }
}
BENCHMARK(BM_WindfarmSolve)->Unit(benchmark::kMillisecond);

void BM_WindfarmOracle(benchmark::State& state) {
  const auto p = windfarm_problem();
  for (auto _ : state) benchmark::DoNotOptimize(oracle::enumerate_windfarm(p, 0.1));
}
BENCHMARK(BM_WindfarmOracle)->Unit(benchmark::kMillisecond);

void BM_AllocStressSolve(benchmark::State& state) {
  auto inst = std::make_shared<const alloc::AllocInstance>(
      alloc::stress_instance(std::size_t(state.range(0)), std::size_t(state.range(1)), 5));
  auto model = std::make_shared<alloc::AllocModel>(inst);
  const auto anchors = alloc::preference_anchors(*inst, 500).ranges;
  const auto p = alloc::make_problem(model, anchors);
  GaConfig config;
  config.population_size = std::size_t(state.range(2));
  config.threads = std::size_t(state.range(3));
  for (auto _ : state) {
    config.rng_seed += 1;
    benchmark::DoNotOptimize(solve(p, config));
  }
}
BENCHMARK(BM_AllocStressSolve)->Args({6, 14, 100, 1})->Args({6, 14, 100, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
