#include <benchmark/benchmark.h>

#include "tadk/classify.hpp"
#include "tadk/synth.hpp"

using namespace tadk;

namespace {

Dataset flows(std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(5);
  spec.flow_count = 500;
  spec.seed = seed;
  const auto t = synth::synth_trace(spec);
  return pipe::extract_dataset(t.packets, {}, t.labels);
}

void BM_Predict(benchmark::State& state) {
  static const auto train = flows(1);
  static const auto test = flows(2);
  rf::TrainParams p;
  p.n_trees = static_cast<std::uint32_t>(state.range(0));
  const auto model = rf::train(train, p);
  for (auto _ : state) {
    for (std::size_t i = 0; i < test.rows(); ++i) benchmark::DoNotOptimize(model.predict(test.row(i)));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * test.rows()));
}

void BM_Train(benchmark::State& state) {
  static const auto train = flows(1);
  rf::TrainParams p;
  p.n_trees = 50;
  p.jobs = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rf::train(train, p));
}

}  // namespace

BENCHMARK(BM_Predict)->Arg(10)->Arg(50)->Arg(100);
BENCHMARK(BM_Train)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
