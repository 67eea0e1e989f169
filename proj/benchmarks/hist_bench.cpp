#include <benchmark/benchmark.h>

#include <map>

#include "tadk/histogram.hpp"

using namespace tadk::hist;

namespace {

constexpr std::size_t groups = 4096;

const std::vector<std::uint32_t>& workload(Category c) {
  static std::map<Category, std::vector<std::uint32_t>> cache;
  auto& v = cache[c];
  if (v.empty()) v = category_workload(c, groups, 42);
  return v;
}

void BM_Scalar(benchmark::State& state) {
  const auto& v = workload(static_cast<Category>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hist_scalar16(v));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * v.size()));
  state.SetLabel(std::string(category_name(static_cast<Category>(state.range(0)))));
}

void BM_Avc(benchmark::State& state) {
  const auto c = static_cast<Category>(state.range(0));
  const auto b = static_cast<Backend>(state.range(1));
  if (b == Backend::Avx512 && !avx512_available()) {
    state.SkipWithError("no AVX-512 on this CPU");
    return;
  }
  const auto& v = workload(c);
  for (auto _ : state) benchmark::DoNotOptimize(hist_avc(v, 64, b));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * v.size()));
  state.SetLabel(std::string(category_name(c)) + "/" + std::string(backend_name(b)));
}

void categories(benchmark::internal::Benchmark* b) {
  for (int c = 1; c <= 4; ++c) b->Arg(c);
}

void categories_backends(benchmark::internal::Benchmark* b) {
  for (int c = 1; c <= 4; ++c) {
    b->Args({c, static_cast<int>(Backend::Emulated)});
    b->Args({c, static_cast<int>(Backend::Avx512)});
  }
}

}  // namespace

BENCHMARK(BM_Scalar)->Apply(categories);
BENCHMARK(BM_Avc)->Apply(categories_backends);

BENCHMARK_MAIN();
