#include <benchmark/benchmark.h>

#include "tadk/detect.hpp"
#include "tadk/dfa.hpp"

using namespace tadk;

namespace {

const pipe::Corpus& corpus() {
  static const auto c = pipe::read_corpus(std::filesystem::path(TADK_BENCH_DATA_DIR) / "corpus");
  return c;
}

void BM_Tokenize(benchmark::State& state, const char* profile) {
  const auto table = dfa::compile(dfa::parse_profile(dfa::bundled_profile_text(profile)));
  std::vector<std::string> payloads;
  std::size_t bytes = 0;
  for (const auto& p : corpus().payloads) {
    payloads.push_back(dfa::url_decode(p));
    bytes += payloads.back().size();
  }
  for (auto _ : state) {
    for (const auto& p : payloads) benchmark::DoNotOptimize(dfa::tokenize(table, p));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}

void BM_Compile(benchmark::State& state, const char* profile) {
  const auto parsed = dfa::parse_profile(dfa::bundled_profile_text(profile));
  for (auto _ : state) benchmark::DoNotOptimize(dfa::compile(parsed));
}

void BM_LexicalFeatures(benchmark::State& state) {
  const pipe::LexicalFeaturizer lex;
  for (auto _ : state) {
    for (const auto& p : corpus().payloads) benchmark::DoNotOptimize(lex.features(p));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corpus().payloads.size()));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Tokenize, sqli, "sqli");
BENCHMARK_CAPTURE(BM_Tokenize, xss, "xss");
BENCHMARK_CAPTURE(BM_Compile, sqli, "sqli");
BENCHMARK_CAPTURE(BM_Compile, xss, "xss");
BENCHMARK(BM_LexicalFeatures);

BENCHMARK_MAIN();
