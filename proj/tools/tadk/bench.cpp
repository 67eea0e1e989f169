#include <chrono>
#include <cstdio>
#include <iostream>

#include "commands.hpp"
#include "tadk/classify.hpp"
#include "tadk/detect.hpp"
#include "tadk/error.hpp"
#include "tadk/features.hpp"
#include "tadk/histogram.hpp"
#include "tadk/synth.hpp"

namespace tadk::cli {
namespace {

using Clock = std::chrono::steady_clock;

double micros(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

void print_latency(const Globals& g, const std::string& name, const std::vector<double>& us) {
  const double p50 = percentile(us, 50);
  const double p90 = percentile(us, 90);
  const double p99 = percentile(us, 99);
  char buf[160];
  if (g.rows()) {
    std::snprintf(buf, sizeof buf, "latency,%s,%.3f,%.3f,%.3f,%zu", name.c_str(), p50, p90, p99, us.size());
  } else {
    std::snprintf(buf, sizeof buf, "%-16s p50 %8.2f us  p90 %8.2f us  p99 %8.2f us  (n=%zu)", name.c_str(), p50,
                  p90, p99, us.size());
  }
  std::cout << buf << '\n';
}

synth::SynthTrace bench_trace(const Globals& g, std::uint32_t flows, std::uint64_t salt) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(5);
  spec.flow_count = flows;
  spec.seed = g.seed + salt;
  return synth::synth_trace(spec);
}

rf::Model flow_model(const Globals& g, const synth::SynthTrace& trace, const pipe::StreamConfig& cfg) {
  rf::TrainParams p;
  p.seed = g.seed;
  p.jobs = g.jobs;
  return rf::train(pipe::extract_dataset(trace.packets, cfg, trace.labels), p);
}

pipe::Detector corpus_detector(const Globals& g, const pipe::Corpus& corpus) {
  pipe::LexicalFeaturizer lex;
  rf::TrainParams p;
  p.seed = g.seed;
  p.jobs = g.jobs;
  auto model = rf::train(pipe::lexical_dataset(lex, corpus), p);
  return pipe::Detector(std::move(model), g.threshold, std::move(lex));
}

void bench_hist(const Globals& g, const BenchOpts& o) {
  if (!g.rows()) {
    std::printf("%-8s %-9s %12s %9s\n", "category", "backend", "ns/value", "speedup");
  }
  for (auto cat : {hist::Category::AllDistinctBins, hist::Category::Random, hist::Category::AllOneBin,
                   hist::Category::AllOverflow}) {
    for (const auto& row : hist::bench_hist(cat, o.iters, 4096, g.seed)) {
      if (g.rows()) {
        std::cout << "hist," << hist::format_bench_row(row) << '\n';
      } else {
        std::printf("%-8s %-9s %12.3f %8.2fx\n", std::string(hist::category_name(row.category)).c_str(),
                    row.scalar ? "scalar" : std::string(hist::backend_name(row.backend)).c_str(), row.ns_per_lane,
                    row.speedup);
      }
    }
  }
}

void bench_tokenize(const Globals& g, const BenchOpts& o, const pipe::Corpus& corpus) {
  for (const char* name : {"sqli", "xss"}) {
    const auto table = dfa::compile(dfa::parse_profile(dfa::bundled_profile_text(name)));
    std::size_t bytes = 0;
    std::size_t lookups = 0;
    double best = 1e300;
    for (std::uint32_t it = 0; it < o.iters; ++it) {
      bytes = 0;
      lookups = 0;
      const auto t0 = Clock::now();
      for (const auto& p : corpus.payloads) {
        const auto s = dfa::tokenize(table, p);
        bytes += p.size();
        lookups += s.stats.lookups;
      }
      best = std::min(best, micros(t0, Clock::now()));
    }
    const double ns_per_byte = best * 1e3 / static_cast<double>(bytes);
    const double per_byte = static_cast<double>(lookups) / static_cast<double>(bytes);
    if (g.rows()) {
      std::printf("tokenize,%s,%.4f,%.4f,%zu\n", name, ns_per_byte, per_byte, bytes);
    } else {
      std::printf("%-5s %8.3f ns/byte  %5.3f lookups/byte  %.1f MB/s  (%zu bytes)\n", name, ns_per_byte, per_byte,
                  1e3 / ns_per_byte, bytes);
    }
  }
}

std::vector<flow::Flow> bench_flows(const synth::SynthTrace& trace, const pipe::StreamConfig& cfg) {
  std::vector<flow::Flow> flows;
  pipe::for_each_flow(trace.packets, cfg, [&](const flow::Flow& f) { flows.push_back(f); });
  return flows;
}

}  // namespace

int cmd_bench(const Globals& g, const BenchOpts& o) {
  if (o.iters == 0) throw Error(Errc::InvalidArgs, "--iters must be positive");
  pipe::StreamConfig cfg;
  cfg.min_pkts = g.min_pkts;
  cfg.flow.idle_timeout_us = static_cast<std::uint64_t>(g.idle_timeout_s * 1e6);
  const auto corpus_dir = o.corpus.empty() ? default_data_dir() / "corpus" : std::filesystem::path(o.corpus);

  if (o.kind == "hist") {
    bench_hist(g, o);
  } else if (o.kind == "tokenize") {
    bench_tokenize(g, o, pipe::read_corpus(corpus_dir));
  } else if (o.kind == "extract") {
    const auto flows = bench_flows(bench_trace(g, o.flows, 0), cfg);
    std::vector<double> us;
    for (std::uint32_t it = 0; it < o.iters; ++it) {
      for (const auto& f : flows) {
        const auto t0 = Clock::now();
        const auto fv = fx::extract(f);
        us.push_back(micros(t0, Clock::now()));
        if (fv.values.empty()) std::abort();
      }
    }
    print_latency(g, "extract", us);
  } else if (o.kind == "predict") {
    const auto train = bench_trace(g, o.flows, 0);
    const auto model = flow_model(g, train, cfg);
    const auto ds = pipe::extract_dataset(bench_trace(g, o.flows, 1).packets, cfg);
    std::vector<double> us;
    for (std::uint32_t it = 0; it < o.iters; ++it) {
      for (std::size_t i = 0; i < ds.rows(); ++i) {
        const auto t0 = Clock::now();
        const auto p = model.predict(ds.row(i));
        us.push_back(micros(t0, Clock::now()));
        if (p.probs.empty()) std::abort();
      }
    }
    print_latency(g, "predict", us);
  } else if (o.kind == "e2e") {
    const auto model = flow_model(g, bench_trace(g, o.flows, 0), cfg);
    const auto test = bench_trace(g, o.flows, 1);
    const auto corpus = pipe::read_corpus(corpus_dir);
    const auto det = corpus_detector(g, corpus);
    std::vector<double> classify_us;
    std::vector<double> detect_us;
    for (std::uint32_t it = 0; it < o.iters; ++it) {
      for (const auto& r : pipe::classify_packets(test.packets, model, cfg).results) {
        classify_us.push_back(r.latency_us);
      }
      for (const auto& p : corpus.payloads) detect_us.push_back(det.detect(dfa::url_decode(p)).latency_us);
    }
    print_latency(g, "classify_flow", classify_us);
    print_latency(g, "detect_request", detect_us);
  } else {
    throw Error(Errc::InvalidArgs, "unknown bench kind '" + o.kind + "' (hist, tokenize, extract, predict, e2e)");
  }
  return 0;
}

}  // namespace tadk::cli
