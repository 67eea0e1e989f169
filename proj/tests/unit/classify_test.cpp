#include <gtest/gtest.h>

#include <map>
#include <set>

#include "tadk/classify.hpp"
#include "tadk/error.hpp"
#include "tadk/features.hpp"
#include "tadk/synth.hpp"

using namespace tadk;

namespace {

synth::SynthTrace trace(int apps, std::uint32_t flows, std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(apps);
  spec.flow_count = flows;
  spec.seed = seed;
  return synth::synth_trace(spec);
}

rf::Model flow_model(const synth::SynthTrace& tr, const pipe::StreamConfig& cfg) {
  rf::TrainParams p;
  p.n_trees = 30;
  return rf::train(pipe::extract_dataset(tr.packets, cfg, tr.labels), p);
}

}  // namespace

TEST(Stream, EachFlowFiresOnceAtTrigger) {
  const auto tr = trace(5, 200, 3);
  for (std::uint32_t min_pkts : {0u, 1u, 8u, 1000u}) {
    pipe::StreamConfig cfg;
    cfg.min_pkts = min_pkts;
    std::set<std::string> seen;
    std::size_t calls = 0;
    const auto stats = pipe::for_each_flow(tr.packets, cfg, [&](const flow::Flow& f) {
      ++calls;
      seen.insert(f.key.to_string());
      if (min_pkts > 0) EXPECT_LE(f.packets.size(), min_pkts);
      if (min_pkts > 0 && f.state == flow::FlowState::Active) EXPECT_EQ(f.packets.size(), min_pkts);
    });
    EXPECT_EQ(calls, 200u) << min_pkts;
    EXPECT_EQ(seen.size(), 200u);
    EXPECT_EQ(stats.flows_created, 200u);
    EXPECT_EQ(stats.packets_in, tr.packets.size());
  }
}

TEST(Stream, DatasetRowsMatchFeaturesAtTrigger) {
  const auto tr = trace(2, 60, 4);
  pipe::StreamConfig cfg;
  std::map<std::string, std::vector<double>> want;
  pipe::for_each_flow(tr.packets, cfg,
                      [&](const flow::Flow& f) { want[f.key.to_string()] = fx::extract(f).values; });
  const auto ds = pipe::extract_dataset(tr.packets, cfg, tr.labels);
  ASSERT_EQ(ds.rows(), 60u);
  EXPECT_EQ(ds.schema_version, fx::flow_schema().version);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    const auto row = ds.row(i);
    EXPECT_EQ(std::vector<double>(row.begin(), row.end()), want.at(ds.keys[i]));
    EXPECT_FALSE(ds.labels[i].empty());
  }
  const auto unlabeled = pipe::extract_dataset(tr.packets, cfg, {}, "x");
  for (const auto& l : unlabeled.labels) EXPECT_EQ(l, "x");
}

TEST(Classify, SyntheticAccuracyAndOrdering) {
  pipe::StreamConfig cfg;
  const auto model = flow_model(trace(2, 300, 1), cfg);
  const auto test = trace(2, 200, 2);
  const auto out = pipe::classify_packets(test.packets, model, cfg);
  ASSERT_EQ(out.results.size(), 200u);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    const auto& r = out.results[i];
    EXPECT_TRUE(r.error.empty());
    EXPECT_GE(r.confidence, 0.5);
    EXPECT_GT(r.packets, 0u);
    ok += test.labels.at(r.initiator) == r.label;
    if (i > 0) EXPECT_LE(out.results[i - 1].trigger_ts_us, r.trigger_ts_us);
  }
  EXPECT_GE(static_cast<double>(ok) / 200.0, 0.95);
  EXPECT_EQ(out.stats.packets_in, test.packets.size());
}

TEST(Classify, ShardingKeepsEveryFlow) {
  pipe::StreamConfig cfg;
  const auto model = flow_model(trace(5, 300, 5), cfg);
  const auto test = trace(5, 150, 6);
  const auto one = pipe::classify_packets(test.packets, model, cfg, 1);
  const auto four = pipe::classify_packets(test.packets, model, cfg, 4);
  ASSERT_EQ(one.results.size(), four.results.size());
  std::map<std::string, std::string> a, b;
  for (const auto& r : one.results) a[r.key] = r.label;
  for (const auto& r : four.results) b[r.key] = r.label;
  EXPECT_EQ(a, b);  // default idle timeout exceeds every gap in the trace
  EXPECT_EQ(four.stats.packets_in, test.packets.size());
  EXPECT_EQ(four.stats.flows_created, 150u);
}

TEST(Classify, RejectsWrongSchemaWidth) {
  rf::Model m;
  m.n_features = 3;
  m.classes = {"a", "b"};
  const auto tr = trace(2, 5, 7);
  EXPECT_THROW(pipe::classify_packets(tr.packets, m, {}), Error);
}

TEST(Classify, RowFormat) {
  pipe::ClassifyResult r;
  r.key = "1.1.1.1:1-2.2.2.2:2/6";
  r.label = "web";
  r.confidence = 0.75;
  r.latency_us = 3.25;
  EXPECT_EQ(pipe::format_classify_row(r), "1.1.1.1:1-2.2.2.2:2/6,web,0.750000,3.250");
  r.error = "boom";
  EXPECT_EQ(pipe::format_classify_row(r), "1.1.1.1:1-2.2.2.2:2/6,error,0.750000,3.250");
}
