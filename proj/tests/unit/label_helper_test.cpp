#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "tadk/error.hpp"
#include "tadk/features.hpp"
#include "tadk/label_helper.hpp"
#include "tadk/synth.hpp"

using namespace tadk;

namespace {

synth::SynthTrace trace(std::uint32_t flows, std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(2);
  spec.flow_count = flows;
  spec.seed = seed;
  return synth::synth_trace(spec);
}

// Mean silhouette over z-scored stat features, written from the definition.
double silhouette_of(const pipe::ClusterReport& r) {
  const std::size_t n = r.flows.size();
  const std::size_t d = fx::stat_features;
  std::vector<std::vector<double>> x(n, std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0;
    for (const auto& f : r.flows) mean += f.features[j];
    mean /= static_cast<double>(n);
    double var = 0;
    for (const auto& f : r.flows) var += (f.features[j] - mean) * (f.features[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i][j] = sd > 0 ? (r.flows[i].features[j] - mean) / sd : 0.0;
  }
  std::vector<std::uint32_t> label(n);
  for (const auto& c : r.clusters) {
    for (auto i : c.members) label[i] = c.id;
  }
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(r.k, 0.0);
    std::vector<std::size_t> cnt(r.k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0;
      for (std::size_t t = 0; t < d; ++t) s += (x[i][t] - x[j][t]) * (x[i][t] - x[j][t]);
      sum[label[j]] += std::sqrt(s);
      ++cnt[label[j]];
    }
    if (cnt[label[i]] == 0) continue;  // singleton scores 0
    const double a = sum[label[i]] / static_cast<double>(cnt[label[i]]);
    double b = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < r.k; ++c) {
      if (c != label[i] && cnt[c] > 0) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

double purity(const pipe::ClusterReport& r, const std::map<std::string, std::string>& truth) {
  std::size_t pure = 0;
  for (const auto& c : r.clusters) {
    std::map<std::string, std::size_t> cnt;
    for (auto i : c.members) ++cnt[truth.at(r.flows[i].initiator)];
    std::size_t best = 0;
    for (const auto& [k, v] : cnt) best = std::max(best, v);
    pure += best;
  }
  return static_cast<double>(pure) / static_cast<double>(r.flows.size());
}

}  // namespace

TEST(LabelHelper, TwoSignaturesGiveTwoPureClusters) {
  const auto tr = trace(200, 3);
  pipe::LabelParams p;
  p.k_max = 6;
  const auto r = pipe::label_helper(pipe::collect_flows(tr.packets), p);
  EXPECT_EQ(r.k, 2u);
  EXPECT_GE(purity(r, tr.labels), 0.95);
  ASSERT_EQ(r.scores.size(), 5u);
  for (const auto& [k, s] : r.scores) EXPECT_LE(s, r.silhouette + 1e-12) << k;
  EXPECT_NEAR(r.silhouette, silhouette_of(r), 1e-9);
  std::size_t members = 0;
  for (const auto& c : r.clusters) {
    members += c.members.size();
    EXPECT_EQ(c.tip.size, c.members.size());
    EXPECT_GT(c.tip.proto_share, 0.5);
  }
  EXPECT_EQ(members, r.flows.size());
}

TEST(LabelHelper, Deterministic) {
  const auto flows = pipe::collect_flows(trace(120, 4).packets);
  pipe::LabelParams p;
  p.k_max = 4;
  const auto a = pipe::label_helper(flows, p);
  const auto b = pipe::label_helper(flows, p);
  std::ostringstream sa, sb;
  pipe::write_report(sa, a);
  pipe::write_report(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(LabelHelper, Errors) {
  const auto flows = pipe::collect_flows(trace(8, 5).packets);
  try {
    pipe::label_helper(flows, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewFlows);
  }
  pipe::LabelParams bad;
  bad.k_min = 3;
  bad.k_max = 2;
  EXPECT_THROW(pipe::label_helper(flows, bad), Error);
}

TEST(LabelHelper, ReportRoundTripAndApply) {
  const auto tr = trace(100, 6);
  pipe::LabelParams p;
  p.k_max = 3;
  const auto r = pipe::label_helper(pipe::collect_flows(tr.packets), p);
  std::stringstream io;
  pipe::write_report(io, r);
  const auto back = pipe::read_report(io);
  EXPECT_EQ(back.k, r.k);
  ASSERT_EQ(back.flows.size(), r.flows.size());
  ASSERT_EQ(back.clusters.size(), r.clusters.size());
  for (std::size_t c = 0; c < r.clusters.size(); ++c) {
    EXPECT_EQ(back.clusters[c].members, r.clusters[c].members);
    EXPECT_EQ(back.clusters[c].tip.sni, r.clusters[c].tip.sni);
  }
  for (std::size_t i = 0; i < r.flows.size(); ++i) EXPECT_EQ(back.flows[i].features, r.flows[i].features);

  std::istringstream assign("# labels\n0=first\n\n1=discard\n");
  const auto a = pipe::read_assignments(assign);
  ASSERT_EQ(r.k, 2u);
  const auto ds = pipe::apply_labels(back, a);
  EXPECT_EQ(ds.rows(), r.clusters[0].members.size());
  EXPECT_EQ(ds.schema_version, fx::flow_schema().version);
  for (const auto& l : ds.labels) EXPECT_EQ(l, "first");

  try {
    pipe::apply_labels(back, {{0, "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnassignedCluster);
  }
}

TEST(LabelHelper, MalformedInputs) {
  std::istringstream no_header("cluster,0,1,TLS,1,-,-,-\n");
  EXPECT_THROW(pipe::read_report(no_header), Error);
  std::istringstream bad_assign("0:web\n");
  EXPECT_THROW(pipe::read_assignments(bad_assign), Error);
}
