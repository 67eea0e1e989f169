#include <gtest/gtest.h>

#include <set>

#include "tadk/error.hpp"
#include "tadk/flow.hpp"
#include "tadk/synth.hpp"

using namespace tadk;

TEST(Synth, DeterministicForFixedSpec) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(5);
  spec.flow_count = 80;
  spec.seed = 9;
  const auto a = synth::synth_trace(spec);
  const auto b = synth::synth_trace(spec);
  EXPECT_EQ(a.packets, b.packets);
  EXPECT_EQ(a.labels, b.labels);
  spec.seed = 10;
  EXPECT_NE(synth::synth_trace(spec).packets, a.packets);
}

TEST(Synth, TimestampOrderAndOneLabelPerFlow) {
  for (int apps : {2, 5}) {
    synth::SynthSpec spec;
    spec.apps = synth::bundled_apps(apps);
    spec.flow_count = 150;
    const auto tr = synth::synth_trace(spec);
    EXPECT_EQ(tr.labels.size(), 150u);
    for (std::size_t i = 1; i < tr.packets.size(); ++i) {
      ASSERT_LE(tr.packets[i - 1].ts_us, tr.packets[i].ts_us);
    }
    std::set<std::string> names;
    for (const auto& a : spec.apps) names.insert(a.name);
    std::set<flow::FlowKey> keys;
    for (const auto& p : tr.packets) keys.insert(flow::FlowKey::from_packet(p));
    EXPECT_EQ(keys.size(), 150u);
    for (const auto& [ep, label] : tr.labels) EXPECT_TRUE(names.count(label)) << ep;
    std::set<std::string> used;
    for (const auto& [ep, label] : tr.labels) used.insert(label);
    EXPECT_EQ(used.size(), names.size());
  }
}

TEST(Synth, PacketCountsRespectBounds) {
  synth::AppSignature app;
  app.name = "x";
  app.min_pkts = 3;
  app.max_pkts = 5;
  app.mean_pkts = 20;
  synth::SynthSpec spec;
  spec.apps = {app};
  spec.flow_count = 50;
  const auto tr = synth::synth_trace(spec);
  std::map<flow::FlowKey, int> per_flow;
  for (const auto& p : tr.packets) ++per_flow[flow::FlowKey::from_packet(p)];
  for (const auto& [k, n] : per_flow) {
    EXPECT_GE(n, 3);
    EXPECT_LE(n, 5);
  }
}

TEST(Synth, InvalidSpecs) {
  auto expect_invalid = [](synth::SynthSpec spec) {
    try {
      synth::synth_trace(spec);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidSpec);
    }
  };
  synth::SynthSpec ok;
  ok.apps = synth::bundled_apps(2);
  auto s = ok;
  s.flow_count = 0;
  expect_invalid(s);
  s = ok;
  s.apps.clear();
  expect_invalid(s);
  s = ok;
  s.flow_rate = 0;
  expect_invalid(s);
  s = ok;
  s.apps[0].ip_proto = 1;
  expect_invalid(s);
  s = ok;
  s.apps[0].min_pkts = 10;
  s.apps[0].max_pkts = 2;
  expect_invalid(s);
  s = ok;
  s.apps[0].tcp_options = 6;
  expect_invalid(s);
}

TEST(Synth, EndpointKeyBracketsIpv6) {
  EXPECT_EQ(synth::endpoint_key(IpAddress::v4(1, 2, 3, 4), 80), "1.2.3.4:80");
  std::array<std::uint8_t, 16> a{};
  a[15] = 1;
  EXPECT_EQ(synth::endpoint_key(IpAddress::v6(a), 53), "[::1]:53");
}

TEST(Synth, PayloadBuilders) {
  const auto http = synth::build_http_request("GET", "/a?b=1", "h.example", "ua/1", 0);
  const std::string text(http.begin(), http.end());
  EXPECT_TRUE(text.starts_with("GET /a?b=1 HTTP/1.1\r\n"));
  EXPECT_NE(text.find("Host: h.example\r\n"), std::string::npos);
  EXPECT_TRUE(text.ends_with("\r\n\r\n"));

  const auto hello = synth::build_client_hello("sni.example", 4);
  ASSERT_GT(hello.size(), 5u);
  EXPECT_EQ(hello[0], 0x16);                                // handshake record
  EXPECT_EQ((hello[3] << 8 | hello[4]) + 5, static_cast<int>(hello.size()));
  EXPECT_EQ(hello[5], 0x01);                                // ClientHello

  const auto q = synth::build_dns_query("a.b", 1, 0xbeef);
  ASSERT_EQ(q.size(), 12u + 5u + 4u);
  EXPECT_EQ(q[0], 0xbe);
  EXPECT_EQ(q[1], 0xef);
  EXPECT_TRUE(flow::looks_like_dns(q));
}
