#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "tadk/error.hpp"
#include "tadk/features.hpp"
#include "tadk/synth.hpp"

using namespace tadk;

namespace {

PacketRecord mk(std::uint64_t ts, bool fwd, std::uint32_t hdr, std::vector<std::uint8_t> payload,
                std::uint16_t server_port = 80, std::uint8_t proto = 6) {
  PacketRecord p;
  p.ts_us = ts;
  p.src_ip = IpAddress::v4(10, 0, 0, fwd ? 1 : 2);
  p.dst_ip = IpAddress::v4(10, 0, 0, fwd ? 2 : 1);
  p.src_port = fwd ? 40000 : server_port;
  p.dst_port = fwd ? server_port : 40000;
  p.ip_proto = proto;
  p.header_len = hdr;
  p.payload = std::move(payload);
  p.payload_len = static_cast<std::uint32_t>(p.payload.size());
  return p;
}

flow::Flow build(const std::vector<PacketRecord>& pkts) {
  flow::FlowTable t;
  for (const auto& p : pkts) t.insert(p);
  return t.flush().at(0).flow;
}

std::vector<std::uint8_t> text(std::string_view s) { return {s.begin(), s.end()}; }

double value(const fx::FeatureVector& fv, std::string_view name) {
  const auto names = fx::flow_schema().names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::runtime_error("no feature " + std::string(name));
  return fv.values[static_cast<std::size_t>(it - names.begin())];
}

}  // namespace

TEST(Schema, Shape) {
  const auto& s = fx::flow_schema();
  EXPECT_EQ(s.version, "tadk-flow-v1");
  ASSERT_EQ(s.size(), 100u);
  const auto names = s.names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 100u);
  for (std::uint32_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.features[i].id, i);
  EXPECT_EQ(s.range(fx::Group::Stat), (std::pair<std::uint32_t, std::uint32_t>{0, 30}));
  EXPECT_EQ(s.range(fx::Group::Hist), (std::pair<std::uint32_t, std::uint32_t>{30, 48}));
  EXPECT_EQ(s.range(fx::Group::Dns), (std::pair<std::uint32_t, std::uint32_t>{78, 6}));
  EXPECT_EQ(s.range(fx::Group::Http), (std::pair<std::uint32_t, std::uint32_t>{84, 10}));
  EXPECT_EQ(s.range(fx::Group::Tls), (std::pair<std::uint32_t, std::uint32_t>{94, 6}));
  const auto ds = fx::make_flow_dataset();
  EXPECT_EQ(ds.schema_version, s.version);
  EXPECT_EQ(ds.feature_names, names);
}

TEST(Extract, StatisticsByHand) {
  // fwd payloads 100, 300 at t=0, 3000; rev payload 50 at t=1000.
  const auto f = build({mk(0, true, 40, std::vector<std::uint8_t>(100, 'x')),
                        mk(1000, false, 32, std::vector<std::uint8_t>(50, 'y')),
                        mk(3000, true, 40, std::vector<std::uint8_t>(300, 'z'))});
  const auto fv = fx::extract(f);
  ASSERT_EQ(fv.values.size(), 100u);
  EXPECT_EQ(value(fv, "fwd.pkt_count"), 2);
  EXPECT_EQ(value(fv, "fwd.bytes"), 40 + 100 + 40 + 300);
  EXPECT_EQ(value(fv, "fwd.payload_min"), 100);
  EXPECT_EQ(value(fv, "fwd.payload_max"), 300);
  EXPECT_EQ(value(fv, "fwd.payload_mean"), 200);
  EXPECT_EQ(value(fv, "fwd.payload_std"), 100);
  EXPECT_EQ(value(fv, "fwd.iat_mean"), 3000);
  EXPECT_EQ(value(fv, "rev.pkt_count"), 1);
  EXPECT_EQ(value(fv, "rev.iat_max"), 0);
  EXPECT_EQ(value(fv, "all.pkt_count"), 3);
  EXPECT_EQ(value(fv, "all.iat_min"), 1000);
  EXPECT_EQ(value(fv, "all.iat_max"), 2000);
  EXPECT_DOUBLE_EQ(value(fv, "all.payload_mean"), 150);
  EXPECT_DOUBLE_EQ(value(fv, "all.payload_std"), std::sqrt((50.0 * 50 + 100 * 100 + 150 * 150) / 3));
  // 100 -> b01, 50 -> b00, 300 -> b04; headers 40/32/40 -> b10, b08; gaps 1000, 2000 -> b00.
  EXPECT_EQ(value(fv, "hist.payload.b00"), 1);
  EXPECT_EQ(value(fv, "hist.payload.b01"), 1);
  EXPECT_EQ(value(fv, "hist.payload.b04"), 1);
  EXPECT_EQ(value(fv, "hist.header.b10"), 2);
  EXPECT_EQ(value(fv, "hist.header.b08"), 1);
  EXPECT_EQ(value(fv, "hist.iat.b00"), 2);
  double payload_hist = 0;
  for (int b = 0; b < 16; ++b) {
    char n[32];
    std::snprintf(n, sizeof n, "hist.payload.b%02d", b);
    payload_hist += value(fv, n);
  }
  EXPECT_EQ(payload_hist, 3);
}

TEST(Extract, Http) {
  const auto req = synth::build_http_request("POST", "/a/b/c?x=1&y=2&&z", "host.example", "agent/7", 12);
  const auto f = build({mk(0, true, 40, req)});
  ASSERT_EQ(f.proto, flow::ProtocolLabel::HTTP);
  const auto fv = fx::extract(f);
  EXPECT_FALSE(fv.malformed);
  EXPECT_EQ(value(fv, "http.method"), 1);
  EXPECT_EQ(value(fv, "http.uri_len"), 17);
  EXPECT_EQ(value(fv, "http.path_depth"), 3);
  EXPECT_EQ(value(fv, "http.params"), 3);
  EXPECT_EQ(value(fv, "http.host_len"), 12);
  EXPECT_DOUBLE_EQ(value(fv, "http.host_entropy"), fx::shannon_entropy("host.example"));
  EXPECT_EQ(value(fv, "http.ua_len"), 7);
  EXPECT_EQ(value(fv, "http.content_length"), 12);
  EXPECT_EQ(value(fv, "http.version11"), 1);
  EXPECT_EQ(value(fv, "tls.sni_len"), 0);
  EXPECT_EQ(fx::flow_names(f).host, "host.example");
}

TEST(Extract, Tls) {
  const auto hello = synth::build_client_hello("video.example.net", 7, 0x0303);
  const auto f = build({mk(0, true, 40, hello, 443)});
  ASSERT_EQ(f.proto, flow::ProtocolLabel::TLS);
  const auto fv = fx::extract(f);
  EXPECT_EQ(value(fv, "tls.version"), 0x0303);
  EXPECT_EQ(value(fv, "tls.sni_len"), 17);
  EXPECT_EQ(value(fv, "tls.cipher_suites"), 7);
  EXPECT_GE(value(fv, "tls.extensions"), 1);
  EXPECT_EQ(value(fv, "tls.record_len"), static_cast<double>(hello.size() - 5));
  EXPECT_EQ(fx::flow_names(f).sni, "video.example.net");
}

TEST(Extract, DnsQueryAndResponse) {
  const auto f = build({mk(0, true, 28, synth::build_dns_query("a.bb.example", 28), 53, 17),
                        mk(10, false, 28, synth::build_dns_response("a.bb.example", 28, 3), 53, 17)});
  ASSERT_EQ(f.proto, flow::ProtocolLabel::DNS);
  const auto fv = fx::extract(f);
  EXPECT_EQ(value(fv, "dns.qname_len"), 12);
  EXPECT_EQ(value(fv, "dns.labels"), 3);
  EXPECT_EQ(value(fv, "dns.qtype"), 28);
  EXPECT_EQ(value(fv, "dns.ancount"), 3);
  EXPECT_EQ(value(fv, "dns.is_response"), 1);
  EXPECT_EQ(fx::flow_names(f).qname, "a.bb.example");
}

TEST(Extract, MalformedTlsZeroesGroup) {
  auto hello = synth::build_client_hello("x.example", 4);
  hello[6] = 0x7f;  // handshake length larger than the record
  const auto f = build({mk(0, true, 40, hello, 443)});
  ASSERT_EQ(f.proto, flow::ProtocolLabel::TLS);
  const auto fv = fx::extract(f);
  EXPECT_TRUE(fv.malformed);
  for (std::uint32_t i = 94; i < 100; ++i) EXPECT_EQ(fv.values[i], 0.0);
  EXPECT_EQ(fv.values[0], 1.0);  // stats are still there
}

TEST(Extract, EmptyFlowThrows) {
  flow::Flow f;
  try {
    fx::extract(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyFlow);
  }
}

TEST(Extract, EntropyMatchesDefinition) {
  EXPECT_DOUBLE_EQ(fx::shannon_entropy(""), 0.0);
  EXPECT_DOUBLE_EQ(fx::shannon_entropy("aaaa"), 0.0);
  EXPECT_DOUBLE_EQ(fx::shannon_entropy("ab"), 1.0);
  EXPECT_DOUBLE_EQ(fx::shannon_entropy("abcd"), 2.0);
  EXPECT_NEAR(fx::shannon_entropy("aab"), -(2.0 / 3 * std::log2(2.0 / 3) + 1.0 / 3 * std::log2(1.0 / 3)), 1e-12);
}

TEST(Extract, AllFiniteOnSyntheticTraffic) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(5);
  spec.flow_count = 100;
  const auto tr = synth::synth_trace(spec);
  flow::FlowTable t;
  std::vector<flow::Flow> flows;
  for (const auto& p : tr.packets) {
    for (auto& e : t.insert(p).evicted) flows.push_back(std::move(e.flow));
  }
  for (auto& e : t.flush()) flows.push_back(std::move(e.flow));
  ASSERT_EQ(flows.size(), 100u);
  for (const auto& f : flows) {
    const auto fv = fx::extract(f);
    EXPECT_FALSE(fv.malformed);
    for (double v : fv.values) ASSERT_TRUE(std::isfinite(v));
  }
}
