#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tadk/error.hpp"
#include "tadk/pcap.hpp"
#include "tadk/synth.hpp"

using namespace tadk;

namespace {

PacketRecord tcp_packet() {
  PacketRecord p;
  p.ts_us = 1'700'000'000'123'456ULL;
  p.src_ip = IpAddress::v4(10, 0, 0, 1);
  p.dst_ip = IpAddress::v4(192, 168, 1, 9);
  p.src_port = 40000;
  p.dst_port = 443;
  p.ip_proto = 6;
  p.tcp_flags = tcp_flag::syn | tcp_flag::ack;
  p.header_len = 20 + 32;
  p.payload = {1, 2, 3, 4, 5};
  p.payload_len = 5;
  return p;
}

PacketRecord udp6_packet() {
  PacketRecord p;
  p.ts_us = 1'700'000'001'000'000ULL;
  std::array<std::uint8_t, 16> a{0x20, 0x01, 0x0d, 0xb8};
  a[15] = 1;
  auto b = a;
  b[15] = 2;
  p.src_ip = IpAddress::v6(a);
  p.dst_ip = IpAddress::v6(b);
  p.src_port = 5353;
  p.dst_port = 53;
  p.ip_proto = 17;
  p.header_len = 40 + 8;
  p.payload = synth::build_dns_query("www.example.org");
  p.payload_len = static_cast<std::uint32_t>(p.payload.size());
  return p;
}

std::vector<std::uint8_t> to_bytes(const std::vector<PacketRecord>& pkts, pcap::WriterOptions opts) {
  std::vector<std::uint8_t> sink;
  pcap::Writer w(sink, opts);
  for (const auto& p : pkts) w.write(p);
  w.flush();
  return sink;
}

}  // namespace

TEST(Pcap, RoundTripAllHeaderVariants) {
  const std::vector<PacketRecord> pkts{tcp_packet(), udp6_packet()};
  for (bool swapped : {false, true}) {
    for (bool nano : {false, true}) {
      for (auto link : {LinkType::Ethernet, LinkType::RawIP}) {
        pcap::WriterOptions o;
        o.swapped = swapped;
        o.nanosecond = nano;
        o.link_type = link;
        const auto trace = pcap::read_pcap_bytes(to_bytes(pkts, o));
        EXPECT_EQ(trace.meta.swapped, swapped);
        EXPECT_EQ(trace.meta.nanosecond, nano);
        EXPECT_EQ(trace.meta.link_type, link);
        EXPECT_EQ(trace.meta.packet_count, 2u);
        ASSERT_EQ(trace.packets.size(), 2u);
        EXPECT_EQ(trace.packets[0], pkts[0]);
        EXPECT_EQ(trace.packets[1], pkts[1]);
      }
    }
  }
}

TEST(Pcap, SyntheticTraceSurvivesFile) {
  synth::SynthSpec spec;
  spec.apps = synth::bundled_apps(5);
  spec.flow_count = 60;
  const auto tr = synth::synth_trace(spec);
  const auto dir = oracle::temp_dir("pcap");
  pcap::write_pcap(dir / "t.pcap", tr.packets);
  const auto back = pcap::read_pcap(dir / "t.pcap");
  ASSERT_EQ(back.packets.size(), tr.packets.size());
  for (std::size_t i = 0; i < tr.packets.size(); ++i) EXPECT_EQ(back.packets[i], tr.packets[i]) << i;
  std::filesystem::remove_all(dir);
}

TEST(Pcap, SnaplenTruncationKeepsWireLength) {
  auto p = tcp_packet();
  p.payload.assign(300, 0x41);
  p.payload_len = 300;
  pcap::WriterOptions o;
  o.snaplen = 14 + 52 + 100;
  const auto trace = pcap::read_pcap_bytes(to_bytes({p}, o));
  ASSERT_EQ(trace.packets.size(), 1u);
  EXPECT_EQ(trace.packets[0].payload_len, 300u);
  EXPECT_EQ(trace.packets[0].payload.size(), 100u);
  EXPECT_TRUE(trace.packets[0].truncated);
}

TEST(Pcap, HeaderErrors) {
  auto expect_code = [](std::vector<std::uint8_t> bytes, Errc code) {
    try {
      pcap::read_pcap_bytes(std::move(bytes));
      ADD_FAILURE() << "no error";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code({1, 2}, Errc::BadMagic);
  expect_code({0, 0, 0, 0, 1, 2, 3, 4}, Errc::BadMagic);

  auto good = to_bytes({tcp_packet()}, {});
  expect_code({good.begin(), good.begin() + 10}, Errc::TruncatedHeader);
  expect_code({good.begin(), good.begin() + 24 + 8}, Errc::TruncatedHeader);
  expect_code({good.begin(), good.end() - 1}, Errc::TruncatedHeader);

  auto other_link = good;
  other_link[20] = 113;  // Linux cooked capture
  expect_code(other_link, Errc::UnsupportedLinkType);
}

TEST(Pcap, NonIpFramesAreSkippedAndCounted) {
  auto bytes = to_bytes({tcp_packet()}, {});
  // Append an ARP frame by hand.
  const std::vector<std::uint8_t> arp(42, 0);
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put32(1);
  put32(0);
  put32(42);
  put32(42);
  std::vector<std::uint8_t> frame = arp;
  frame[12] = 0x08;
  frame[13] = 0x06;
  bytes.insert(bytes.end(), frame.begin(), frame.end());
  const auto trace = pcap::read_pcap_bytes(bytes);
  EXPECT_EQ(trace.packets.size(), 1u);
  EXPECT_EQ(trace.meta.frames_skipped, 1u);
  EXPECT_EQ(trace.meta.packet_count, 1u);
}

TEST(Pcap, DecodeFrameRejectsGarbage) {
  const std::vector<std::uint8_t> junk(10, 0xff);
  EXPECT_FALSE(pcap::decode_frame(junk, 10, LinkType::Ethernet).has_value());
  EXPECT_FALSE(pcap::decode_frame(junk, 10, LinkType::RawIP).has_value());
}

TEST(Pcap, MissingFileIsIoError) {
  try {
    pcap::read_pcap("/nonexistent/trace.pcap");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Io);
  }
}

TEST(Packet, AddressFormatting) {
  EXPECT_EQ(IpAddress::v4(10, 1, 2, 3).to_string(), "10.1.2.3");
  EXPECT_EQ(IpAddress::v4(0x0a010203u).to_string(), "10.1.2.3");
  std::array<std::uint8_t, 16> a{0x20, 0x01, 0x0d, 0xb8};
  a[15] = 1;
  EXPECT_EQ(IpAddress::v6(a).to_string(), "2001:db8::1");
}
