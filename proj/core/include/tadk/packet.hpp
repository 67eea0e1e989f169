#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace tadk {

// IPv4 addresses occupy the first four bytes; the rest stay zero.
struct IpAddress {
  std::uint8_t family = 4;
  std::array<std::uint8_t, 16> bytes{};

  static IpAddress v4(std::uint8_t a, std::uint8_t b, std::uint8_t c,
                      std::uint8_t d);
  static IpAddress v4(std::uint32_t host_order);
  static IpAddress v6(const std::array<std::uint8_t, 16>& raw);

  bool is_v6() const noexcept { return family == 6; }
  std::string to_string() const;

  auto operator<=>(const IpAddress&) const = default;
};

namespace tcp_flag {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
}  // namespace tcp_flag

struct PacketRecord {
  std::uint64_t ts_us = 0;
  IpAddress src_ip;
  IpAddress dst_ip;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t ip_proto = 0;
  std::uint8_t tcp_flags = 0;
  std::uint32_t header_len = 0;   // IP (with extension headers) + transport
  std::uint32_t payload_len = 0;  // on-the-wire payload size
  std::vector<std::uint8_t> payload;  // captured bytes, <= payload_len
  bool truncated = false;

  bool operator==(const PacketRecord&) const = default;
};

enum class LinkType : std::uint32_t { Ethernet = 1, RawIP = 101 };

struct TraceMeta {
  LinkType link_type = LinkType::Ethernet;
  std::uint32_t snaplen = 0;
  std::uint64_t packet_count = 0;   // PacketRecords yielded
  std::uint64_t frames_skipped = 0; // non-IP or undecodable frames
  bool nanosecond = false;
  bool swapped = false;
};

}  // namespace tadk
