#pragma once

#include <array>
#include <cstdint>
#include <list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tadk/packet.hpp"

namespace tadk::flow {

/// Canonical, direction-independent 5-tuple: (lo_ip, lo_port) is the
/// lexicographically smaller endpoint.
struct FlowKey {
  IpAddress ip_lo;
  IpAddress ip_hi;
  std::uint16_t port_lo = 0;
  std::uint16_t port_hi = 0;
  std::uint8_t ip_proto = 0;

  static FlowKey from_packet(const PacketRecord& pkt);

  /// "ip:port-ip:port/proto", IPv6 addresses in brackets.
  std::string to_string() const;

  auto operator<=>(const FlowKey&) const = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& key) const noexcept;
};

enum class Direction : std::uint8_t { Fwd = 0, Rev = 1 };

enum class FlowState : std::uint8_t { Active, TimedOut, Finished };

enum class ProtocolLabel : std::uint8_t { Unknown, DNS, HTTP, TLS, OtherTCP, OtherUDP };

std::string_view protocol_name(ProtocolLabel label) noexcept;

struct PacketSummary {
  Direction dir = Direction::Fwd;
  std::uint64_t ts_us = 0;
  std::uint32_t header_len = 0;
  std::uint32_t payload_len = 0;
  std::uint8_t tcp_flags = 0;

  bool operator==(const PacketSummary&) const = default;
};

struct Flow {
  std::uint64_t id = 0;  // creation sequence number within a table
  FlowKey key;
  IpAddress initiator_ip;
  std::uint16_t initiator_port = 0;
  std::vector<PacketSummary> packets;
  std::array<std::vector<std::uint8_t>, 2> payload_head;  // indexed by Direction
  std::array<std::uint32_t, 2> packet_count{};
  std::array<std::uint32_t, 2> payload_packets{};  // payload-bearing packets
  std::array<bool, 2> fin_seen{};
  FlowState state = FlowState::Active;
  ProtocolLabel proto = ProtocolLabel::Unknown;

  std::uint64_t first_ts() const { return packets.empty() ? 0 : packets.front().ts_us; }
  std::uint64_t last_ts() const { return packets.empty() ? 0 : packets.back().ts_us; }
  const std::vector<std::uint8_t>& head(Direction d) const {
    return payload_head[static_cast<int>(d)];
  }
  std::string initiator_key() const;

  bool operator==(const Flow&) const = default;
};

struct FlowConfig {
  std::uint64_t idle_timeout_us = 30'000'000;
  std::size_t max_flows = 1 << 20;
  std::uint32_t pkt_cap = 256;
  std::uint32_t reassembly_budget = 4096;
  std::uint32_t detect_budget = 8;
};

enum class EvictReason : std::uint8_t { IdleTimeout, Finished, PacketCap, TableFull, Flush };

std::string_view evict_reason_name(EvictReason reason) noexcept;

struct Evicted {
  Flow flow;
  EvictReason reason;
};

struct FlowEvent {
  enum class Kind : std::uint8_t { New, Appended, Skipped };
  Kind kind = Kind::Skipped;
  // The flow the packet landed in, when it is still resident in the table.
  // Valid until the next call that mutates the table.
  const Flow* flow = nullptr;
  // Flows removed while handling this packet, in eviction order. A flow
  // that completes on this packet (FIN/RST, packet cap) appears here too.
  std::vector<Evicted> evicted;
};

struct TableStats {
  std::uint64_t packets_in = 0;
  std::uint64_t packets_skipped = 0;  // not TCP/UDP
  std::uint64_t flows_created = 0;
  std::array<std::uint64_t, 5> evictions{};  // indexed by EvictReason

  std::uint64_t evicted(EvictReason r) const { return evictions[static_cast<int>(r)]; }
};

/// Single-writer flow table with LRU idle tracking. Flows are evicted on
/// idle timeout (checked against the newest timestamp seen), on TCP
/// completion (RST, or FIN from both sides), when they reach pkt_cap
/// packets, or when a new flow would exceed max_flows (oldest-idle first).
class FlowTable {
 public:
  explicit FlowTable(FlowConfig config = {});

  FlowEvent insert(const PacketRecord& pkt);
  /// Evicts everything left, oldest-idle first.
  std::vector<Evicted> flush();

  std::size_t size() const noexcept { return flows_.size(); }
  const TableStats& stats() const noexcept { return stats_; }
  const FlowConfig& config() const noexcept { return config_; }

 private:
  struct Slot {
    Flow flow;
    std::list<FlowKey>::iterator lru;
  };

  Evicted remove(std::unordered_map<FlowKey, Slot, FlowKeyHash>::iterator it,
                 EvictReason reason);
  void expire_idle(std::uint64_t now, std::vector<Evicted>& out);

  FlowConfig config_;
  std::unordered_map<FlowKey, Slot, FlowKeyHash> flows_;
  std::list<FlowKey> lru_;  // front = least recently active
  TableStats stats_;
  std::uint64_t now_us_ = 0;
  std::uint64_t next_id_ = 0;
};

/// Rule-based protocol detection from the flow's early payload. Returns
/// Unknown until a rule matches or the detection budget is exhausted; a
/// finished flow that never carried payload stays Unknown.
ProtocolLabel detect_protocol(const Flow& flow, std::uint32_t detect_budget = 8);

/// True when `payload` starts with a plausible DNS header and question.
bool looks_like_dns(std::span<const std::uint8_t> payload);

}  // namespace tadk::flow
