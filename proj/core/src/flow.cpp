#include "tadk/flow.hpp"

#include <algorithm>
#include <tuple>

#include "tadk/error.hpp"

namespace tadk::flow {
namespace {

std::string endpoint_text(const IpAddress& ip, std::uint16_t port) {
  if (ip.is_v6()) return "[" + ip.to_string() + "]:" + std::to_string(port);
  return ip.to_string() + ":" + std::to_string(port);
}

constexpr std::string_view http_methods[] = {
    "GET ", "POST ", "HEAD ", "PUT ", "DELETE ", "OPTIONS ", "CONNECT ", "TRACE ", "PATCH "};

bool starts_with_method(std::span<const std::uint8_t> payload) {
  const std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
  return std::any_of(std::begin(http_methods), std::end(http_methods),
                     [&](std::string_view m) { return text.starts_with(m); });
}

}  // namespace

FlowKey FlowKey::from_packet(const PacketRecord& pkt) {
  FlowKey key;
  key.ip_proto = pkt.ip_proto;
  if (std::tie(pkt.src_ip, pkt.src_port) <= std::tie(pkt.dst_ip, pkt.dst_port)) {
    key.ip_lo = pkt.src_ip;
    key.port_lo = pkt.src_port;
    key.ip_hi = pkt.dst_ip;
    key.port_hi = pkt.dst_port;
  } else {
    key.ip_lo = pkt.dst_ip;
    key.port_lo = pkt.dst_port;
    key.ip_hi = pkt.src_ip;
    key.port_hi = pkt.src_port;
  }
  return key;
}

std::string FlowKey::to_string() const {
  return endpoint_text(ip_lo, port_lo) + "-" + endpoint_text(ip_hi, port_hi) + "/" +
         std::to_string(ip_proto);
}

std::size_t FlowKeyHash::operator()(const FlowKey& key) const noexcept {
  // FNV-1a over the canonical fields.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (auto b : key.ip_lo.bytes) mix(b);
  for (auto b : key.ip_hi.bytes) mix(b);
  mix(static_cast<std::uint8_t>(key.port_lo));
  mix(static_cast<std::uint8_t>(key.port_lo >> 8));
  mix(static_cast<std::uint8_t>(key.port_hi));
  mix(static_cast<std::uint8_t>(key.port_hi >> 8));
  mix(key.ip_proto);
  return static_cast<std::size_t>(h);
}

std::string Flow::initiator_key() const { return endpoint_text(initiator_ip, initiator_port); }

std::string_view protocol_name(ProtocolLabel label) noexcept {
  switch (label) {
    case ProtocolLabel::Unknown: return "Unknown";
    case ProtocolLabel::DNS: return "DNS";
    case ProtocolLabel::HTTP: return "HTTP";
    case ProtocolLabel::TLS: return "TLS";
    case ProtocolLabel::OtherTCP: return "OtherTCP";
    case ProtocolLabel::OtherUDP: return "OtherUDP";
  }
  return "Unknown";
}

std::string_view evict_reason_name(EvictReason reason) noexcept {
  switch (reason) {
    case EvictReason::IdleTimeout: return "idle";
    case EvictReason::Finished: return "finished";
    case EvictReason::PacketCap: return "cap";
    case EvictReason::TableFull: return "full";
    case EvictReason::Flush: return "flush";
  }
  return "?";
}

bool looks_like_dns(std::span<const std::uint8_t> payload) {
  if (payload.size() < 12) return false;
  const unsigned opcode = (payload[2] >> 3) & 0x0f;
  const unsigned qdcount = (payload[4] << 8) | payload[5];
  return qdcount >= 1 && opcode <= 5;
}

ProtocolLabel detect_protocol(const Flow& flow, std::uint32_t detect_budget) {
  const bool udp = flow.key.ip_proto == 17;
  const auto& fwd = flow.head(Direction::Fwd);
  const auto& rev = flow.head(Direction::Rev);

  if (udp && (flow.key.port_lo == 53 || flow.key.port_hi == 53)) {
    if (looks_like_dns(fwd.empty() ? rev : fwd)) return ProtocolLabel::DNS;
  }
  if (!udp && !fwd.empty()) {
    if (starts_with_method(fwd)) return ProtocolLabel::HTTP;
    if (fwd.size() >= 2 && fwd[0] == 0x16 && fwd[1] == 0x03) return ProtocolLabel::TLS;
  }

  const std::uint32_t seen = flow.payload_packets[0] + flow.payload_packets[1];
  if (seen >= detect_budget || flow.state != FlowState::Active) {
    if (seen == 0) return ProtocolLabel::Unknown;
    return udp ? ProtocolLabel::OtherUDP : ProtocolLabel::OtherTCP;
  }
  return ProtocolLabel::Unknown;
}

FlowTable::FlowTable(FlowConfig config) : config_(config) {
  if (config_.max_flows == 0) throw Error(Errc::InvalidArgs, "max_flows must be > 0");
  if (config_.pkt_cap == 0) throw Error(Errc::InvalidArgs, "pkt_cap must be > 0");
}

Evicted FlowTable::remove(std::unordered_map<FlowKey, Slot, FlowKeyHash>::iterator it,
                          EvictReason reason) {
  Evicted ev{std::move(it->second.flow), reason};
  lru_.erase(it->second.lru);
  flows_.erase(it);
  if (ev.flow.state == FlowState::Active) {
    ev.flow.state = reason == EvictReason::IdleTimeout ? FlowState::TimedOut : FlowState::Finished;
  }
  if (ev.flow.proto == ProtocolLabel::Unknown) {
    ev.flow.proto = detect_protocol(ev.flow, config_.detect_budget);
  }
  ++stats_.evictions[static_cast<int>(reason)];
  return ev;
}

void FlowTable::expire_idle(std::uint64_t now, std::vector<Evicted>& out) {
  while (!lru_.empty()) {
    auto it = flows_.find(lru_.front());
    if (it->second.flow.last_ts() + config_.idle_timeout_us >= now) break;
    out.push_back(remove(it, EvictReason::IdleTimeout));
  }
}

FlowEvent FlowTable::insert(const PacketRecord& pkt) {
  ++stats_.packets_in;
  FlowEvent ev;
  if (pkt.ip_proto != 6 && pkt.ip_proto != 17) {
    ++stats_.packets_skipped;
    return ev;
  }
  now_us_ = std::max(now_us_, pkt.ts_us);
  expire_idle(now_us_, ev.evicted);

  const FlowKey key = FlowKey::from_packet(pkt);
  auto it = flows_.find(key);
  if (it == flows_.end()) {
    if (flows_.size() >= config_.max_flows) {
      ev.evicted.push_back(remove(flows_.find(lru_.front()), EvictReason::TableFull));
    }
    lru_.push_back(key);
    Slot slot{Flow{}, std::prev(lru_.end())};
    slot.flow.id = next_id_++;
    slot.flow.key = key;
    slot.flow.initiator_ip = pkt.src_ip;
    slot.flow.initiator_port = pkt.src_port;
    it = flows_.emplace(key, std::move(slot)).first;
    ++stats_.flows_created;
    ev.kind = FlowEvent::Kind::New;
  } else {
    lru_.splice(lru_.end(), lru_, it->second.lru);
    ev.kind = FlowEvent::Kind::Appended;
  }

  Flow& flow = it->second.flow;
  const Direction dir =
      (pkt.src_ip == flow.initiator_ip && pkt.src_port == flow.initiator_port) ? Direction::Fwd
                                                                               : Direction::Rev;
  const int d = static_cast<int>(dir);
  // Timestamps inside a flow are kept non-decreasing.
  const std::uint64_t ts = std::max(pkt.ts_us, flow.last_ts());
  flow.packets.push_back({dir, ts, pkt.header_len, pkt.payload_len, pkt.tcp_flags});
  ++flow.packet_count[d];
  if (pkt.payload_len > 0) {
    ++flow.payload_packets[d];
    auto& head = flow.payload_head[d];
    const std::size_t room = config_.reassembly_budget - std::min<std::size_t>(head.size(), config_.reassembly_budget);
    const std::size_t take = std::min(room, pkt.payload.size());
    head.insert(head.end(), pkt.payload.begin(), pkt.payload.begin() + static_cast<std::ptrdiff_t>(take));
  }
  if (flow.proto == ProtocolLabel::Unknown) {
    flow.proto = detect_protocol(flow, config_.detect_budget);
  }

  bool done = false;
  EvictReason reason = EvictReason::Finished;
  if (pkt.ip_proto == 6) {
    if (pkt.tcp_flags & tcp_flag::fin) flow.fin_seen[d] = true;
    if ((pkt.tcp_flags & tcp_flag::rst) || (flow.fin_seen[0] && flow.fin_seen[1])) done = true;
  }
  if (!done && flow.packets.size() >= config_.pkt_cap) {
    done = true;
    reason = EvictReason::PacketCap;
  }
  if (done) {
    flow.state = FlowState::Finished;
    ev.evicted.push_back(remove(it, reason));
  } else {
    ev.flow = &flow;
  }
  return ev;
}

std::vector<Evicted> FlowTable::flush() {
  std::vector<Evicted> out;
  out.reserve(flows_.size());
  while (!lru_.empty()) out.push_back(remove(flows_.find(lru_.front()), EvictReason::Flush));
  return out;
}

}  // namespace tadk::flow
