#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tadk/packet.hpp"

namespace tadk::synth {

enum class AppPayload { None, Http, Tls, Dns };

/// Traffic signature of one synthetic "application". Distributions are
/// deliberately simple: packet counts are 1 + Poisson(mean - 1) clamped to
/// [min_pkts, max_pkts]; payload sizes are normal and clamped to
/// [0, max_payload]; inter-arrival times are exponential.
struct AppSignature {
  std::string name;
  double weight = 1.0;
  std::uint8_t ip_proto = 6;
  std::uint16_t server_port = 443;
  std::uint32_t min_pkts = 1;
  std::uint32_t max_pkts = 64;
  double mean_pkts = 10.0;
  double fwd_payload_mean = 200.0;
  double fwd_payload_std = 50.0;
  double rev_payload_mean = 800.0;
  double rev_payload_std = 200.0;
  double rev_fraction = 0.5;  // probability a packet goes server->client
  double iat_mean_us = 2000.0;
  std::uint32_t max_payload = 1460;
  std::uint32_t tcp_options = 12;  // bytes of TCP options (multiple of 4)
  AppPayload app_payload = AppPayload::None;
  std::vector<std::string> hostnames;  // SNI / Host / qname pool
  bool ipv6 = false;
  bool tcp_close = false;  // FIN on the last packet of each direction
};

struct SynthSpec {
  std::uint32_t flow_count = 100;
  std::vector<AppSignature> apps;
  double flow_rate = 200.0;  // new flows per second (Poisson arrivals)
  std::uint64_t start_ts_us = 1'600'000'000'000'000ULL;
  std::uint64_t seed = 42;
};

struct SynthTrace {
  std::vector<PacketRecord> packets;  // timestamp order
  // Ground-truth application per flow, keyed by the client endpoint's
  // "ip:port" (each synthetic flow has a unique client endpoint).
  std::map<std::string, std::string> labels;
};

std::string endpoint_key(const IpAddress& ip, std::uint16_t port);

/// Deterministic for a fixed spec. Throws InvalidSpec.
SynthTrace synth_trace(const SynthSpec& spec);

// Reference payload encoders used by the generator and the tests.
std::vector<std::uint8_t> build_http_request(const std::string& method,
                                             const std::string& uri,
                                             const std::string& host,
                                             const std::string& user_agent,
                                             std::size_t body_len = 0);
std::vector<std::uint8_t> build_client_hello(const std::string& sni,
                                             std::size_t cipher_suites,
                                             std::uint16_t version = 0x0303);
std::vector<std::uint8_t> build_dns_query(const std::string& qname,
                                          std::uint16_t qtype = 1,
                                          std::uint16_t id = 0x1234);
std::vector<std::uint8_t> build_dns_response(const std::string& qname,
                                             std::uint16_t qtype,
                                             std::uint16_t answers,
                                             std::uint16_t id = 0x1234);

/// Bundled application mixes: 2 or 5 apps with well-separated signatures.
std::vector<AppSignature> bundled_apps(int count);

}  // namespace tadk::synth
