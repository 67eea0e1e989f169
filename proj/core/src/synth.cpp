#include "tadk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tadk/error.hpp"

namespace tadk::synth {
namespace {

// Distribution helpers built directly on mt19937_64 output so traces are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }
  double normal(double mean, double stddev) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * std::numbers::pi * u2);
  }
  std::uint32_t poisson(double mean) {
    if (mean <= 0) return 0;
    if (mean > 60) {
      return static_cast<std::uint32_t>(
          std::max(0.0, std::round(normal(mean, std::sqrt(mean)))));
    }
    const double limit = std::exp(-mean);
    double p = uniform();
    std::uint32_t k = 0;
    while (p > limit) {
      p *= uniform();
      ++k;
    }
    return k;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(bits() % n); }

 private:
  std::mt19937_64 engine_;
};

void push16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void push24(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put16_at(std::vector<std::uint8_t>& out, std::size_t off, std::size_t v) {
  out[off] = static_cast<std::uint8_t>(v >> 8);
  out[off + 1] = static_cast<std::uint8_t>(v);
}

void push_qname(std::vector<std::uint8_t>& out, const std::string& qname) {
  std::size_t start = 0;
  while (start < qname.size()) {
    std::size_t dot = qname.find('.', start);
    if (dot == std::string::npos) dot = qname.size();
    const std::size_t len = std::min<std::size_t>(dot - start, 63);
    out.push_back(static_cast<std::uint8_t>(len));
    out.insert(out.end(), qname.begin() + static_cast<std::ptrdiff_t>(start),
               qname.begin() + static_cast<std::ptrdiff_t>(start + len));
    start = dot + 1;
  }
  out.push_back(0);
}

void validate(const SynthSpec& spec) {
  if (spec.flow_count == 0) throw Error(Errc::InvalidSpec, "flow_count must be > 0");
  if (spec.apps.empty()) throw Error(Errc::InvalidSpec, "at least one app signature required");
  if (!(spec.flow_rate > 0)) throw Error(Errc::InvalidSpec, "flow_rate must be positive");
  double total_weight = 0;
  for (const auto& app : spec.apps) {
    if (app.weight < 0 || app.mean_pkts < 1 || app.iat_mean_us < 0 ||
        app.fwd_payload_mean < 0 || app.rev_payload_mean < 0 ||
        app.fwd_payload_std < 0 || app.rev_payload_std < 0 ||
        app.rev_fraction < 0 || app.rev_fraction > 1) {
      throw Error(Errc::InvalidSpec, "negative rate or size in app '" + app.name + "'");
    }
    if (app.min_pkts == 0 || app.max_pkts < app.min_pkts) {
      throw Error(Errc::InvalidSpec, "bad packet-count bounds in app '" + app.name + "'");
    }
    if (app.ip_proto != 6 && app.ip_proto != 17) {
      throw Error(Errc::InvalidSpec, "app '" + app.name + "' must be TCP or UDP");
    }
    if (app.tcp_options > 40 || app.tcp_options % 4 != 0) {
      throw Error(Errc::InvalidSpec, "tcp_options must be a multiple of 4 up to 40");
    }
    total_weight += app.weight;
  }
  if (!(total_weight > 0)) throw Error(Errc::InvalidSpec, "app weights sum to zero");
}

}  // namespace

std::string endpoint_key(const IpAddress& ip, std::uint16_t port) {
  if (ip.is_v6()) return "[" + ip.to_string() + "]:" + std::to_string(port);
  return ip.to_string() + ":" + std::to_string(port);
}

std::vector<std::uint8_t> build_http_request(const std::string& method,
                                             const std::string& uri,
                                             const std::string& host,
                                             const std::string& user_agent,
                                             std::size_t body_len) {
  std::string text = method + " " + uri + " HTTP/1.1\r\n";
  if (!host.empty()) text += "Host: " + host + "\r\n";
  if (!user_agent.empty()) text += "User-Agent: " + user_agent + "\r\n";
  text += "Accept: */*\r\n";
  if (body_len) text += "Content-Length: " + std::to_string(body_len) + "\r\n";
  text += "\r\n";
  text.append(body_len, 'a');
  return {text.begin(), text.end()};
}

std::vector<std::uint8_t> build_client_hello(const std::string& sni,
                                             std::size_t cipher_suites,
                                             std::uint16_t version) {
  std::vector<std::uint8_t> out = {0x16, 0x03, 0x01, 0, 0};
  const std::size_t hs_start = out.size();
  out.push_back(0x01);
  push24(out, 0);
  push16(out, version);
  for (int i = 0; i < 32; ++i) out.push_back(static_cast<std::uint8_t>(i * 7 + 1));
  out.push_back(32);
  for (int i = 0; i < 32; ++i) out.push_back(static_cast<std::uint8_t>(0xa0 + i));
  push16(out, static_cast<std::uint16_t>(cipher_suites * 2));
  for (std::size_t i = 0; i < cipher_suites; ++i) {
    push16(out, static_cast<std::uint16_t>(0xc02b + i));
  }
  out.push_back(1);
  out.push_back(0);

  const std::size_t ext_len_at = out.size();
  push16(out, 0);
  if (!sni.empty()) {
    push16(out, 0x0000);
    push16(out, static_cast<std::uint16_t>(sni.size() + 5));
    push16(out, static_cast<std::uint16_t>(sni.size() + 3));
    out.push_back(0);
    push16(out, static_cast<std::uint16_t>(sni.size()));
    out.insert(out.end(), sni.begin(), sni.end());
  }
  push16(out, 0x000a);  // supported_groups
  push16(out, 4);
  push16(out, 2);
  push16(out, 0x001d);
  push16(out, 0x000b);  // ec_point_formats
  push16(out, 2);
  out.push_back(1);
  out.push_back(0);
  put16_at(out, ext_len_at, out.size() - ext_len_at - 2);

  const std::size_t hs_len = out.size() - hs_start - 4;
  out[hs_start + 1] = static_cast<std::uint8_t>(hs_len >> 16);
  out[hs_start + 2] = static_cast<std::uint8_t>(hs_len >> 8);
  out[hs_start + 3] = static_cast<std::uint8_t>(hs_len);
  put16_at(out, 3, out.size() - 5);
  return out;
}

std::vector<std::uint8_t> build_dns_query(const std::string& qname,
                                          std::uint16_t qtype,
                                          std::uint16_t id) {
  std::vector<std::uint8_t> out;
  push16(out, id);
  push16(out, 0x0100);
  push16(out, 1);
  push16(out, 0);
  push16(out, 0);
  push16(out, 0);
  push_qname(out, qname);
  push16(out, qtype);
  push16(out, 1);
  return out;
}

std::vector<std::uint8_t> build_dns_response(const std::string& qname,
                                             std::uint16_t qtype,
                                             std::uint16_t answers,
                                             std::uint16_t id) {
  std::vector<std::uint8_t> out;
  push16(out, id);
  push16(out, 0x8180);
  push16(out, 1);
  push16(out, answers);
  push16(out, 0);
  push16(out, 0);
  push_qname(out, qname);
  push16(out, qtype);
  push16(out, 1);
  for (std::uint16_t i = 0; i < answers; ++i) {
    push16(out, 0xc00c);
    push16(out, qtype);
    push16(out, 1);
    push16(out, 0);
    push16(out, 60);
    push16(out, 4);
    out.push_back(192);
    out.push_back(0);
    out.push_back(2);
    out.push_back(static_cast<std::uint8_t>(i + 1));
  }
  return out;
}

SynthTrace synth_trace(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);

  std::vector<double> cumulative;
  double acc = 0;
  for (const auto& app : spec.apps) cumulative.push_back(acc += app.weight);

  SynthTrace trace;
  double flow_start = static_cast<double>(spec.start_ts_us);
  const double mean_gap_us = 1e6 / spec.flow_rate;

  for (std::uint32_t f = 0; f < spec.flow_count; ++f) {
    flow_start += rng.exponential(mean_gap_us);
    const double pick = rng.uniform() * acc;
    const std::size_t app_idx = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin());
    const AppSignature& app = spec.apps[std::min(app_idx, spec.apps.size() - 1)];
    const auto app_no = static_cast<std::uint8_t>(std::min(app_idx, spec.apps.size() - 1));

    IpAddress client, server;
    if (app.ipv6) {
      std::array<std::uint8_t, 16> c{0xfd, 0x00}, s{0xfd, 0x01};
      for (int i = 0; i < 4; ++i) c[15 - i] = static_cast<std::uint8_t>((f + 1) >> (8 * i));
      s[15] = static_cast<std::uint8_t>(app_no + 1);
      client = IpAddress::v6(c);
      server = IpAddress::v6(s);
    } else {
      client = IpAddress::v4(0x0a000000u + f + 1);
      server = IpAddress::v4(172, 16, app_no, 1);
    }
    const auto client_port = static_cast<std::uint16_t>(1024 + rng.index(60000));
    const std::string host =
        app.hostnames.empty() ? std::string() : app.hostnames[rng.index(app.hostnames.size())];
    trace.labels[endpoint_key(client, client_port)] = app.name;

    std::uint32_t n = 1 + rng.poisson(app.mean_pkts - 1);
    n = std::clamp(n, app.min_pkts, app.max_pkts);
    if (app.app_payload == AppPayload::Dns) n = std::max<std::uint32_t>(n, 2);

    std::vector<bool> reverse(n, false);
    for (std::uint32_t k = 1; k < n; ++k) {
      reverse[k] = (k == 1 && app.app_payload != AppPayload::None) ||
                   rng.uniform() < app.rev_fraction;
    }
    std::uint32_t last_fwd = 0, last_rev = n;
    for (std::uint32_t k = 0; k < n; ++k) (reverse[k] ? last_rev : last_fwd) = k;

    const std::uint32_t ip_hdr = app.ipv6 ? 40 : 20;
    const std::uint32_t l4_hdr = app.ip_proto == 6 ? 20 + app.tcp_options : 8;
    double ts = flow_start;
    for (std::uint32_t k = 0; k < n; ++k) {
      if (k) ts += rng.exponential(app.iat_mean_us);
      PacketRecord pkt;
      pkt.ts_us = static_cast<std::uint64_t>(ts);
      pkt.ip_proto = app.ip_proto;
      pkt.header_len = ip_hdr + l4_hdr;
      if (reverse[k]) {
        pkt.src_ip = server;
        pkt.dst_ip = client;
        pkt.src_port = app.server_port;
        pkt.dst_port = client_port;
      } else {
        pkt.src_ip = client;
        pkt.dst_ip = server;
        pkt.src_port = client_port;
        pkt.dst_port = app.server_port;
      }

      if (k == 0 && app.app_payload == AppPayload::Http) {
        pkt.payload = build_http_request(
            "GET", "/item/" + std::to_string(rng.index(100000)) + "?v=1", host,
            "Mozilla/5.0 (X11; Linux x86_64)");
      } else if (k == 0 && app.app_payload == AppPayload::Tls) {
        pkt.payload = build_client_hello(host, 8 + rng.index(9));
      } else if (k == 0 && app.app_payload == AppPayload::Dns) {
        pkt.payload = build_dns_query(host, 1, static_cast<std::uint16_t>(rng.bits()));
      } else if (k == 1 && app.app_payload == AppPayload::Dns) {
        pkt.payload = build_dns_response(host, 1, static_cast<std::uint16_t>(1 + rng.index(4)));
      } else {
        const double mean = reverse[k] ? app.rev_payload_mean : app.fwd_payload_mean;
        const double sd = reverse[k] ? app.rev_payload_std : app.fwd_payload_std;
        const double len = std::clamp(std::round(rng.normal(mean, sd)), 0.0,
                                      static_cast<double>(app.max_payload));
        pkt.payload.resize(static_cast<std::size_t>(len));
        for (std::size_t i = 0; i < pkt.payload.size(); i += 8) {
          std::uint64_t word = rng.bits();
          for (std::size_t j = i; j < std::min(i + 8, pkt.payload.size()); ++j) {
            pkt.payload[j] = static_cast<std::uint8_t>(word);
            word >>= 8;
          }
        }
      }
      pkt.payload_len = static_cast<std::uint32_t>(pkt.payload.size());

      if (app.ip_proto == 6) {
        pkt.tcp_flags = tcp_flag::ack | (pkt.payload_len ? tcp_flag::psh : 0);
        if (app.tcp_close && (k == last_fwd || k == last_rev)) {
          pkt.tcp_flags |= tcp_flag::fin;
        }
      }
      trace.packets.push_back(std::move(pkt));
    }
  }

  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.ts_us < b.ts_us;
                   });
  return trace;
}

std::vector<AppSignature> bundled_apps(int count) {
  AppSignature video;
  video.name = "video";
  video.server_port = 443;
  video.mean_pkts = 24;
  video.max_pkts = 120;
  video.fwd_payload_mean = 90;
  video.fwd_payload_std = 30;
  video.rev_payload_mean = 1250;
  video.rev_payload_std = 120;
  video.rev_fraction = 0.75;
  video.iat_mean_us = 900;
  video.tcp_options = 12;
  video.app_payload = AppPayload::Tls;
  video.hostnames = {"edge1.streamcdn.example", "edge2.streamcdn.example",
                     "vod.streamcdn.example"};

  AppSignature chat;
  chat.name = "chat";
  chat.server_port = 443;
  chat.mean_pkts = 12;
  chat.max_pkts = 60;
  chat.fwd_payload_mean = 160;
  chat.fwd_payload_std = 40;
  chat.rev_payload_mean = 190;
  chat.rev_payload_std = 50;
  chat.rev_fraction = 0.5;
  chat.iat_mean_us = 25000;
  chat.tcp_options = 0;
  chat.app_payload = AppPayload::Tls;
  chat.hostnames = {"im.chat.example", "push.chat.example"};
  chat.tcp_close = true;

  if (count <= 2) return {video, chat};

  AppSignature web;
  web.name = "web";
  web.server_port = 80;
  web.mean_pkts = 16;
  web.max_pkts = 80;
  web.fwd_payload_mean = 420;
  web.fwd_payload_std = 90;
  web.rev_payload_mean = 980;
  web.rev_payload_std = 260;
  web.rev_fraction = 0.6;
  web.iat_mean_us = 4000;
  web.tcp_options = 12;
  web.app_payload = AppPayload::Http;
  web.hostnames = {"www.shop.example", "news.portal.example", "api.service.example"};
  web.tcp_close = true;

  AppSignature dns;
  dns.name = "dns";
  dns.ip_proto = 17;
  dns.server_port = 53;
  dns.min_pkts = 2;
  dns.max_pkts = 4;
  dns.mean_pkts = 2;
  dns.rev_fraction = 0.5;
  dns.iat_mean_us = 15000;
  dns.fwd_payload_mean = 40;
  dns.fwd_payload_std = 8;
  dns.rev_payload_mean = 90;
  dns.rev_payload_std = 20;
  dns.app_payload = AppPayload::Dns;
  dns.hostnames = {"a.example", "mail.example.org", "x7f3q9z2.tracker.example",
                   "static.cdn.example"};

  AppSignature game;
  game.name = "game";
  game.ip_proto = 17;
  game.server_port = 27015;
  game.mean_pkts = 30;
  game.max_pkts = 200;
  game.fwd_payload_mean = 60;
  game.fwd_payload_std = 10;
  game.rev_payload_mean = 110;
  game.rev_payload_std = 25;
  game.rev_fraction = 0.5;
  game.iat_mean_us = 33000;

  return {video, chat, web, dns, game};
}

}  // namespace tadk::synth
