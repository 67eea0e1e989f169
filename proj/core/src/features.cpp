#include "tadk/features.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>

#include "tadk/error.hpp"
#include "tadk/histogram.hpp"

namespace tadk::fx {
namespace {

using flow::Direction;
using flow::Flow;

// ---------------------------------------------------------------------------
// Schema

FeatureSchema build_schema() {
  FeatureSchema schema;
  schema.version = "tadk-flow-v1";
  auto add = [&schema](std::string name, Group g, std::string unit) {
    schema.features.push_back(
        {static_cast<std::uint32_t>(schema.features.size()), std::move(name), g, std::move(unit)});
  };
  for (const char* scope : {"fwd", "rev", "all"}) {
    const std::string s = scope;
    add(s + ".pkt_count", Group::Stat, "packets");
    add(s + ".bytes", Group::Stat, "bytes");
    add(s + ".payload_min", Group::Stat, "bytes");
    add(s + ".payload_max", Group::Stat, "bytes");
    add(s + ".payload_mean", Group::Stat, "bytes");
    add(s + ".payload_std", Group::Stat, "bytes");
    add(s + ".iat_min", Group::Stat, "us");
    add(s + ".iat_max", Group::Stat, "us");
    add(s + ".iat_mean", Group::Stat, "us");
    add(s + ".iat_std", Group::Stat, "us");
  }
  for (const char* which : {"payload", "header", "iat"}) {
    for (int b = 0; b < 16; ++b) {
      char name[32];
      std::snprintf(name, sizeof name, "hist.%s.b%02d", which, b);
      add(name, Group::Hist, "count");
    }
  }
  add("dns.qname_len", Group::Dns, "bytes");
  add("dns.labels", Group::Dns, "count");
  add("dns.qname_entropy", Group::Dns, "bits");
  add("dns.qtype", Group::Dns, "code");
  add("dns.ancount", Group::Dns, "count");
  add("dns.is_response", Group::Dns, "flag");
  add("http.method", Group::Http, "enum");
  add("http.uri_len", Group::Http, "bytes");
  add("http.path_depth", Group::Http, "count");
  add("http.params", Group::Http, "count");
  add("http.host_len", Group::Http, "bytes");
  add("http.host_entropy", Group::Http, "bits");
  add("http.header_count", Group::Http, "count");
  add("http.ua_len", Group::Http, "bytes");
  add("http.content_length", Group::Http, "bytes");
  add("http.version11", Group::Http, "flag");
  add("tls.version", Group::Tls, "code");
  add("tls.sni_len", Group::Tls, "bytes");
  add("tls.sni_entropy", Group::Tls, "bits");
  add("tls.cipher_suites", Group::Tls, "count");
  add("tls.extensions", Group::Tls, "count");
  add("tls.record_len", Group::Tls, "bytes");
  return schema;
}

// ---------------------------------------------------------------------------
// Moments

struct Moments {
  double min = 0, max = 0, mean = 0, stddev = 0;
};

Moments moments(std::span<const double> xs) {
  Moments m;
  if (xs.empty()) return m;
  m.min = *std::min_element(xs.begin(), xs.end());
  m.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0;
    for (double x : xs) sq += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Protocol parsers

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> data) : data_(data) {}

  bool has(std::size_t n) const { return pos_ + n <= data_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::optional<std::uint8_t> u8() {
    if (!has(1)) return std::nullopt;
    return data_[pos_++];
  }
  std::optional<std::uint16_t> u16() {
    if (!has(2)) return std::nullopt;
    const auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::optional<std::uint32_t> u24() {
    if (!has(3)) return std::nullopt;
    const std::uint32_t v = (std::uint32_t{data_[pos_]} << 16) | (data_[pos_ + 1] << 8) | data_[pos_ + 2];
    pos_ += 3;
    return v;
  }
  bool skip(std::size_t n) {
    if (!has(n)) return false;
    pos_ += n;
    return true;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

struct DnsMessage {
  std::string qname;
  std::uint32_t labels = 0;
  std::uint16_t qtype = 0;
  std::uint16_t qdcount = 0;
  std::uint16_t ancount = 0;
  bool response = false;
};

std::optional<DnsMessage> parse_dns(std::span<const std::uint8_t> payload) {
  if (!flow::looks_like_dns(payload)) return std::nullopt;
  Cursor c(payload);
  DnsMessage msg;
  c.skip(2);
  const std::uint16_t flags = *c.u16();
  msg.response = (flags & 0x8000) != 0;
  msg.qdcount = *c.u16();
  msg.ancount = *c.u16();
  c.skip(4);
  std::size_t name_bytes = 0;
  while (true) {
    const auto len = c.u8();
    if (!len) return std::nullopt;
    if (*len == 0) break;
    if ((*len & 0xc0) != 0 || !c.has(*len)) return std::nullopt;
    name_bytes += *len + 1;
    if (name_bytes > 255) return std::nullopt;
    if (!msg.qname.empty()) msg.qname += '.';
    const auto label = c.take(*len);
    msg.qname.append(label.begin(), label.end());
    ++msg.labels;
  }
  const auto qtype = c.u16();
  if (!qtype || !c.u16()) return std::nullopt;
  msg.qtype = *qtype;
  return msg;
}

constexpr std::string_view http_method_names[] = {
    "GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS", "CONNECT", "TRACE", "PATCH"};

struct HttpRequest {
  std::uint32_t method = 0;
  std::string_view uri;
  bool version11 = false;
  std::uint32_t header_count = 0;
  std::string_view host;
  std::string_view user_agent;
  double content_length = 0;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<HttpRequest> parse_http(std::span<const std::uint8_t> payload) {
  const std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
  HttpRequest req;
  std::size_t line_end = text.find("\r\n");
  const std::string_view line = text.substr(0, line_end);

  const std::size_t sp1 = line.find(' ');
  if (sp1 == std::string_view::npos) return std::nullopt;
  const std::string_view method = line.substr(0, sp1);
  const auto it = std::find(std::begin(http_method_names), std::end(http_method_names), method);
  if (it == std::end(http_method_names)) return std::nullopt;
  req.method = static_cast<std::uint32_t>(it - std::begin(http_method_names));

  std::string_view rest = line.substr(sp1 + 1);
  const std::size_t sp2 = rest.find(' ');
  req.uri = rest.substr(0, sp2);
  if (req.uri.empty()) return std::nullopt;
  if (sp2 != std::string_view::npos) {
    const std::string_view version = trim(rest.substr(sp2 + 1));
    if (!version.starts_with("HTTP/")) return std::nullopt;
    req.version11 = version == "HTTP/1.1";
  }

  while (line_end != std::string_view::npos) {
    const std::size_t start = line_end + 2;
    line_end = text.find("\r\n", start);
    const std::string_view header = text.substr(start, line_end == std::string_view::npos
                                                           ? std::string_view::npos
                                                           : line_end - start);
    if (header.empty()) break;
    const std::size_t colon = header.find(':');
    if (colon == std::string_view::npos) {
      // A header cut off by the capture budget ends the header block.
      if (line_end == std::string_view::npos) break;
      return std::nullopt;
    }
    ++req.header_count;
    const std::string_view name = trim(header.substr(0, colon));
    const std::string_view value = trim(header.substr(colon + 1));
    if (iequals(name, "host")) {
      req.host = value;
    } else if (iequals(name, "user-agent")) {
      req.user_agent = value;
    } else if (iequals(name, "content-length")) {
      std::uint64_t n = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (ec == std::errc()) req.content_length = static_cast<double>(n);
      (void)ptr;
    }
  }
  return req;
}

struct ClientHello {
  std::uint16_t version = 0;
  std::string sni;
  std::uint32_t cipher_suites = 0;
  std::uint32_t extensions = 0;
  std::uint16_t record_len = 0;
};

std::optional<ClientHello> parse_client_hello(std::span<const std::uint8_t> payload) {
  Cursor c(payload);
  ClientHello hello;
  const auto type = c.u8();
  const auto rec_version = c.u16();
  const auto rec_len = c.u16();
  if (!type || !rec_version || !rec_len) return std::nullopt;
  if (*type != 0x16 || (*rec_version >> 8) != 3) return std::nullopt;
  hello.record_len = *rec_len;

  const auto hs_type = c.u8();
  const auto hs_len = c.u24();
  if (!hs_type || !hs_len || *hs_type != 0x01) return std::nullopt;
  if (std::size_t{*hs_len} + 4 > *rec_len) return std::nullopt;  // record/handshake mismatch
  if (!c.has(*hs_len)) return std::nullopt;
  Cursor body(c.take(*hs_len));

  const auto version = body.u16();
  if (!version || !body.skip(32)) return std::nullopt;
  hello.version = *version;
  const auto sid_len = body.u8();
  if (!sid_len || *sid_len > 32 || !body.skip(*sid_len)) return std::nullopt;
  const auto suites_len = body.u16();
  if (!suites_len || *suites_len % 2 != 0 || !body.skip(*suites_len)) return std::nullopt;
  hello.cipher_suites = *suites_len / 2u;
  const auto comp_len = body.u8();
  if (!comp_len || !body.skip(*comp_len)) return std::nullopt;
  if (body.remaining() == 0) return hello;  // no extensions block

  const auto ext_total = body.u16();
  if (!ext_total || !body.has(*ext_total)) return std::nullopt;
  Cursor exts(body.take(*ext_total));
  while (exts.remaining() > 0) {
    const auto ext_type = exts.u16();
    const auto ext_len = exts.u16();
    if (!ext_type || !ext_len || !exts.has(*ext_len)) return std::nullopt;
    Cursor ext(exts.take(*ext_len));
    ++hello.extensions;
    if (*ext_type != 0x0000) continue;
    const auto list_len = ext.u16();
    if (!list_len || !ext.has(*list_len)) return std::nullopt;
    Cursor list(ext.take(*list_len));
    while (list.remaining() > 0) {
      const auto name_type = list.u8();
      const auto name_len = list.u16();
      if (!name_type || !name_len || !list.has(*name_len)) return std::nullopt;
      const auto name = list.take(*name_len);
      if (*name_type == 0 && hello.sni.empty()) hello.sni.assign(name.begin(), name.end());
    }
  }
  return hello;
}

const std::vector<std::uint8_t>& first_head(const Flow& flow) {
  const auto& fwd = flow.head(Direction::Fwd);
  return fwd.empty() ? flow.head(Direction::Rev) : fwd;
}

std::uint32_t clamp_u32(std::uint64_t v) {
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(v, std::numeric_limits<std::uint32_t>::max()));
}

}  // namespace

std::string_view group_name(Group g) noexcept {
  switch (g) {
    case Group::Stat: return "stat";
    case Group::Hist: return "hist";
    case Group::Dns: return "dns";
    case Group::Http: return "http";
    case Group::Tls: return "tls";
  }
  return "?";
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

std::pair<std::uint32_t, std::uint32_t> FeatureSchema::range(Group g) const {
  std::uint32_t first = 0, count = 0;
  for (const auto& f : features) {
    if (f.group != g) continue;
    if (count++ == 0) first = f.id;
  }
  return {first, count};
}

const FeatureSchema& flow_schema() {
  static const FeatureSchema schema = build_schema();
  return schema;
}

double shannon_entropy(std::string_view text) {
  if (text.empty()) return 0.0;
  std::array<std::size_t, 256> freq{};
  for (unsigned char ch : text) ++freq[ch];
  const double n = static_cast<double>(text.size());
  double h = 0;
  for (std::size_t f : freq) {
    if (!f) continue;
    const double p = static_cast<double>(f) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<double> extract_stat(const Flow& flow) {
  if (flow.packets.empty()) throw Error(Errc::EmptyFlow, "flow has no packets");
  std::vector<double> out;
  out.reserve(stat_features + hist_features);

  std::vector<double> payload, iat;
  for (int scope = 0; scope < 3; ++scope) {
    payload.clear();
    iat.clear();
    double bytes = 0;
    std::optional<std::uint64_t> prev;
    for (const auto& p : flow.packets) {
      if (scope < 2 && static_cast<int>(p.dir) != scope) continue;
      payload.push_back(p.payload_len);
      bytes += static_cast<double>(p.header_len) + p.payload_len;
      if (prev) iat.push_back(static_cast<double>(p.ts_us - *prev));
      prev = p.ts_us;
    }
    const Moments pm = moments(payload);
    const Moments im = moments(iat);
    out.insert(out.end(), {static_cast<double>(payload.size()), bytes, pm.min, pm.max, pm.mean,
                           pm.stddev, im.min, im.max, im.mean, im.stddev});
  }

  std::vector<std::uint32_t> lens, hdrs, gaps;
  lens.reserve(flow.packets.size());
  hdrs.reserve(flow.packets.size());
  gaps.reserve(flow.packets.size());
  for (std::size_t i = 0; i < flow.packets.size(); ++i) {
    lens.push_back(flow.packets[i].payload_len);
    hdrs.push_back(flow.packets[i].header_len);
    if (i) gaps.push_back(clamp_u32(flow.packets[i].ts_us - flow.packets[i - 1].ts_us));
  }
  for (const auto& [values, width] : {std::pair{&lens, payload_bin_width},
                                      std::pair{&hdrs, header_bin_width},
                                      std::pair{&gaps, iat_bin_width_us}}) {
    const auto h = hist::hist_avc(*values, width);
    for (auto b : h.bins) out.push_back(static_cast<double>(b));
  }
  return out;
}

GroupResult extract_dns(const Flow& flow) {
  GroupResult r{std::vector<double>(dns_features, 0.0), false};
  const auto primary = parse_dns(first_head(flow));
  if (!primary) {
    r.malformed = true;
    return r;
  }
  std::optional<DnsMessage> response;
  const auto& rev = flow.head(Direction::Rev);
  if (!flow.head(Direction::Fwd).empty() && !rev.empty()) response = parse_dns(rev);
  const DnsMessage& answer = response ? *response : *primary;
  r.values = {static_cast<double>(primary->qname.size()),
              static_cast<double>(primary->labels),
              shannon_entropy(primary->qname),
              static_cast<double>(primary->qtype),
              static_cast<double>(answer.ancount),
              (primary->response || (response && response->response)) ? 1.0 : 0.0};
  return r;
}

GroupResult extract_http(const Flow& flow) {
  GroupResult r{std::vector<double>(http_features, 0.0), false};
  const auto req = parse_http(flow.head(Direction::Fwd));
  if (!req) {
    r.malformed = true;
    return r;
  }
  const std::string_view path = req->uri.substr(0, req->uri.find('?'));
  double params = 0;
  if (const auto q = req->uri.find('?'); q != std::string_view::npos) {
    std::string_view query = req->uri.substr(q + 1);
    while (true) {
      const auto amp = query.find('&');
      if (!query.substr(0, amp).empty()) ++params;
      if (amp == std::string_view::npos) break;
      query.remove_prefix(amp + 1);
    }
  }
  r.values = {static_cast<double>(req->method),
              static_cast<double>(req->uri.size()),
              static_cast<double>(std::count(path.begin(), path.end(), '/')),
              params,
              static_cast<double>(req->host.size()),
              shannon_entropy(req->host),
              static_cast<double>(req->header_count),
              static_cast<double>(req->user_agent.size()),
              req->content_length,
              req->version11 ? 1.0 : 0.0};
  return r;
}

GroupResult extract_tls(const Flow& flow) {
  GroupResult r{std::vector<double>(tls_features, 0.0), false};
  const auto hello = parse_client_hello(flow.head(Direction::Fwd));
  if (!hello) {
    r.malformed = true;
    return r;
  }
  r.values = {static_cast<double>(hello->version),
              static_cast<double>(hello->sni.size()),
              shannon_entropy(hello->sni),
              static_cast<double>(hello->cipher_suites),
              static_cast<double>(hello->extensions),
              static_cast<double>(hello->record_len)};
  return r;
}

FeatureVector extract(const Flow& flow) {
  FeatureVector fv;
  fv.key = flow.key;
  fv.proto = flow.proto;
  fv.values = extract_stat(flow);
  fv.values.resize(flow_feature_count, 0.0);

  const FeatureSchema& schema = flow_schema();
  auto place = [&](Group g, const GroupResult& res) {
    const auto [first, count] = schema.range(g);
    std::copy_n(res.values.begin(), count, fv.values.begin() + first);
    fv.malformed = res.malformed;
  };
  switch (flow.proto) {
    case flow::ProtocolLabel::DNS: place(Group::Dns, extract_dns(flow)); break;
    case flow::ProtocolLabel::HTTP: place(Group::Http, extract_http(flow)); break;
    case flow::ProtocolLabel::TLS: place(Group::Tls, extract_tls(flow)); break;
    default: break;
  }
  for (double& v : fv.values) {
    if (!std::isfinite(v)) v = 0.0;
  }
  return fv;
}

FlowNames flow_names(const Flow& flow) {
  FlowNames names;
  if (const auto hello = parse_client_hello(flow.head(Direction::Fwd))) names.sni = hello->sni;
  if (const auto req = parse_http(flow.head(Direction::Fwd))) names.host = std::string(req->host);
  if (flow.key.ip_proto == 17) {
    if (const auto msg = parse_dns(first_head(flow))) names.qname = msg->qname;
  }
  return names;
}

Dataset make_flow_dataset() {
  Dataset ds;
  ds.schema_version = flow_schema().version;
  ds.feature_names = flow_schema().names();
  return ds;
}

}  // namespace tadk::fx
