#include "tadk/pcap.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <iterator>

#include "tadk/error.hpp"

namespace tadk::pcap {
namespace {

constexpr std::size_t global_header_len = 24;
constexpr std::size_t record_header_len = 16;
constexpr std::size_t ethernet_header_len = 14;
constexpr int max_vlan_tags = 2;
constexpr int max_ipv6_ext_headers = 8;

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
         (v >> 24);
}

bool is_ipv6_ext_header(std::uint8_t nh) {
  switch (nh) {
    case 0:    // hop-by-hop
    case 43:   // routing
    case 44:   // fragment
    case 51:   // AH
    case 60:   // destination options
    case 135:  // mobility
    case 139:  // HIP
    case 140:  // shim6
      return true;
    default:
      return false;
  }
}

struct IpLayer {
  std::uint8_t proto = 0;
  std::size_t header_len = 0;  // including IPv6 extension headers
  std::size_t total_len = 0;   // header + L4 on the wire
};

std::optional<IpLayer> decode_ipv4(std::span<const std::uint8_t> ip,
                                   std::size_t wire_len, PacketRecord& rec) {
  if (ip.size() < 20 || (ip[0] >> 4) != 4) return std::nullopt;
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
  if (ihl < 20 || ihl > ip.size()) return std::nullopt;
  const std::uint16_t frag = be16(ip, 6);
  if ((frag & 0x1fff) != 0) return std::nullopt;  // non-first fragment
  std::size_t total = be16(ip, 2);
  if (total < ihl) total = wire_len;  // TSO frames carry 0 here
  rec.src_ip = IpAddress::v4(ip[12], ip[13], ip[14], ip[15]);
  rec.dst_ip = IpAddress::v4(ip[16], ip[17], ip[18], ip[19]);
  return IpLayer{ip[9], ihl, total};
}

std::optional<IpLayer> decode_ipv6(std::span<const std::uint8_t> ip,
                                   std::size_t wire_len, PacketRecord& rec) {
  if (ip.size() < 40 || (ip[0] >> 4) != 6) return std::nullopt;
  std::array<std::uint8_t, 16> addr{};
  std::copy_n(ip.begin() + 8, 16, addr.begin());
  rec.src_ip = IpAddress::v6(addr);
  std::copy_n(ip.begin() + 24, 16, addr.begin());
  rec.dst_ip = IpAddress::v6(addr);

  std::size_t total = 40 + static_cast<std::size_t>(be16(ip, 4));
  if (total == 40 && wire_len > 40) total = wire_len;  // jumbogram

  std::uint8_t nh = ip[6];
  std::size_t off = 40;
  int walked = 0;
  while (is_ipv6_ext_header(nh)) {
    if (++walked > max_ipv6_ext_headers) return std::nullopt;
    if (off + 8 > ip.size()) return std::nullopt;
    std::size_t len = 0;
    if (nh == 44) {
      if ((be16(ip, off + 2) & 0xfff8) != 0) return std::nullopt;
      len = 8;
    } else if (nh == 51) {
      len = (static_cast<std::size_t>(ip[off + 1]) + 2) * 4;
    } else {
      len = (static_cast<std::size_t>(ip[off + 1]) + 1) * 8;
    }
    nh = ip[off];
    off += len;
  }
  if (off > ip.size()) return std::nullopt;
  return IpLayer{nh, off, total};
}

}  // namespace

std::optional<PacketRecord> decode_frame(std::span<const std::uint8_t> frame,
                                         std::uint32_t orig_len,
                                         LinkType link) {
  std::size_t off = 0;
  int version = 0;
  if (link == LinkType::Ethernet) {
    if (frame.size() < ethernet_header_len) return std::nullopt;
    std::uint16_t ethertype = be16(frame, 12);
    off = ethernet_header_len;
    for (int tags = 0; tags < max_vlan_tags &&
                       (ethertype == 0x8100 || ethertype == 0x88a8 ||
                        ethertype == 0x9100);
         ++tags) {
      if (off + 4 > frame.size()) return std::nullopt;
      ethertype = be16(frame, off + 2);
      off += 4;
    }
    if (ethertype == 0x0800) {
      version = 4;
    } else if (ethertype == 0x86dd) {
      version = 6;
    } else {
      return std::nullopt;
    }
  } else {
    if (frame.empty()) return std::nullopt;
    version = frame[0] >> 4;
  }

  const auto ip = frame.subspan(off);
  const std::size_t wire_len =
      orig_len > off ? orig_len - off : ip.size();

  PacketRecord rec;
  std::optional<IpLayer> layer;
  if (version == 4) {
    layer = decode_ipv4(ip, wire_len, rec);
  } else if (version == 6) {
    layer = decode_ipv6(ip, wire_len, rec);
  }
  if (!layer) return std::nullopt;

  rec.ip_proto = layer->proto;
  std::size_t l4_len = 0;
  const std::size_t l4 = layer->header_len;
  if (layer->proto == 6) {
    if (l4 + 20 > ip.size()) return std::nullopt;
    l4_len = static_cast<std::size_t>(ip[l4 + 12] >> 4) * 4;
    if (l4_len < 20 || l4 + l4_len > ip.size()) return std::nullopt;
    rec.src_port = be16(ip, l4);
    rec.dst_port = be16(ip, l4 + 2);
    rec.tcp_flags = ip[l4 + 13];
  } else if (layer->proto == 17) {
    if (l4 + 8 > ip.size()) return std::nullopt;
    l4_len = 8;
    rec.src_port = be16(ip, l4);
    rec.dst_port = be16(ip, l4 + 2);
  }

  const std::size_t header_len = layer->header_len + l4_len;
  const std::size_t total = std::max(layer->total_len, header_len);
  rec.header_len = static_cast<std::uint32_t>(header_len);
  rec.payload_len = static_cast<std::uint32_t>(total - header_len);

  // Captured bytes past the headers, excluding link-layer padding.
  const std::size_t captured_ip = std::min(ip.size(), total);
  const std::size_t available =
      captured_ip > header_len ? captured_ip - header_len : 0;
  const std::size_t recorded = std::min<std::size_t>(available, rec.payload_len);
  rec.payload.assign(ip.begin() + static_cast<std::ptrdiff_t>(header_len),
                     ip.begin() + static_cast<std::ptrdiff_t>(header_len + recorded));
  rec.truncated = recorded < rec.payload_len;
  return rec;
}

Reader::Reader(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  data_.assign(std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
  parse_global_header();
}

Reader::Reader(std::vector<std::uint8_t> bytes) : data_(std::move(bytes)) {
  parse_global_header();
}

std::uint32_t Reader::u32(std::size_t off) const {
  std::uint32_t v;
  std::memcpy(&v, data_.data() + off, 4);
  if constexpr (std::endian::native == std::endian::big) v = bswap32(v);
  return meta_.swapped ? bswap32(v) : v;
}

std::uint16_t Reader::u16(std::size_t off) const {
  const std::uint16_t lo = data_[off];
  const std::uint16_t hi = data_[off + 1];
  return meta_.swapped ? static_cast<std::uint16_t>((lo << 8) | hi)
                       : static_cast<std::uint16_t>((hi << 8) | lo);
}

void Reader::parse_global_header() {
  if (data_.size() < 4) throw Error(Errc::BadMagic, "file too short for pcap magic");
  meta_.swapped = false;
  const std::uint32_t magic = u32(0);
  if (magic == magic_usec || magic == magic_nsec) {
    meta_.nanosecond = magic == magic_nsec;
  } else if (bswap32(magic) == magic_usec || bswap32(magic) == magic_nsec) {
    meta_.swapped = true;
    meta_.nanosecond = bswap32(magic) == magic_nsec;
  } else {
    throw Error(Errc::BadMagic, "not a pcap file");
  }
  if (data_.size() < global_header_len) {
    throw Error(Errc::TruncatedHeader, "pcap global header truncated");
  }
  (void)u16(4);  // version major/minor are not checked
  meta_.snaplen = u32(16);
  const std::uint32_t network = u32(20) & 0xffff;
  if (network == static_cast<std::uint32_t>(LinkType::Ethernet)) {
    meta_.link_type = LinkType::Ethernet;
  } else if (network == static_cast<std::uint32_t>(LinkType::RawIP)) {
    meta_.link_type = LinkType::RawIP;
  } else {
    throw Error(Errc::UnsupportedLinkType,
                "unsupported link type " + std::to_string(network));
  }
  pos_ = global_header_len;
}

std::optional<PacketRecord> Reader::next() {
  while (pos_ < data_.size()) {
    if (data_.size() - pos_ < record_header_len) {
      throw Error(Errc::TruncatedHeader, "record header cut at offset " +
                                             std::to_string(pos_));
    }
    const std::uint64_t ts_sec = u32(pos_);
    const std::uint64_t ts_frac = u32(pos_ + 4);
    const std::uint32_t incl_len = u32(pos_ + 8);
    std::uint32_t orig_len = u32(pos_ + 12);
    pos_ += record_header_len;
    if (incl_len > data_.size() - pos_) {
      throw Error(Errc::TruncatedHeader, "record body cut at offset " +
                                             std::to_string(pos_));
    }
    const std::span<const std::uint8_t> frame(data_.data() + pos_, incl_len);
    pos_ += incl_len;
    orig_len = std::max(orig_len, incl_len);

    auto rec = decode_frame(frame, orig_len, meta_.link_type);
    if (!rec) {
      ++meta_.frames_skipped;
      continue;
    }
    rec->ts_us = ts_sec * 1'000'000 + (meta_.nanosecond ? ts_frac / 1000 : ts_frac);
    ++meta_.packet_count;
    return rec;
  }
  return std::nullopt;
}

Trace read_pcap(const std::filesystem::path& path) {
  Reader reader(path);
  Trace trace;
  while (auto rec = reader.next()) trace.packets.push_back(std::move(*rec));
  trace.meta = reader.meta();
  return trace;
}

Trace read_pcap_bytes(std::vector<std::uint8_t> bytes) {
  Reader reader(std::move(bytes));
  Trace trace;
  while (auto rec = reader.next()) trace.packets.push_back(std::move(*rec));
  trace.meta = reader.meta();
  return trace;
}

// ---------------------------------------------------------------------------
// Writer

namespace {

void push16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t ipv4_checksum(std::span<const std::uint8_t> hdr) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < hdr.size(); i += 2) sum += be16(hdr, i);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace

std::pair<std::vector<std::uint8_t>, std::uint32_t> encode_frame(
    const PacketRecord& pkt, LinkType link) {
  const std::size_t ip_hdr = pkt.src_ip.is_v6() ? 40 : 20;
  if (pkt.header_len < ip_hdr) {
    throw Error(Errc::InvalidArgs, "header_len shorter than the IP header");
  }
  const std::size_t l4_len = pkt.header_len - ip_hdr;
  if (pkt.ip_proto == 6 && (l4_len < 20 || l4_len > 60 || l4_len % 4 != 0)) {
    throw Error(Errc::InvalidArgs, "TCP header length must be 20..60, x4");
  }
  if (pkt.ip_proto == 17 && l4_len != 8) {
    throw Error(Errc::InvalidArgs, "UDP header length must be 8");
  }
  if (pkt.ip_proto != 6 && pkt.ip_proto != 17 && l4_len != 0) {
    throw Error(Errc::InvalidArgs, "unexpected transport header length");
  }
  if (pkt.payload.size() > pkt.payload_len) {
    throw Error(Errc::InvalidArgs, "captured payload exceeds payload_len");
  }
  if (pkt.src_ip.family != pkt.dst_ip.family) {
    throw Error(Errc::InvalidArgs, "mixed address families");
  }

  std::vector<std::uint8_t> out;
  std::size_t link_len = 0;
  if (link == LinkType::Ethernet) {
    static constexpr std::uint8_t macs[12] = {0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 1};
    out.insert(out.end(), std::begin(macs), std::end(macs));
    push16(out, pkt.src_ip.is_v6() ? 0x86dd : 0x0800);
    link_len = ethernet_header_len;
  }

  const std::size_t ip_total = pkt.header_len + std::size_t{pkt.payload_len};
  if (!pkt.src_ip.is_v6()) {
    if (ip_total > 0xffff) throw Error(Errc::InvalidArgs, "IPv4 packet too long");
    const std::size_t start = out.size();
    out.push_back(0x45);
    out.push_back(0);
    push16(out, static_cast<std::uint16_t>(ip_total));
    push16(out, 0);       // id
    push16(out, 0x4000);  // DF
    out.push_back(64);
    out.push_back(pkt.ip_proto);
    push16(out, 0);
    out.insert(out.end(), pkt.src_ip.bytes.begin(), pkt.src_ip.bytes.begin() + 4);
    out.insert(out.end(), pkt.dst_ip.bytes.begin(), pkt.dst_ip.bytes.begin() + 4);
    const std::uint16_t csum =
        ipv4_checksum(std::span<const std::uint8_t>(out).subspan(start, 20));
    out[start + 10] = static_cast<std::uint8_t>(csum >> 8);
    out[start + 11] = static_cast<std::uint8_t>(csum);
  } else {
    if (ip_total - 40 > 0xffff) throw Error(Errc::InvalidArgs, "IPv6 payload too long");
    out.push_back(0x60);
    out.push_back(0);
    push16(out, 0);
    push16(out, static_cast<std::uint16_t>(ip_total - 40));
    out.push_back(pkt.ip_proto);
    out.push_back(64);
    out.insert(out.end(), pkt.src_ip.bytes.begin(), pkt.src_ip.bytes.end());
    out.insert(out.end(), pkt.dst_ip.bytes.begin(), pkt.dst_ip.bytes.end());
  }

  if (pkt.ip_proto == 6) {
    push16(out, pkt.src_port);
    push16(out, pkt.dst_port);
    push16(out, 0); push16(out, 1);  // seq
    push16(out, 0); push16(out, 0);  // ack
    out.push_back(static_cast<std::uint8_t>((l4_len / 4) << 4));
    out.push_back(pkt.tcp_flags);
    push16(out, 0xffff);  // window
    push16(out, 0);       // checksum (not computed)
    push16(out, 0);       // urgent
    out.insert(out.end(), l4_len - 20, 0x01);  // NOP options
  } else if (pkt.ip_proto == 17) {
    push16(out, pkt.src_port);
    push16(out, pkt.dst_port);
    push16(out, static_cast<std::uint16_t>(8 + pkt.payload_len));
    push16(out, 0);
  }
  out.insert(out.end(), pkt.payload.begin(), pkt.payload.end());
  return {std::move(out), static_cast<std::uint32_t>(link_len + ip_total)};
}

Writer::Writer(const std::filesystem::path& path, WriterOptions opts)
    : opts_(opts), file_(path, std::ios::binary | std::ios::trunc) {
  if (!file_) throw Error(Errc::Io, "cannot write " + path.string());
  put32(opts_.nanosecond ? magic_nsec : magic_usec);
  put16(2);
  put16(4);
  put32(0);
  put32(0);
  put32(opts_.snaplen);
  put32(static_cast<std::uint32_t>(opts_.link_type));
}

Writer::Writer(std::vector<std::uint8_t>& sink, WriterOptions opts)
    : opts_(opts), sink_(&sink) {
  put32(opts_.nanosecond ? magic_nsec : magic_usec);
  put16(2);
  put16(4);
  put32(0);
  put32(0);
  put32(opts_.snaplen);
  put32(static_cast<std::uint32_t>(opts_.link_type));
}

void Writer::emit(std::span<const std::uint8_t> bytes) {
  if (sink_) {
    sink_->insert(sink_->end(), bytes.begin(), bytes.end());
  } else {
    file_.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
  }
}

void Writer::put32(std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) {
    const int shift = opts_.swapped ? 24 - 8 * i : 8 * i;
    b[i] = static_cast<std::uint8_t>(v >> shift);
  }
  emit(b);
}

void Writer::put16(std::uint16_t v) {
  std::uint8_t b[2];
  b[0] = static_cast<std::uint8_t>(opts_.swapped ? v >> 8 : v);
  b[1] = static_cast<std::uint8_t>(opts_.swapped ? v : v >> 8);
  emit(b);
}

void Writer::write(const PacketRecord& pkt) {
  auto [frame, orig_len] = encode_frame(pkt, opts_.link_type);
  std::uint32_t incl = static_cast<std::uint32_t>(frame.size());
  if (incl > opts_.snaplen) incl = opts_.snaplen;
  const std::uint64_t sec = pkt.ts_us / 1'000'000;
  const std::uint64_t usec = pkt.ts_us % 1'000'000;
  put32(static_cast<std::uint32_t>(sec));
  put32(static_cast<std::uint32_t>(opts_.nanosecond ? usec * 1000 : usec));
  put32(incl);
  put32(orig_len);
  emit(std::span<const std::uint8_t>(frame.data(), incl));
}

void Writer::flush() {
  if (!sink_) file_.flush();
}

void write_pcap(const std::filesystem::path& path,
                std::span<const PacketRecord> packets, WriterOptions opts) {
  Writer writer(path, opts);
  for (const auto& pkt : packets) writer.write(pkt);
  writer.flush();
}

}  // namespace tadk::pcap
