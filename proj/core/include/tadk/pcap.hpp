#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "tadk/packet.hpp"

namespace tadk::pcap {

inline constexpr std::uint32_t magic_usec = 0xa1b2c3d4;
inline constexpr std::uint32_t magic_nsec = 0xa1b23c4d;

/// Streaming reader for classic libpcap files.
///
/// The global header is validated on construction (BadMagic,
/// TruncatedHeader, UnsupportedLinkType). Each call to next() decodes frames
/// until it finds an IP packet; frames that are not IPv4/IPv6 or whose
/// headers cannot be decoded are skipped and counted in
/// meta().frames_skipped. A record header or body cut short by end of file
/// raises TruncatedHeader.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);
  explicit Reader(std::vector<std::uint8_t> bytes);

  std::optional<PacketRecord> next();
  const TraceMeta& meta() const noexcept { return meta_; }

 private:
  void parse_global_header();
  std::uint32_t u32(std::size_t off) const;
  std::uint16_t u16(std::size_t off) const;

  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
  TraceMeta meta_;
};

struct Trace {
  TraceMeta meta;
  std::vector<PacketRecord> packets;
};

Trace read_pcap(const std::filesystem::path& path);
Trace read_pcap_bytes(std::vector<std::uint8_t> bytes);

/// Decodes one frame of the given link type. Returns nullopt for non-IP or
/// malformed frames. `orig_len` is the on-the-wire frame length.
std::optional<PacketRecord> decode_frame(std::span<const std::uint8_t> frame,
                                         std::uint32_t orig_len,
                                         LinkType link);

struct WriterOptions {
  LinkType link_type = LinkType::Ethernet;
  std::uint32_t snaplen = 65535;
  bool swapped = false;     // write the byte-swapped magic and fields
  bool nanosecond = false;  // 0xa1b23c4d timestamps
};

/// Writes PacketRecords as synthesized Ethernet (or raw IP) frames such that
/// reading them back reproduces every PacketRecord field.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path, WriterOptions opts = {});
  explicit Writer(std::vector<std::uint8_t>& sink, WriterOptions opts = {});

  void write(const PacketRecord& pkt);
  void flush();

 private:
  void emit(std::span<const std::uint8_t> bytes);
  void put32(std::uint32_t v);
  void put16(std::uint16_t v);

  WriterOptions opts_;
  std::ofstream file_;
  std::vector<std::uint8_t>* sink_ = nullptr;
};

/// Serializes a PacketRecord into an on-the-wire frame (headers + captured
/// payload). Returns the frame and its original length.
std::pair<std::vector<std::uint8_t>, std::uint32_t> encode_frame(
    const PacketRecord& pkt, LinkType link);

void write_pcap(const std::filesystem::path& path,
                std::span<const PacketRecord> packets,
                WriterOptions opts = {});

}  // namespace tadk::pcap
