#include "tadk/packet.hpp"

#include <arpa/inet.h>

#include <cstdio>

#include "tadk/error.hpp"

namespace tadk {

IpAddress IpAddress::v4(std::uint8_t a, std::uint8_t b, std::uint8_t c,
                        std::uint8_t d) {
  IpAddress ip;
  ip.family = 4;
  ip.bytes[0] = a;
  ip.bytes[1] = b;
  ip.bytes[2] = c;
  ip.bytes[3] = d;
  return ip;
}

IpAddress IpAddress::v4(std::uint32_t host_order) {
  return v4(static_cast<std::uint8_t>(host_order >> 24),
            static_cast<std::uint8_t>(host_order >> 16),
            static_cast<std::uint8_t>(host_order >> 8),
            static_cast<std::uint8_t>(host_order));
}

IpAddress IpAddress::v6(const std::array<std::uint8_t, 16>& raw) {
  IpAddress ip;
  ip.family = 6;
  ip.bytes = raw;
  return ip;
}

std::string IpAddress::to_string() const {
  char buf[64];
  if (!is_v6()) {
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", bytes[0], bytes[1],
                  bytes[2], bytes[3]);
    return buf;
  }
  ::inet_ntop(AF_INET6, bytes.data(), buf, sizeof buf);
  return buf;
}

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::Io: return "Io";
    case Errc::InvalidArgs: return "InvalidArgs";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedHeader: return "TruncatedHeader";
    case Errc::UnsupportedLinkType: return "UnsupportedLinkType";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::EmptyFlow: return "EmptyFlow";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::DuplicateToken: return "DuplicateToken";
    case Errc::EmptyPattern: return "EmptyPattern";
    case Errc::StateBlowup: return "StateBlowup";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::SingleClass: return "SingleClass";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptTree: return "CorruptTree";
    case Errc::TooFewFlows: return "TooFewFlows";
    case Errc::UnassignedCluster: return "UnassignedCluster";
  }
  return "Unknown";
}

}  // namespace tadk
