#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tadk {

enum class Errc {
  Io,
  InvalidArgs,
  // packet_io
  BadMagic,
  TruncatedHeader,
  UnsupportedLinkType,
  InvalidSpec,
  // featurex
  EmptyFlow,
  SchemaMismatch,
  // dfalex
  SyntaxError,
  DuplicateToken,
  EmptyPattern,
  StateBlowup,
  // forest
  TooFewSamples,
  SingleClass,
  VersionMismatch,
  CorruptTree,
  // pipelines
  TooFewFlows,
  UnassignedCluster,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tadk
