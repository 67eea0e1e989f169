#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadk/dataset.hpp"
#include "tadk/flow.hpp"

namespace tadk::fx {

enum class Group : std::uint8_t { Stat, Hist, Dns, Http, Tls };

std::string_view group_name(Group g) noexcept;

struct FeatureInfo {
  std::uint32_t id;
  std::string name;
  Group group;
  std::string unit;
};

struct FeatureSchema {
  std::string version;
  std::vector<FeatureInfo> features;

  std::size_t size() const noexcept { return features.size(); }
  std::vector<std::string> names() const;
  /// First id and count of a group.
  std::pair<std::uint32_t, std::uint32_t> range(Group g) const;
};

inline constexpr std::uint32_t stat_features = 30;
inline constexpr std::uint32_t hist_features = 48;
inline constexpr std::uint32_t dns_features = 6;
inline constexpr std::uint32_t http_features = 10;
inline constexpr std::uint32_t tls_features = 6;
inline constexpr std::uint32_t flow_feature_count =
    stat_features + hist_features + dns_features + http_features + tls_features;

inline constexpr std::uint32_t payload_bin_width = 64;
inline constexpr std::uint32_t header_bin_width = 4;
inline constexpr std::uint32_t iat_bin_width_us = 4096;

/// The frozen 100-feature flow schema ("tadk-flow-v1").
const FeatureSchema& flow_schema();

struct FeatureVector {
  std::vector<double> values;
  flow::FlowKey key;
  flow::ProtocolLabel proto = flow::ProtocolLabel::Unknown;
  bool malformed = false;  // a protocol parser rejected the payload
};

/// A protocol group's values plus a flag when the parser gave up (values
/// are then all zero).
struct GroupResult {
  std::vector<double> values;
  bool malformed = false;
};

/// Statistical and histogram groups (78 values). Throws EmptyFlow.
std::vector<double> extract_stat(const flow::Flow& flow);
GroupResult extract_dns(const flow::Flow& flow);
GroupResult extract_http(const flow::Flow& flow);
GroupResult extract_tls(const flow::Flow& flow);

/// Full vector in flow_schema() order; groups for other protocols are zero.
FeatureVector extract(const flow::Flow& flow);

/// Shannon entropy in bits per byte.
double shannon_entropy(std::string_view text);

/// Hostname-like strings seen in the flow's early payload.
struct FlowNames {
  std::string sni;
  std::string host;
  std::string qname;
};
FlowNames flow_names(const flow::Flow& flow);

/// Creates an empty Dataset carrying the flow schema.
Dataset make_flow_dataset();

}  // namespace tadk::fx
