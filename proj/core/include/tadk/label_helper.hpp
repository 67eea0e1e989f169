#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tadk/classify.hpp"
#include "tadk/dataset.hpp"

namespace tadk::pipe {

/// One finished flow as the labeling helper sees it.
struct FlowRecord {
  std::string key;
  std::string initiator;
  std::string proto;
  std::string sni;
  std::string host;
  std::string qname;
  std::vector<double> features;  // full flow schema
};

/// Flows in eviction order with features taken when each flow left the
/// table (no early trigger).
std::vector<FlowRecord> collect_flows(std::span<const PacketRecord> packets,
                                      const flow::FlowConfig& cfg = {});

struct LabelParams {
  std::uint32_t k_min = 2;
  std::uint32_t k_max = 10;
  std::uint32_t max_iter = 100;
  std::uint32_t restarts = 5;  // k-means++ runs per k; the lowest inertia wins
  std::uint64_t seed = 42;
};

struct ClusterTip {
  std::string proto;  // dominant protocol
  double proto_share = 0.0;
  std::string sni;    // most frequent non-empty value, "-" when none
  std::string host;
  std::string qname;
  std::size_t size = 0;
};

struct Cluster {
  std::uint32_t id = 0;
  std::vector<std::size_t> members;  // indices into ClusterReport::flows
  std::vector<double> centroid;      // standardized stat space
  ClusterTip tip;
};

struct ClusterReport {
  std::uint32_t k = 0;
  double silhouette = 0.0;
  std::vector<std::pair<std::uint32_t, double>> scores;  // (k, silhouette)
  std::vector<Cluster> clusters;
  std::vector<FlowRecord> flows;
};

/// k-means++ on z-scored stat features for every k in
/// [k_min, k_max]; keeps the k with the best silhouette (smallest k on a
/// tie). Throws TooFewFlows when there are fewer flows than k_max.
ClusterReport label_helper(std::vector<FlowRecord> flows, const LabelParams& params = {});

/// Human-readable summary.
std::string format_report_table(const ClusterReport& report);

/// Machine rows:
///   #tadk-clusters-1,<k>,<silhouette>
///   score,<k>,<silhouette>
///   cluster,<id>,<size>,<proto>,<proto_share>,<sni>,<host>,<qname>
///   member,<cluster id>,<flow key>,<initiator>,<feature values...>
void write_report(std::ostream& out, const ClusterReport& report);
void write_report(const std::filesystem::path& path, const ClusterReport& report);
ClusterReport read_report(std::istream& in);
ClusterReport read_report(const std::filesystem::path& path);

/// Parses "cluster_id=label" lines ('#' comments and blank lines ignored).
std::map<std::uint32_t, std::string> read_assignments(std::istream& in);
std::map<std::uint32_t, std::string> read_assignments(const std::filesystem::path& path);

/// Flow dataset of every member of a non-discarded cluster, labeled by its
/// cluster's assignment. Throws UnassignedCluster.
Dataset apply_labels(const ClusterReport& report, const std::map<std::uint32_t, std::string>& assignments);

}  // namespace tadk::pipe
