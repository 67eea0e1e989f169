#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tadk/dataset.hpp"
#include "tadk/flow.hpp"
#include "tadk/forest.hpp"

namespace tadk::pipe {

struct StreamConfig {
  flow::FlowConfig flow;
  std::uint32_t min_pkts = 8;  // early trigger; 0 waits for eviction
};

/// Runs packets through a flow table and calls `on_flow` exactly once per
/// flow: when it first holds min_pkts packets, or when it leaves the table
/// if that comes first. Returns the table statistics after the final flush.
flow::TableStats for_each_flow(std::span<const PacketRecord> packets, const StreamConfig& cfg,
                               const std::function<void(const flow::Flow&)>& on_flow);

struct ClassifyResult {
  std::string key;        // canonical flow key
  std::string initiator;  // "ip:port" of the side that sent the first packet
  std::string label;      // empty when the flow could not be classified
  double confidence = 0.0;
  double latency_us = 0.0;  // extract + predict
  std::uint64_t trigger_ts_us = 0;
  std::uint32_t packets = 0;  // packets seen when classified
  std::string error;
};

struct ClassifyOutput {
  std::vector<ClassifyResult> results;  // ordered by trigger time, then key
  flow::TableStats stats;               // summed over shards
};

/// Classifies each flow once. With jobs > 1 packets are sharded by flow
/// key over independent tables; per-flow errors are reported in the
/// result and do not stop the stream.
ClassifyOutput classify_packets(std::span<const PacketRecord> packets, const rf::Model& model,
                                const StreamConfig& cfg, std::uint32_t jobs = 1);

/// Feature rows taken at the same moment classification would run.
/// `labels` maps initiator "ip:port" to a label; unmapped flows get
/// `default_label`.
Dataset extract_dataset(std::span<const PacketRecord> packets, const StreamConfig& cfg,
                        const std::map<std::string, std::string>& labels = {},
                        const std::string& default_label = {});

/// "key,label,confidence,latency_us" (rows) or an aligned line (text).
std::string format_classify_row(const ClassifyResult& r);
std::string format_classify_text(const ClassifyResult& r);

}  // namespace tadk::pipe
