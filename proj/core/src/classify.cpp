#include "tadk/classify.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <thread>
#include <unordered_set>

#include "tadk/error.hpp"
#include "tadk/features.hpp"

namespace tadk::pipe {

flow::TableStats for_each_flow(std::span<const PacketRecord> packets, const StreamConfig& cfg,
                               const std::function<void(const flow::Flow&)>& on_flow) {
  flow::FlowTable table(cfg.flow);
  std::unordered_set<std::uint64_t> fired;
  auto evicted = [&](const std::vector<flow::Evicted>& gone) {
    for (const auto& e : gone) {
      if (fired.erase(e.flow.id) == 0) on_flow(e.flow);
    }
  };
  for (const auto& pkt : packets) {
    const auto ev = table.insert(pkt);
    evicted(ev.evicted);
    if (cfg.min_pkts > 0 && ev.flow != nullptr && ev.flow->packets.size() >= cfg.min_pkts &&
        !fired.contains(ev.flow->id)) {
      fired.insert(ev.flow->id);
      on_flow(*ev.flow);
    }
  }
  evicted(table.flush());
  return table.stats();
}

namespace {

void add_stats(flow::TableStats& into, const flow::TableStats& s) {
  into.packets_in += s.packets_in;
  into.packets_skipped += s.packets_skipped;
  into.flows_created += s.flows_created;
  for (std::size_t i = 0; i < into.evictions.size(); ++i) into.evictions[i] += s.evictions[i];
}

ClassifyOutput classify_shard(std::span<const PacketRecord> packets, const rf::Model& model,
                              const StreamConfig& cfg) {
  ClassifyOutput out;
  out.stats = for_each_flow(packets, cfg, [&](const flow::Flow& f) {
    ClassifyResult r;
    r.key = f.key.to_string();
    r.initiator = f.initiator_key();
    r.trigger_ts_us = f.last_ts();
    r.packets = static_cast<std::uint32_t>(f.packets.size());
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto fv = fx::extract(f);
      const auto pred = model.predict(fv.values);
      const auto stop = std::chrono::steady_clock::now();
      r.latency_us = std::chrono::duration<double, std::micro>(stop - start).count();
      r.label = model.classes[pred.cls];
      r.confidence = pred.confidence();
    } catch (const Error& e) {
      r.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
    out.results.push_back(std::move(r));
  });
  return out;
}

}  // namespace

ClassifyOutput classify_packets(std::span<const PacketRecord> packets, const rf::Model& model,
                                const StreamConfig& cfg, std::uint32_t jobs) {
  if (model.n_features != fx::flow_feature_count) {
    throw Error(Errc::SchemaMismatch, "model expects " + std::to_string(model.n_features) +
                                          " features, flow schema has " +
                                          std::to_string(fx::flow_feature_count));
  }
  ClassifyOutput out;
  if (jobs <= 1) {
    out = classify_shard(packets, model, cfg);
  } else {
    std::vector<std::vector<PacketRecord>> shards(jobs);
    const flow::FlowKeyHash hash;
    for (const auto& pkt : packets) shards[hash(flow::FlowKey::from_packet(pkt)) % jobs].push_back(pkt);
    std::vector<ClassifyOutput> parts(jobs);
    std::vector<std::thread> pool;
    for (std::uint32_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] { parts[j] = classify_shard(shards[j], model, cfg); });
    }
    for (auto& t : pool) t.join();
    for (auto& p : parts) {
      add_stats(out.stats, p.stats);
      std::move(p.results.begin(), p.results.end(), std::back_inserter(out.results));
    }
  }
  std::stable_sort(out.results.begin(), out.results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.trigger_ts_us, a.key) < std::tie(b.trigger_ts_us, b.key);
  });
  return out;
}

Dataset extract_dataset(std::span<const PacketRecord> packets, const StreamConfig& cfg,
                        const std::map<std::string, std::string>& labels,
                        const std::string& default_label) {
  Dataset ds = fx::make_flow_dataset();
  for_each_flow(packets, cfg, [&](const flow::Flow& f) {
    const auto fv = fx::extract(f);
    const auto it = labels.find(f.initiator_key());
    ds.add_row(f.key.to_string(), it != labels.end() ? it->second : default_label, fv.values);
  });
  return ds;
}

std::string format_classify_row(const ClassifyResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f,%.3f", r.confidence, r.latency_us);
  return r.key + "," + (r.error.empty() ? r.label : "error") + "," + buf;
}

std::string format_classify_text(const ClassifyResult& r) {
  if (!r.error.empty()) return r.key + "  error: " + r.error;
  char buf[96];
  std::snprintf(buf, sizeof buf, "  %-12s conf %.3f  %8.2f us  (%u pkts)", r.label.c_str(), r.confidence,
                r.latency_us, r.packets);
  return r.key + buf;
}

}  // namespace tadk::pipe
