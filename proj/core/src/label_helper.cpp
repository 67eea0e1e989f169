#include "tadk/label_helper.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "tadk/error.hpp"
#include "tadk/features.hpp"

namespace tadk::pipe {

std::vector<FlowRecord> collect_flows(std::span<const PacketRecord> packets, const flow::FlowConfig& cfg) {
  std::vector<FlowRecord> out;
  StreamConfig sc;
  sc.flow = cfg;
  sc.min_pkts = 0;
  for_each_flow(packets, sc, [&](const flow::Flow& f) {
    FlowRecord r;
    r.key = f.key.to_string();
    r.initiator = f.initiator_key();
    r.proto = std::string(flow::protocol_name(f.proto));
    const auto names = fx::flow_names(f);
    r.sni = names.sni;
    r.host = names.host;
    r.qname = names.qname;
    r.features = fx::extract(f).values;
    out.push_back(std::move(r));
  });
  return out;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

Matrix standardize(const std::vector<FlowRecord>& flows) {
  const std::size_t n = flows.size();
  const std::size_t d = fx::stat_features;
  Matrix x(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x[i][j] = flows[i].features.at(j);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i][j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x[i][j] - mean) * (x[i][j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i][j] = sd > 1e-12 ? (x[i][j] - mean) / sd : 0.0;
  }
  return x;
}

struct KMeansResult {
  std::vector<std::uint32_t> assign;
  Matrix centroids;
  double inertia = 0.0;
};

KMeansResult kmeans(const Matrix& x, std::uint32_t k, std::uint32_t max_iter, std::mt19937_64& rng) {
  const std::size_t n = x.size();
  KMeansResult r;

  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  r.centroids.push_back(x[first(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(x[i], r.centroids[0]);
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total <= 0) {
      pick = first(rng);
    } else {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        u -= d2[pick];
        if (u < 0) break;
      }
    }
    r.centroids.push_back(x[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x[i], r.centroids.back()));
  }

  r.assign.assign(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<double> own(n);
  for (std::uint32_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = sq_dist(x[i], r.centroids[0]);
      for (std::uint32_t c = 1; c < k; ++c) {
        const double dc = sq_dist(x[i], r.centroids[c]);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      own[i] = best_d;
      if (r.assign[i] != best) {
        r.assign[i] = best;
        changed = true;
      }
    }

    std::vector<std::size_t> sizes(k, 0);
    for (auto a : r.assign) ++sizes[a];
    // An empty cluster takes the point farthest from its centroid, as long
    // as that point is not alone and not sitting on its centroid.
    for (std::uint32_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[r.assign[i]] > 1 && own[i] > 0 && (far == n || own[i] > own[far])) far = i;
      }
      if (far == n) continue;
      --sizes[r.assign[far]];
      r.assign[far] = c;
      own[far] = 0;
      ++sizes[c];
      changed = true;
    }

    const std::size_t d = x.front().size();
    Matrix next(k, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) next[r.assign[i]][j] += x[i][j];
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        next[c] = r.centroids[c];
        continue;
      }
      for (auto& v : next[c]) v /= static_cast<double>(sizes[c]);
    }
    r.centroids = std::move(next);
    if (!changed) break;
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) r.inertia += sq_dist(x[i], r.centroids[r.assign[i]]);
  return r;
}

double silhouette(const Matrix& dist, const std::vector<std::uint32_t>& assign, std::uint32_t k) {
  const std::size_t n = assign.size();
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assign) ++sizes[a];
  if (std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }) < 2) return 0.0;
  double total = 0.0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) sum[assign[j]] += dist[i][j];
    const auto own = assign[i];
    if (sizes[own] <= 1) continue;
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::uint32_t c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

std::string most_common(const std::vector<std::string>& values, double* share = nullptr) {
  std::map<std::string, std::size_t> counts;
  std::size_t seen = 0;
  for (const auto& v : values) {
    if (v.empty()) continue;
    ++counts[v];
    ++seen;
  }
  std::string best = "-";
  std::size_t best_n = 0;
  for (const auto& [v, c] : counts) {
    if (c > best_n) {
      best = v;
      best_n = c;
    }
  }
  if (share != nullptr) *share = seen == 0 ? 0.0 : static_cast<double>(best_n) / static_cast<double>(seen);
  return best;
}

std::string cell(std::string s) {
  if (s.empty()) return "-";
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, '_');
  return s;
}

}  // namespace

ClusterReport label_helper(std::vector<FlowRecord> flows, const LabelParams& params) {
  if (params.k_min < 1 || params.k_max < params.k_min) {
    throw Error(Errc::InvalidArgs, "bad k range");
  }
  if (flows.size() < params.k_max) {
    throw Error(Errc::TooFewFlows, "need at least " + std::to_string(params.k_max) + " flows, got " +
                                       std::to_string(flows.size()));
  }
  for (const auto& f : flows) {
    if (f.features.size() < fx::stat_features) throw Error(Errc::SchemaMismatch, "flow record too short");
  }

  const Matrix x = standardize(flows);
  const std::size_t n = x.size();
  Matrix dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = std::sqrt(sq_dist(x[i], x[j]));
  }

  ClusterReport report;
  KMeansResult chosen;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::uint32_t k = params.k_min; k <= params.k_max; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32), k};
    std::mt19937_64 rng(seq);
    KMeansResult run = kmeans(x, k, params.max_iter, rng);
    for (std::uint32_t restart = 1; restart < params.restarts; ++restart) {
      KMeansResult again = kmeans(x, k, params.max_iter, rng);
      if (again.inertia < run.inertia) run = std::move(again);
    }
    const double score = silhouette(dist, run.assign, k);
    report.scores.emplace_back(k, score);
    if (score > best_score + 1e-12) {
      best_score = score;
      report.k = k;
      chosen = std::move(run);
    }
  }
  report.silhouette = best_score;

  for (std::uint32_t c = 0; c < report.k; ++c) {
    Cluster cl;
    cl.id = c;
    cl.centroid = chosen.centroids[c];
    std::vector<std::string> protos, snis, hosts, qnames;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen.assign[i] != c) continue;
      cl.members.push_back(i);
      protos.push_back(flows[i].proto);
      snis.push_back(flows[i].sni);
      hosts.push_back(flows[i].host);
      qnames.push_back(flows[i].qname);
    }
    cl.tip.size = cl.members.size();
    cl.tip.proto = most_common(protos, &cl.tip.proto_share);
    cl.tip.sni = most_common(snis);
    cl.tip.host = most_common(hosts);
    cl.tip.qname = most_common(qnames);
    report.clusters.push_back(std::move(cl));
  }
  report.flows = std::move(flows);
  return report;
}

std::string format_report_table(const ClusterReport& r) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "k=%u silhouette=%.4f flows=%zu\n", r.k, r.silhouette, r.flows.size());
  out << buf;
  out << "scores:";
  for (const auto& [k, s] : r.scores) {
    std::snprintf(buf, sizeof buf, " k%u=%.4f", k, s);
    out << buf;
  }
  out << "\n\n";
  std::snprintf(buf, sizeof buf, "%-8s %6s  %-9s %6s  %-24s %-24s %-24s\n", "cluster", "size", "proto", "share",
                "top sni", "top host", "top qname");
  out << buf;
  for (const auto& c : r.clusters) {
    std::snprintf(buf, sizeof buf, "%-8u %6zu  %-9s %5.0f%%  %-24s %-24s %-24s\n", c.id, c.tip.size,
                  c.tip.proto.c_str(), c.tip.proto_share * 100.0, c.tip.sni.c_str(), c.tip.host.c_str(),
                  c.tip.qname.c_str());
    out << buf;
  }
  return out.str();
}

void write_report(std::ostream& out, const ClusterReport& r) {
  out << "#tadk-clusters-1," << r.k << ',' << format_double(r.silhouette) << '\n';
  for (const auto& [k, s] : r.scores) out << "score," << k << ',' << format_double(s) << '\n';
  for (const auto& c : r.clusters) {
    out << "cluster," << c.id << ',' << c.tip.size << ',' << cell(c.tip.proto) << ','
        << format_double(c.tip.proto_share) << ',' << cell(c.tip.sni) << ',' << cell(c.tip.host) << ','
        << cell(c.tip.qname) << '\n';
  }
  for (const auto& c : r.clusters) {
    for (auto i : c.members) {
      const auto& f = r.flows[i];
      out << "member," << c.id << ',' << cell(f.key) << ',' << cell(f.initiator);
      for (double v : f.features) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

void write_report(const std::filesystem::path& path, const ClusterReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_report(out, report);
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T number(const std::string& s, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Errc::InvalidArgs, "report line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

std::string uncell(const std::string& s) { return s == "-" ? std::string() : s; }

}  // namespace

ClusterReport read_report(std::istream& in) {
  ClusterReport r;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c[0] == "#tadk-clusters-1") {
      if (c.size() != 3) throw Error(Errc::InvalidArgs, "malformed report header");
      r.k = number<std::uint32_t>(c[1], line_no);
      r.silhouette = number<double>(c[2], line_no);
      r.clusters.resize(r.k);
      for (std::uint32_t i = 0; i < r.k; ++i) r.clusters[i].id = i;
      header = true;
      continue;
    }
    if (!header) throw Error(Errc::InvalidArgs, "missing '#tadk-clusters-1' header");
    if (c[0] == "score" && c.size() == 3) {
      r.scores.emplace_back(number<std::uint32_t>(c[1], line_no), number<double>(c[2], line_no));
    } else if (c[0] == "cluster" && c.size() == 8) {
      const auto id = number<std::uint32_t>(c[1], line_no);
      if (id >= r.k) throw Error(Errc::InvalidArgs, "cluster id out of range on line " + std::to_string(line_no));
      auto& tip = r.clusters[id].tip;
      tip.size = number<std::size_t>(c[2], line_no);
      tip.proto = c[3];
      tip.proto_share = number<double>(c[4], line_no);
      tip.sni = c[5];
      tip.host = c[6];
      tip.qname = c[7];
    } else if (c[0] == "member" && c.size() == 4 + fx::flow_feature_count) {
      const auto id = number<std::uint32_t>(c[1], line_no);
      if (id >= r.k) throw Error(Errc::InvalidArgs, "cluster id out of range on line " + std::to_string(line_no));
      FlowRecord f;
      f.key = uncell(c[2]);
      f.initiator = uncell(c[3]);
      for (std::size_t j = 4; j < c.size(); ++j) f.features.push_back(number<double>(c[j], line_no));
      r.clusters[id].members.push_back(r.flows.size());
      r.flows.push_back(std::move(f));
    } else {
      throw Error(Errc::InvalidArgs, "unrecognized report line " + std::to_string(line_no));
    }
  }
  if (!header) throw Error(Errc::InvalidArgs, "empty cluster report");
  return r;
}

ClusterReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return read_report(in);
}

std::map<std::uint32_t, std::string> read_assignments(std::istream& in) {
  std::map<std::uint32_t, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidArgs, "assignment line " + std::to_string(line_no) + " is not cluster_id=label");
    }
    const auto id = number<std::uint32_t>(trim(line.substr(0, eq)), line_no);
    const auto label = trim(line.substr(eq + 1));
    if (label.empty()) throw Error(Errc::InvalidArgs, "empty label on line " + std::to_string(line_no));
    out[id] = label;
  }
  return out;
}

std::map<std::uint32_t, std::string> read_assignments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return read_assignments(in);
}

Dataset apply_labels(const ClusterReport& report, const std::map<std::uint32_t, std::string>& assignments) {
  for (const auto& c : report.clusters) {
    if (!c.members.empty() && !assignments.contains(c.id)) {
      throw Error(Errc::UnassignedCluster, "cluster " + std::to_string(c.id) + " has no label");
    }
  }
  Dataset ds = fx::make_flow_dataset();
  for (const auto& c : report.clusters) {
    if (c.members.empty()) continue;
    const auto& label = assignments.at(c.id);
    if (label == "discard") continue;
    for (auto i : c.members) ds.add_row(report.flows[i].key, label, report.flows[i].features);
  }
  return ds;
}

}  // namespace tadk::pipe
