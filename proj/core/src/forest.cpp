#include "tadk/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "tadk/error.hpp"

namespace tadk::rf {
namespace {

constexpr std::uint32_t kFormatVersion = 1;

double gini(std::span<const double> counts, double total) {
  if (total <= 0) return 0.0;
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += c * c;
  return 1.0 - sum_sq / (total * total);
}

struct Split {
  std::uint32_t feature = leaf_marker;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& ds, const std::vector<std::uint32_t>& y, std::size_t n_classes,
              const std::vector<std::uint32_t>& usable, const TrainParams& params, std::uint32_t mtry,
              std::uint64_t tree_seed)
      : ds_(ds), y_(y), n_classes_(n_classes), usable_(usable), params_(params), mtry_(mtry) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(tree_seed)};
    rng_.seed(seq);
  }

  Tree build(std::vector<std::uint32_t>& in_bag) {
    const std::size_t n = ds_.rows();
    samples_.clear();
    in_bag.assign(n, 0);
    if (params_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        const auto s = static_cast<std::uint32_t>(pick(rng_));
        samples_.push_back(s);
        in_bag[s] = 1;
      }
    } else {
      for (std::uint32_t i = 0; i < n; ++i) samples_.push_back(i);
      std::fill(in_bag.begin(), in_bag.end(), 1);
    }
    tree_ = Tree{};
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  std::vector<double> class_counts(std::size_t begin, std::size_t end) const {
    std::vector<double> counts(n_classes_, 0.0);
    for (std::size_t i = begin; i < end; ++i) counts[y_[samples_[i]]] += 1.0;
    return counts;
  }

  std::uint32_t grow(std::size_t begin, std::size_t end, std::uint32_t depth) {
    const auto id = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[id].counts = class_counts(begin, end);
    const auto& counts = tree_.nodes[id].counts;
    const double total = static_cast<double>(end - begin);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
    if (pure || depth >= params_.max_depth || end - begin < 2 * std::size_t{params_.min_leaf}) return id;

    const Split split = best_split(begin, end, counts, total);
    if (split.feature == leaf_marker) return id;

    const auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                           samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                           [&](std::uint32_t s) {
                                             return ds_.row(s)[split.feature] <= split.threshold;
                                           }) -
                     samples_.begin();
    const auto left = grow(begin, static_cast<std::size_t>(mid), depth + 1);
    const auto right = grow(static_cast<std::size_t>(mid), end, depth + 1);
    Node& node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  // Examines features in random order until `mtry` of them vary inside the
  // node, so a node never turns into a leaf only because the draw hit
  // locally constant columns.
  Split best_split(std::size_t begin, std::size_t end, const std::vector<double>& counts,
                   double total) {
    Split best;
    const double parent = gini(counts, total) * total;
    std::vector<std::uint32_t> order = usable_;
    std::vector<std::pair<double, std::uint32_t>> column(end - begin);
    std::vector<double> left(n_classes_);
    std::vector<double> right(n_classes_);
    std::uint32_t visited = 0;
    for (std::size_t k = 0; k < order.size() && visited < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, order.size() - 1);
      std::swap(order[k], order[pick(rng_)]);
      const std::uint32_t f = order[k];

      for (std::size_t i = begin; i < end; ++i) {
        const auto s = samples_[i];
        column[i - begin] = {ds_.row(s)[f], y_[s]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++visited;

      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      const std::size_t m = column.size();
      for (std::size_t i = 0; i + 1 < m; ++i) {
        left[column[i].second] += 1.0;
        right[column[i].second] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(m - i - 1);
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        const double gain = parent - gini(left, nl) * nl - gini(right, nr) * nr;
        if (gain > best.gain + 1e-12) {
          const double a = column[i].first;
          const double b = column[i + 1].first;
          double t = a + (b - a) / 2.0;
          if (!(t >= a && t < b)) t = a;
          best = {f, t, gain};
        }
      }
    }
    return best;
  }

  const Dataset& ds_;
  const std::vector<std::uint32_t>& y_;
  std::size_t n_classes_;
  const std::vector<std::uint32_t>& usable_;
  const TrainParams& params_;
  std::uint32_t mtry_;
  std::mt19937_64 rng_;
  std::vector<std::uint32_t> samples_;
  Tree tree_;
};

std::vector<double> leaf_probs(const Node& leaf) {
  std::vector<double> p = leaf.counts;
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace

std::uint32_t Tree::leaf_for(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return i;
}

Prediction Model::predict(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw Error(Errc::SchemaMismatch, "feature vector has " + std::to_string(x.size()) +
                                          " values, model expects " + std::to_string(n_features));
  }
  Prediction out;
  out.probs.assign(classes.size(), 0.0);
  for (const auto& tree : trees) {
    const Node& leaf = tree.nodes[tree.leaf_for(x)];
    const double total = std::accumulate(leaf.counts.begin(), leaf.counts.end(), 0.0);
    for (std::size_t c = 0; c < classes.size(); ++c) out.probs[c] += leaf.counts[c] / total;
  }
  const double n = static_cast<double>(trees.size());
  for (auto& p : out.probs) p /= n;
  for (std::size_t c = 1; c < out.probs.size(); ++c) {
    if (out.probs[c] > out.probs[out.cls]) out.cls = static_cast<std::uint32_t>(c);
  }
  return out;
}

Model train_subset(const Dataset& ds, std::span<const std::uint32_t> features,
                   const TrainParams& params) {
  if (params.n_trees == 0 || params.min_leaf == 0) {
    throw Error(Errc::InvalidArgs, "n_trees and min_leaf must be positive");
  }
  std::map<std::string, std::size_t> per_class;
  for (const auto& label : ds.labels) {
    if (label.empty()) throw Error(Errc::InvalidArgs, "training rows must be labeled");
    ++per_class[label];
  }
  if (per_class.size() < 2) {
    throw Error(Errc::SingleClass, "training needs at least two classes, got " +
                                       std::to_string(per_class.size()));
  }
  for (const auto& [label, count] : per_class) {
    if (count < params.min_rows_per_class) {
      throw Error(Errc::TooFewSamples, "class '" + label + "' has " + std::to_string(count) +
                                           " rows, need " +
                                           std::to_string(params.min_rows_per_class));
    }
  }
  for (auto f : features) {
    if (f >= ds.width()) throw Error(Errc::InvalidArgs, "feature id out of range");
  }

  Model model;
  model.schema_version = ds.schema_version;
  model.n_features = static_cast<std::uint32_t>(ds.width());
  for (const auto& [label, count] : per_class) model.classes.push_back(label);
  model.kept.assign(features.begin(), features.end());
  std::sort(model.kept.begin(), model.kept.end());
  model.kept.erase(std::unique(model.kept.begin(), model.kept.end()), model.kept.end());
  model.meta = {params.seed, params.n_trees, params.max_depth, params.min_leaf, 0.0};

  std::vector<std::uint32_t> y(ds.rows());
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    y[i] = static_cast<std::uint32_t>(
        std::lower_bound(model.classes.begin(), model.classes.end(), ds.labels[i]) -
        model.classes.begin());
  }
  std::vector<std::uint32_t> usable;
  for (auto f : model.kept) {
    for (std::size_t i = 1; i < ds.rows(); ++i) {
      if (ds.row(i)[f] != ds.row(0)[f]) {
        usable.push_back(f);
        break;
      }
    }
  }
  const std::uint32_t mtry =
      params.mtry != 0 ? params.mtry
                       : std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::sqrt(
                                                        static_cast<double>(usable.size()))));

  const std::size_t n_classes = model.classes.size();
  model.trees.resize(params.n_trees);
  std::vector<std::vector<std::uint32_t>> in_bag(params.n_trees);
  auto work = [&](std::uint32_t first, std::uint32_t stride) {
    for (std::uint32_t t = first; t < params.n_trees; t += stride) {
      TreeBuilder builder(ds, y, n_classes, usable, params, mtry, t);
      model.trees[t] = builder.build(in_bag[t]);
    }
  };
  const std::uint32_t jobs = std::clamp<std::uint32_t>(params.jobs, 1, params.n_trees);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::uint32_t j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    for (auto& th : pool) th.join();
  }

  // Out-of-bag accuracy: each row is voted on by the trees that never saw it.
  std::size_t scored = 0;
  std::size_t correct = 0;
  std::vector<double> votes(n_classes);
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    std::fill(votes.begin(), votes.end(), 0.0);
    bool any = false;
    for (std::uint32_t t = 0; t < params.n_trees; ++t) {
      if (params.bootstrap && in_bag[t][i]) continue;
      const auto p = leaf_probs(model.trees[t].nodes[model.trees[t].leaf_for(ds.row(i))]);
      for (std::size_t c = 0; c < n_classes; ++c) votes[c] += p[c];
      any = true;
    }
    if (!any) continue;
    ++scored;
    const auto best = static_cast<std::uint32_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    if (best == y[i]) ++correct;
  }
  model.meta.oob_accuracy = scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
  return model;
}

Model train(const Dataset& ds, const TrainParams& params) {
  std::vector<std::uint32_t> all(ds.width());
  std::iota(all.begin(), all.end(), 0u);
  return train_subset(ds, all, params);
}

std::vector<double> importance(const Model& model) {
  std::vector<double> total(model.n_features, 0.0);
  std::vector<double> per_tree(model.n_features);
  for (const auto& tree : model.trees) {
    std::fill(per_tree.begin(), per_tree.end(), 0.0);
    double sum = 0.0;
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      auto weighted = [](const Node& n) {
        const double w = std::accumulate(n.counts.begin(), n.counts.end(), 0.0);
        return gini(n.counts, w) * w;
      };
      const double gain =
          weighted(node) - weighted(tree.nodes[node.left]) - weighted(tree.nodes[node.right]);
      per_tree[node.feature] += gain;
      sum += gain;
    }
    if (sum <= 0) continue;
    for (std::size_t f = 0; f < per_tree.size(); ++f) total[f] += per_tree[f] / sum;
  }
  const double grand = std::accumulate(total.begin(), total.end(), 0.0);
  if (grand > 0) {
    for (auto& v : total) v /= grand;
  }
  return total;
}

Model reduce_features(const Model& model, const Dataset& ds, double threshold, std::uint32_t jobs) {
  if (threshold <= 0 || model.kept.empty()) return model;
  const auto imp = importance(model);
  const double cut = threshold / static_cast<double>(model.kept.size());
  std::vector<std::uint32_t> keep;
  for (auto f : model.kept) {
    if (imp[f] >= cut) keep.push_back(f);
  }
  if (keep.empty() || keep.size() == model.kept.size()) return model;

  TrainParams params;
  params.seed = model.meta.seed;
  params.n_trees = model.meta.n_trees;
  params.max_depth = model.meta.max_depth;
  params.min_leaf = model.meta.min_leaf;
  params.jobs = jobs;
  Model reduced = train_subset(ds, keep, params);
  if (reduced.meta.oob_accuracy + 0.01 < model.meta.oob_accuracy) return model;
  return reduced;
}

std::vector<std::size_t> encode_labels(const Model& model, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), label);
    out.push_back(it != model.classes.end() && *it == label
                      ? static_cast<std::size_t>(it - model.classes.begin())
                      : static_cast<std::size_t>(-1));
  }
  return out;
}

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{b_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw Error(Errc::CorruptTree, "model file is truncated");
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void corrupt(const std::string& what) { throw Error(Errc::CorruptTree, "corrupt model: " + what); }

}  // namespace

std::vector<std::uint8_t> dump_model(const Model& model) {
  Writer w;
  w.out = {'T', 'R', 'F', 'M'};
  w.u32(kFormatVersion);
  w.str(model.schema_version);
  w.u32(model.n_features);
  w.u32(static_cast<std::uint32_t>(model.classes.size()));
  for (const auto& c : model.classes) w.str(c);
  w.u32(static_cast<std::uint32_t>(model.kept.size()));
  for (auto f : model.kept) w.u32(f);
  w.u64(model.meta.seed);
  w.u32(model.meta.n_trees);
  w.u32(model.meta.max_depth);
  w.u32(model.meta.min_leaf);
  w.f64(model.meta.oob_accuracy);
  w.u32(static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& n : tree.nodes) {
      w.u32(n.feature);
      w.f64(n.threshold);
      w.u32(n.left);
      w.u32(n.right);
      for (double c : n.counts) w.f64(c);
    }
  }
  return std::move(w.out);
}

Model load_model(std::span<const std::uint8_t> bytes, std::string_view schema) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "TRFM", 4) != 0) {
    throw Error(Errc::BadMagic, "not a TRFM model file");
  }
  Reader r(bytes.subspan(4));
  if (const auto v = r.u32(); v != kFormatVersion) {
    throw Error(Errc::VersionMismatch, "unsupported model format version " + std::to_string(v));
  }
  Model m;
  m.schema_version = r.str();
  if (!schema.empty() && m.schema_version != schema) {
    throw Error(Errc::VersionMismatch, "model schema " + m.schema_version + " does not match " +
                                           std::string(schema));
  }
  m.n_features = r.u32();
  const auto n_classes = r.u32();
  if (n_classes < 2 || n_classes > r.remaining()) corrupt("bad class count");
  for (std::uint32_t i = 0; i < n_classes; ++i) m.classes.push_back(r.str());
  const auto n_kept = r.u32();
  if (n_kept > m.n_features) corrupt("reduction mask larger than the schema");
  for (std::uint32_t i = 0; i < n_kept; ++i) {
    m.kept.push_back(r.u32());
    if (m.kept.back() >= m.n_features || (i > 0 && m.kept[i] <= m.kept[i - 1])) {
      corrupt("reduction mask is not sorted or out of range");
    }
  }
  m.meta.seed = r.u64();
  m.meta.n_trees = r.u32();
  m.meta.max_depth = r.u32();
  m.meta.min_leaf = r.u32();
  m.meta.oob_accuracy = r.f64();
  const auto n_trees = r.u32();
  if (n_trees == 0) corrupt("no trees");
  const std::size_t node_bytes = 4 + 8 + 4 + 4 + 8 * std::size_t{n_classes};
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    Tree tree;
    const auto n_nodes = r.u32();
    if (n_nodes == 0) corrupt("empty tree");
    r.need(n_nodes * node_bytes);
    tree.nodes.resize(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      Node& n = tree.nodes[i];
      n.feature = r.u32();
      n.threshold = r.f64();
      n.left = r.u32();
      n.right = r.u32();
      n.counts.resize(n_classes);
      double sum = 0.0;
      for (auto& c : n.counts) {
        c = r.f64();
        if (!(c >= 0) || !std::isfinite(c)) corrupt("negative class count");
        sum += c;
      }
      if (sum <= 0) corrupt("node with no samples");
      if (!n.is_leaf()) {
        if (!std::binary_search(m.kept.begin(), m.kept.end(), n.feature)) {
          corrupt("split on a feature outside the reduction mask");
        }
        if (n.left <= i || n.right <= i || n.left >= n_nodes || n.right >= n_nodes || n.left == n.right) {
          corrupt("bad child index");
        }
        if (std::isnan(n.threshold)) corrupt("NaN threshold");
      }
    }
    // Every non-root node must have exactly one parent.
    std::vector<std::uint8_t> parents(n_nodes, 0);
    for (const auto& n : tree.nodes) {
      if (n.is_leaf()) continue;
      if (++parents[n.left] > 1 || ++parents[n.right] > 1) corrupt("node shared by two parents");
    }
    for (std::uint32_t i = 1; i < n_nodes; ++i) {
      if (parents[i] != 1) corrupt("unreachable node");
    }
    m.trees.push_back(std::move(tree));
  }
  if (r.remaining() != 0) corrupt("trailing bytes");
  return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  const auto bytes = dump_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path, std::string_view schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return load_model(std::span<const std::uint8_t>(bytes), schema);
}

}  // namespace tadk::rf
