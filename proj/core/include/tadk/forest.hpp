#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tadk/dataset.hpp"

namespace tadk::rf {

inline constexpr std::uint32_t leaf_marker = 0xffffffffu;

/// Every node keeps the class counts of the training samples that reached
/// it, so impurity importance can be recomputed from a loaded model.
struct Node {
  std::uint32_t feature = leaf_marker;
  double threshold = 0.0;  // value <= threshold goes left
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::vector<double> counts;

  bool is_leaf() const noexcept { return feature == leaf_marker; }
  bool operator==(const Node&) const = default;
};

/// Nodes in preorder; the root is node 0 and children always follow their
/// parent.
struct Tree {
  std::vector<Node> nodes;

  /// Index of the leaf `x` lands in.
  std::uint32_t leaf_for(std::span<const double> x) const;
  bool operator==(const Tree&) const = default;
};

struct TrainParams {
  std::uint32_t n_trees = 100;
  std::uint32_t max_depth = 16;
  std::uint32_t min_leaf = 2;
  std::uint32_t mtry = 0;  // 0 = sqrt of the usable feature count
  bool bootstrap = true;
  std::uint64_t seed = 42;
  std::uint32_t jobs = 1;  // worker threads; results do not depend on it
  std::uint32_t min_rows_per_class = 10;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  std::uint32_t n_trees = 0;
  std::uint32_t max_depth = 0;
  std::uint32_t min_leaf = 0;
  double oob_accuracy = 0.0;  // training accuracy when bootstrap is off

  bool operator==(const TrainMeta&) const = default;
};

struct Prediction {
  std::uint32_t cls = 0;
  std::vector<double> probs;

  double confidence() const { return probs.empty() ? 0.0 : probs[cls]; }
};

struct Model {
  std::string schema_version;
  std::uint32_t n_features = 0;
  std::vector<std::string> classes;
  std::vector<std::uint32_t> kept;  // reduction mask: sorted feature ids in use
  TrainMeta meta;
  std::vector<Tree> trees;

  /// Soft vote over trees; argmax ties go to the lower class id. Throws
  /// SchemaMismatch when the vector width differs from n_features.
  Prediction predict(std::span<const double> x) const;
  bool operator==(const Model&) const = default;
};

/// CART/Gini forest. Classes are the sorted distinct labels. Throws
/// SingleClass, TooFewSamples, InvalidArgs (unlabeled rows).
Model train(const Dataset& ds, const TrainParams& params = {});

/// Trains on the columns listed in `features` only (sorted, unique).
Model train_subset(const Dataset& ds, std::span<const std::uint32_t> features,
                   const TrainParams& params);

/// Mean decrease in Gini impurity per feature, normalized to sum to 1
/// (all zero for a forest of stumps).
std::vector<double> importance(const Model& model);

/// Drops features whose importance is below threshold / N, retrains on the
/// rest and keeps the original model if out-of-bag accuracy falls by more
/// than one percentage point.
Model reduce_features(const Model& model, const Dataset& ds, double threshold,
                      std::uint32_t jobs = 1);

/// Binary model file: "TRFM", u32 version, schema version, feature count,
/// class table, reduction mask, training meta, tree count, then per tree a
/// node count and fixed-width node records. Little-endian.
std::vector<std::uint8_t> dump_model(const Model& model);
/// Throws BadMagic, VersionMismatch (format, or schema when `schema` is
/// non-empty and differs) and CorruptTree.
Model load_model(std::span<const std::uint8_t> bytes, std::string_view schema = {});
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path, std::string_view schema = {});

/// Maps labels to class ids of `model`; unknown labels become npos.
std::vector<std::size_t> encode_labels(const Model& model, const std::vector<std::string>& labels);

}  // namespace tadk::rf
