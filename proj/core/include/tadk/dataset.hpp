#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tadk {

/// Row-major feature table with string labels. This is the training-set
/// interchange format shared by featurex, the forest and the pipelines.
///
/// On disk: one header line
///   #<schema_version>,key,label,<feature names...>
/// followed by one comma-separated row per sample:
///   <key>,<label>,<value>,...
/// An empty label means unlabeled. Values are written in shortest
/// round-trip form.
struct Dataset {
  std::string schema_version;
  std::vector<std::string> feature_names;
  std::vector<std::string> keys;
  std::vector<std::string> labels;
  std::vector<double> values;

  std::size_t rows() const noexcept { return keys.size(); }
  std::size_t width() const noexcept { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * width(), width()};
  }
  void add_row(std::string key, std::string label, std::span<const double> row);
  /// Appends every row of `other`; schemas must match (SchemaMismatch).
  void append(const Dataset& other);
  Dataset subset(std::span<const std::size_t> indices) const;
};

void write_dataset(std::ostream& out, const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace tadk
