#include "tadk/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "tadk/error.hpp"

namespace tadk {
namespace {

void check_cell(const std::string& cell, const char* what) {
  if (cell.find_first_of(",\r\n") != std::string::npos) {
    throw Error(Errc::InvalidArgs, std::string(what) + " must not contain ',' or newlines: " + cell);
  }
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  while (true) {
    const auto comma = line.find(',');
    cells.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void Dataset::add_row(std::string key, std::string label, std::span<const double> row) {
  if (row.size() != width()) {
    throw Error(Errc::SchemaMismatch, "row width " + std::to_string(row.size()) +
                                          " does not match schema width " + std::to_string(width()));
  }
  keys.push_back(std::move(key));
  labels.push_back(std::move(label));
  values.insert(values.end(), row.begin(), row.end());
}

void Dataset::append(const Dataset& other) {
  if (other.rows() == 0) return;
  if (rows() == 0 && feature_names.empty()) {
    schema_version = other.schema_version;
    feature_names = other.feature_names;
  }
  if (other.schema_version != schema_version || other.feature_names != feature_names) {
    throw Error(Errc::SchemaMismatch, "cannot append rows of schema " + other.schema_version +
                                          " to " + schema_version);
  }
  keys.insert(keys.end(), other.keys.begin(), other.keys.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  values.insert(values.end(), other.values.begin(), other.values.end());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.schema_version = schema_version;
  out.feature_names = feature_names;
  for (std::size_t i : indices) out.add_row(keys.at(i), labels.at(i), row(i));
  return out;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << '#' << ds.schema_version << ",key,label";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    check_cell(ds.keys[i], "key");
    check_cell(ds.labels[i], "label");
    out << ds.keys[i] << ',' << ds.labels[i];
    for (double v : ds.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_dataset(out, ds);
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw Error(Errc::SchemaMismatch, "missing '#<schema>,key,label,...' header line");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(std::string_view(line).substr(1));
  if (header.size() < 3 || header[1] != "key" || header[2] != "label") {
    throw Error(Errc::SchemaMismatch, "malformed header line");
  }
  ds.schema_version = std::string(header[0]);
  for (std::size_t i = 3; i < header.size(); ++i) ds.feature_names.emplace_back(header[i]);

  std::vector<double> row(ds.width());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != ds.width() + 2) {
      throw Error(Errc::SchemaMismatch, "line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(ds.width() + 2) + " cells, got " +
                                            std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < ds.width(); ++j) {
      const auto cell = cells[j + 2];
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[j]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(Errc::InvalidArgs, "line " + std::to_string(line_no) + ": bad number '" +
                                           std::string(cell) + "'");
      }
    }
    ds.add_row(std::string(cells[0]), std::string(cells[1]), row);
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace tadk
