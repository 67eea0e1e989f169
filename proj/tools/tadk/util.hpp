#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tadk::cli {

enum class LogLevel { Error, Warn, Info, Debug };

/// Level from TADK_LOG (error|warn|info|debug); warn when unset.
LogLevel log_level();
void log(LogLevel level, std::string_view msg);

/// Settings shared by every subcommand.
struct Globals {
  std::uint64_t seed = 42;
  std::uint32_t jobs = 1;
  double idle_timeout_s = 30.0;
  std::uint32_t min_pkts = 8;
  double threshold = 0.5;
  std::string format = "text";

  bool rows() const { return format == "rows"; }
};

/// "initiator,label" lines, as written by `tadk synth`.
std::map<std::string, std::string> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::map<std::string, std::string>& labels);

std::string read_file(const std::filesystem::path& path);
/// Lines of a file, or of stdin for "-".
std::vector<std::string> read_lines(const std::string& path);

/// Nearest-rank percentile of an unsorted sample (0 for an empty one).
double percentile(std::vector<double> v, double p);

std::filesystem::path default_data_dir();

}  // namespace tadk::cli
