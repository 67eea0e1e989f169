#include "util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tadk/error.hpp"

namespace tadk::cli {

LogLevel log_level() {
  const char* env = std::getenv("TADK_LOG");
  if (env == nullptr) return LogLevel::Warn;
  const std::string_view v(env);
  if (v == "error") return LogLevel::Error;
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

void log(LogLevel level, std::string_view msg) {
  static const LogLevel limit = log_level();
  if (level > limit) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "tadk: " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

std::map<std::string, std::string> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw Error(Errc::InvalidArgs, "bad labels line: " + line);
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

void write_labels(const std::filesystem::path& path, const std::map<std::string, std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  for (const auto& [k, v] : labels) out << k << ',' << v << '\n';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  auto slurp = [&](std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  };
  if (path == "-") {
    slurp(std::cin);
  } else {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    slurp(in);
  }
  return lines;
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("TADK_DATA_DIR")) return env;
  return TADK_DEFAULT_DATA_DIR;
}

}  // namespace tadk::cli
