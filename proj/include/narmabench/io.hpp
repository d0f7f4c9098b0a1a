#pragma once

// Small file/formatting helpers shared by the CLI and the bench driver.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace narmabench::io {

/// Full-precision decimal rendering (17 significant digits round-trips
/// IEEE doubles exactly).
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return body;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

/// UTC timestamp usable as a directory name, e.g. 20260810T134501Z.
inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

/// Create `<root>/<stamp>`; appends -1, -2, ... if the name is taken.
inline std::filesystem::path fresh_run_dir(const std::filesystem::path& root,
                                           const std::string& stamp) {
  std::filesystem::create_directories(root);
  std::filesystem::path dir = root / stamp;
  for (int k = 1; std::filesystem::exists(dir); ++k) {
    dir = root / (stamp + "-" + std::to_string(k));
  }
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace narmabench::io
