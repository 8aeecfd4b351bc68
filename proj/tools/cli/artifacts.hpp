#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace kpplab::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// A named pass/fail outcome recorded in the manifest and collated by report.
struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Collects emitted files of one run and writes manifest.json next to them.
class RunRecorder {
 public:
  explicit RunRecorder(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void write_text(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& doc);
  void add_check(Check c) { checks_.push_back(std::move(c)); }
  const std::vector<Check>& checks() const { return checks_; }
  bool all_pass() const;

  /// Writes manifest.json; `config` is the effective configuration.
  void finish(const nlohmann::json& config, const std::string& command, unsigned threads,
              const std::string& started, const std::string& finished, double wall_seconds,
              const std::string& status);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> outputs_;
  std::vector<Check> checks_;
};

/// Shortest round-trip decimal form, so CSV output is exact and reproducible.
std::string format_double(double x);

/// UTC time in ISO 8601.
std::string utc_now();

/// Version string baked in at configure time.
const char* code_version();

}  // namespace kpplab::cli
