#include <fstream>
#include <sstream>

#include "cli/run.hpp"

namespace kpplab::cli {

namespace {

std::string cell(std::string s) {
  for (auto& ch : s) {
    if (ch == '|' || ch == '\n') ch = ' ';
  }
  return s;
}

}  // namespace

std::string report(const std::vector<std::filesystem::path>& runs, int& status) {
  status = kExitOk;
  std::ostringstream out;
  out << "# kpplab run report\n\n";
  if (runs.empty()) return out.str();

  std::ostringstream details;
  out << "| run | command | status | checks passed |\n|---|---|---|---|\n";
  for (const auto& dir : runs) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    nlohmann::json m;
    bool readable = static_cast<bool>(in);
    if (readable) {
      try {
        m = nlohmann::json::parse(in);
        readable = m.is_object() && m.contains("status");
      } catch (const nlohmann::json::exception&) {
        readable = false;
      }
    }
    if (!readable) {
      out << "| " << cell(dir.string()) << " | - | incomplete (no manifest) | - |\n";
      continue;
    }
    const auto& checks = m.value("checks", nlohmann::json::array());
    std::size_t passed = 0;
    for (const auto& c : checks) passed += c.value("pass", false) ? 1 : 0;
    const bool ok = m.value("status", "") == "ok" && passed == checks.size();
    if (!ok) status = kExitChecksFailed;
    out << "| " << cell(dir.string()) << " | " << cell(m.value("command", "?")) << " | "
        << (ok ? "pass" : "FAIL") << " | " << passed << "/" << checks.size() << " |\n";
    if (!checks.empty()) {
      details << "\n## " << cell(dir.string()) << "\n\n| check | result | detail |\n|---|---|---|\n";
      for (const auto& c : checks) {
        details << "| " << cell(c.value("name", "?")) << " | "
                << (c.value("pass", false) ? "pass" : "FAIL") << " | "
                << cell(c.value("detail", "")) << " |\n";
      }
    }
  }
  out << details.str();
  return out.str();
}

}  // namespace kpplab::cli
