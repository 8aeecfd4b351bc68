#include "cli/artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <memory>

#include "kpplab/error.hpp"

#ifndef KPPLAB_CODE_VERSION
#define KPPLAB_CODE_VERSION "unknown"
#endif

namespace kpplab::cli {

const char* code_version() { return KPPLAB_CODE_VERSION; }

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::format, "cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunRecorder::RunRecorder(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw Error(ErrorCode::config, "cannot create output directory " + dir_.string());
  }
}

void RunRecorder::write_text(const std::string& name, const std::string& content) {
  std::ofstream out(path(name), std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::format, "cannot write " + path(name).string());
  if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) {
    outputs_.push_back(name);
  }
}

void RunRecorder::write_json(const std::string& name, const nlohmann::json& doc) {
  write_text(name, doc.dump(2) + "\n");
}

bool RunRecorder::all_pass() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
}

void RunRecorder::finish(const nlohmann::json& config, const std::string& command,
                         unsigned threads, const std::string& started,
                         const std::string& finished, double wall_seconds,
                         const std::string& status) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& name : outputs_) {
    outputs.push_back({{"path", name},
                       {"sha256", sha256_file(path(name))},
                       {"bytes", std::filesystem::file_size(path(name))}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : checks_) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  const nlohmann::json manifest = {
      {"command", command},         {"status", status},
      {"config", config},           {"code_version", code_version()},
      {"started", started},         {"finished", finished},
      {"wall_seconds", wall_seconds}, {"threads", threads},
      {"outputs", outputs},         {"checks", checks},
  };
  std::ofstream out(path("manifest.json"));
  out << manifest.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::format, "cannot write manifest");
}

}  // namespace kpplab::cli
