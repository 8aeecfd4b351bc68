#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpplab/model.hpp"

namespace kpplab::cli {

/// A schema violation located by a JSON pointer into the config document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error((pointer.empty() ? "/" : pointer) + ": " + message),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

enum class Command { speed, assumptions, simulate, solve, compare, report };
const char* to_string(Command c);

struct GridParams {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t points = 0;
};

struct SimulateParams {
  double t_max = 10.0;
  std::vector<double> record_times;
  std::size_t replicas = 1000;
  double prune_window = -1.0;  // negative: no pruning; otherwise in units of 1 / lambda*
  std::size_t max_particles = 5'000'000;
  bool martingales = true;
};

struct SolveParams {
  double t_max = 60.0;
  double dt = 0.1;
  double record_every = 0.5;
  double level = 0.5;
  std::size_t points = 8192;
  std::optional<GridParams> grid;  // default: the fixed front frame
  std::vector<double> snapshot_times;
  double fit_from = 10.0;
};

enum class CompareKind { u_vs_mc, martingale_vs_pde };

struct CompareParams {
  CompareKind kind = CompareKind::u_vs_mc;
  double t = 2.0;
  std::size_t replicas = 10'000;
  GridParams grid{-20.0, 20.0, 1024};
  double tolerance = 0.02;
  // martingale_vs_pde only
  int n_used = 12;
  double prune_window = 14.0;  // in units of 1 / lambda*
  double pde_time = 40.0;
  std::size_t pde_points = 8192;
  std::size_t resamples = 1000;
};

struct ExperimentConfig {
  Command command = Command::speed;
  std::optional<BranchingModel> model;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::filesystem::path output_dir = "kpplab-out";
  SimulateParams simulate;
  SolveParams solve;
  CompareParams compare;
  std::vector<std::filesystem::path> runs;  // report only
  nlohmann::json source;                    // the document as read, for the manifest
};

/// Validates and converts a config document. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

BranchingModel parse_model(const nlohmann::json& doc, const std::string& pointer = "/model");
nlohmann::json model_to_json(const BranchingModel& model);

}  // namespace kpplab::cli
