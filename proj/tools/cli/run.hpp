#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace kpplab::cli {

/// Exit statuses of the tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitChecksFailed = 2;

/// Executes cfg.command, writing artifacts and manifest.json into
/// cfg.output_dir. Returns kExitChecksFailed when any recorded check fails.
/// Library and I/O errors propagate as exceptions.
int run(const ExperimentConfig& cfg, std::ostream& log);

/// Markdown summary of the manifests in `runs`; `status` receives the exit code.
std::string report(const std::vector<std::filesystem::path>& runs, int& status);

enum class PlotKind { profile, front, martingale };
PlotKind parse_plot_kind(const std::string& name);

/// Self-contained SVG from a CSV following the column contract of `kind`.
/// Throws Error(format) on empty input or mismatched columns.
std::string plot_svg(const std::filesystem::path& csv, PlotKind kind);

}  // namespace kpplab::cli
