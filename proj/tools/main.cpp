#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli/artifacts.hpp"
#include "cli/run.hpp"
#include "kpplab/error.hpp"

using namespace kpplab::cli;

int main(int argc, char** argv) {
  CLI::App app{"kpplab: branching random walks, KPP fronts and their limits"};
  app.set_version_flag("--version", std::string(code_version()));

  std::string config_path, output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--output", output_dir, "Output directory (overrides output_dir)");
  app.add_option("--seed", seed, "Seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Render a CSV artifact as SVG");
  std::string csv, kind = "profile", svg_out;
  plot->add_option("csv", csv, "Input CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "profile, front or martingale")
      ->check(CLI::IsMember({"profile", "front", "martingale"}));
  plot->add_option("-o,--svg", svg_out, "Output SVG (default: input with .svg)");

  auto* rep = app.add_subcommand("report", "Collate run manifests into markdown");
  std::vector<std::string> run_dirs;
  std::string report_out;
  rep->add_option("runs", run_dirs, "Run directories");
  rep->add_option("-o,--out", report_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plot->parsed()) {
      const std::string svg = plot_svg(csv, parse_plot_kind(kind));
      const std::filesystem::path out =
          svg_out.empty() ? std::filesystem::path(csv).replace_extension(".svg")
                          : std::filesystem::path(svg_out);
      std::ofstream(out) << svg;
      std::cerr << "wrote " << out.string() << "\n";
      return kExitOk;
    }
    if (rep->parsed()) {
      int status = kExitOk;
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      const std::string md = report(dirs, status);
      if (report_out.empty()) std::cout << md;
      else std::ofstream(report_out) << md;
      return status;
    }
    if (config_path.empty()) {
      std::cerr << app.help();
      return kExitError;
    }
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed = seed;
    if (threads) cfg.threads = *threads;
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    return run(cfg, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
  } catch (const kpplab::Error& e) {
    std::cerr << "error (" << kpplab::to_string(e.code()) << "): " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
