#include "cli/run.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "cli/artifacts.hpp"
#include "kpplab/analyze.hpp"
#include "kpplab/error.hpp"
#include "kpplab/front.hpp"
#include "kpplab/simulate.hpp"
#include "kpplab/spectral.hpp"

namespace kpplab::cli {

using nlohmann::json;

namespace {

json extended(const ExtendedReal& x) {
  return x.is_infinite() ? json(nullptr) : json(x.value());
}

json speed_json(const BranchingModel& model, const SpeedProfile& s) {
  return {{"tag", model.tag()},
          {"lambda0", extended(s.lambda0)},
          {"lambda_star", s.lambda_star},
          {"c_star", s.c_star},
          {"psi_star", s.psi_star},
          {"psi_prime_at_star", s.psi_prime_at_star},
          {"delta", s.delta}};
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("/seed", "stochastic commands need a seed");
  return *cfg.seed;
}

void run_speed(const ExperimentConfig& cfg, RunRecorder& rec) {
  const auto& model = *cfg.model;
  rec.write_json("speed.json", speed_json(model, minimal_speed(model)));
}

void run_assumptions(const ExperimentConfig& cfg, RunRecorder& rec) {
  const auto& model = *cfg.model;
  const AssumptionReport r = check_assumptions(model);
  json verdicts = json::object();
  const std::pair<const char*, const Verdict*> named[] = {
      {"A1", &r.a1}, {"A2", &r.a2}, {"A3", &r.a3}, {"A4", &r.a4}, {"non_lattice", &r.non_lattice}};
  for (const auto& [name, v] : named) {
    verdicts[name] = {{"pass", v->pass}, {"diagnostic", v->diagnostic}};
    rec.add_check({name, v->pass, v->diagnostic});
  }
  json doc = {{"tag", model.tag()},
              {"verdicts", verdicts},
              {"all_pass", r.all_pass()},
              {"w_values", {extended(r.w_values[0]), extended(r.w_values[1]),
                            extended(r.w_values[2])}}};
  doc["speed"] = r.speed ? speed_json(model, *r.speed) : json(nullptr);
  rec.write_json("assumptions.json", doc);
}

void run_simulate(const ExperimentConfig& cfg, RunRecorder& rec) {
  const auto& model = *cfg.model;
  const auto& p = cfg.simulate;
  std::optional<SpeedProfile> speed;
  if (p.martingales || p.prune_window > 0.0) speed = minimal_speed(model);
  RunConfig rc;
  rc.t_max = p.t_max;
  rc.record_times = p.record_times;
  rc.max_particles = p.max_particles;
  rc.seed = require_seed(cfg);
  if (p.prune_window > 0.0) rc.prune_window = p.prune_window / speed->lambda_star;
  const EnsembleResult r = run_ensemble(model, rc, p.replicas, speed, cfg.threads);

  std::ostringstream minima;
  minima << "replica,t,m_t,extinct\n";
  for (const auto& s : r.minima) {
    minima << s.replica << ',' << format_double(s.t) << ',' << format_double(s.m) << ','
           << (s.extinct ? 1 : 0) << '\n';
  }
  rec.write_text("minima.csv", minima.str());
  if (speed && p.martingales) {
    std::ostringstream mart;
    mart << "replica,n,W_n,D_n\n";
    for (const auto& tr : r.traces) {
      for (const auto& e : tr.entries) {
        mart << tr.replica << ',' << e.n << ',' << format_double(e.w) << ','
             << format_double(e.d) << '\n';
      }
    }
    rec.write_text("martingales.csv", mart.str());
  }
  json invalid = json::array();
  for (const auto& iv : r.invalid) invalid.push_back({{"replica", iv.replica}, {"reason", iv.reason}});
  json summary = {{"tag", model.tag()},
                  {"replicas", p.replicas},
                  {"seed", rc.seed},
                  {"invalid", invalid},
                  {"warnings", r.warnings},
                  {"max_pruned_mass_bound", r.max_pruned_mass_bound}};
  if (speed) summary["speed"] = speed_json(model, *speed);
  rec.write_json("summary.json", summary);
}

std::string field_csv(const Field& f, const BranchingModel& model) {
  const json header = {{"t", f.t},
                       {"grid", {{"x_min", f.grid.x_min()},
                                 {"x_max", f.grid.x_max()},
                                 {"points", f.grid.size()}}},
                       {"model", model_to_json(model)}};
  std::ostringstream out;
  out << "# " << header.dump() << "\n" << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out << format_double(f.grid.x(i)) << ',' << format_double(f.u(i)) << '\n';
  }
  return out.str();
}

void run_solve(const ExperimentConfig& cfg, RunRecorder& rec) {
  const auto& model = *cfg.model;
  const auto& p = cfg.solve;
  const SpeedProfile speed = minimal_speed(model);
  const Grid grid = p.grid ? Grid(p.grid->x_min, p.grid->x_max, p.grid->points)
                           : front_grid(speed, p.t_max, p.points);
  FrontRunOptions opt;
  opt.t_max = p.t_max;
  opt.dt = p.dt;
  opt.record_every = p.record_every;
  opt.level = p.level;
  opt.snapshot_times = p.snapshot_times;
  const FrontRun run = run_front(model, grid, opt);

  rec.write_text("field.csv", field_csv(run.final_field, model));
  for (const auto& snap : run.snapshots) {
    rec.write_text("field_t" + format_double(snap.t) + ".csv", field_csv(snap, model));
  }

  std::optional<FrontFit> fit;
  std::string fit_error;
  try {
    fit = measure_front(run.trace, speed.lambda_star, p.fit_from, p.t_max);
  } catch (const Error& e) {
    fit_error = e.what();
  }
  std::ostringstream front;
  front << (fit ? "t,m_half,fit\n" : "t,m_half\n");
  for (const auto& e : run.trace.entries) {
    front << format_double(e.t) << ',' << format_double(e.m_half);
    if (fit) {
      const double curve = e.t > 0.0
                               ? fit->c_est * e.t + fit->log_slope * std::log(e.t) + fit->intercept
                               : std::nan("");
      front << ',' << format_double(curve);
    }
    front << '\n';
  }
  rec.write_text("front.csv", front.str());
  json summary = {{"speed", speed_json(model, speed)}, {"t_max", p.t_max}, {"dt", p.dt}};
  if (fit) {
    summary["fit"] = {{"t_lo", p.fit_from},
                      {"t_hi", p.t_max},
                      {"c_est", fit->c_est},
                      {"log_slope", fit->log_slope},
                      {"intercept", fit->intercept},
                      {"predicted_log_slope", -1.5 / speed.lambda_star}};
  } else {
    summary["fit"] = nullptr;
    summary["fit_error"] = fit_error;
  }
  rec.write_json("front_summary.json", summary);
}

void append_profile(std::ostringstream& out, const ProfileEstimate& p) {
  for (std::size_t i = 0; i < p.x_grid.size(); ++i) {
    out << format_double(p.x_grid[i]) << ',' << format_double(p.values[i]) << ','
        << format_double(p.standard_error[i]) << ',' << to_string(p.source) << '\n';
  }
}

void run_compare(const ExperimentConfig& cfg, RunRecorder& rec) {
  const auto& model = *cfg.model;
  const auto& p = cfg.compare;
  const std::uint64_t seed = require_seed(cfg);
  std::ostringstream profiles;
  profiles << "x,value,stderr,source\n";
  json doc = {{"tag", model.tag()}, {"seed", seed}, {"tolerance", p.tolerance}};

  if (p.kind == CompareKind::u_vs_mc) {
    const Grid grid(p.grid.x_min, p.grid.x_max, p.grid.points);
    const UvsMc r = u_vs_mc(model, p.t, grid, p.replicas, seed, cfg.threads);
    ProfileEstimate pde{r.x, r.u_pde, std::vector<double>(r.x.size(), 0.0),
                        ProfileSource::pde_front};
    ProfileEstimate mc{r.x, r.u_mc, r.standard_error, ProfileSource::empirical_cdf};
    append_profile(profiles, pde);
    append_profile(profiles, mc);
    doc["kind"] = "u_vs_mc";
    doc["t"] = p.t;
    doc["shift"] = 0.0;
    doc["sup_dist"] = r.sup_distance;
    rec.add_check({"sup_dist", r.sup_distance <= p.tolerance,
                   "sup |u_pde - P[M_t >= -x]| = " + format_double(r.sup_distance)});
  } else {
    const SpeedProfile speed = minimal_speed(model);
    RunConfig rc;
    rc.t_max = p.n_used;
    rc.record_times = {static_cast<double>(p.n_used)};
    rc.prune_window = p.prune_window / speed.lambda_star;
    rc.seed = seed;
    const auto ens = run_ensemble(model, rc, p.replicas, speed, cfg.threads);
    const auto d = estimate_d_infinity(ens.traces, p.n_used);
    std::vector<double> xs;
    for (int i = 0; i <= 240; ++i) xs.push_back((-30.0 + 0.25 * i) / speed.lambda_star);
    const auto phi = phi_from_martingale(d, speed.lambda_star, xs, p.resamples, seed + 1);

    FrontRunOptions opt;
    opt.t_max = p.pde_time;
    const FrontRun run = run_front(model, front_grid(speed, p.pde_time, p.pde_points), opt);
    const ProfileEstimate pde = profile_from_field(run.final_field);
    const Alignment a = align_shift(phi, pde);

    ProfileEstimate shifted{xs, {}, std::vector<double>(xs.size(), 0.0), ProfileSource::pde_front};
    for (double x : xs) shifted.values.push_back(pde.at(x + a.shift));
    append_profile(profiles, phi);
    append_profile(profiles, shifted);
    doc["kind"] = "martingale_vs_pde";
    doc["shift"] = a.shift;
    doc["sup_dist"] = a.sup_dist;
    doc["cauchy_gap"] = d.cauchy_gap;
    doc["invalid_replicas"] = ens.invalid.size();
    rec.add_check({"sup_dist", a.sup_dist <= p.tolerance,
                   "aligned sup distance = " + format_double(a.sup_dist)});
  }
  json checks = json::array();
  for (const auto& c : rec.checks()) checks.push_back({{"name", c.name}, {"pass", c.pass}});
  doc["checks"] = checks;
  rec.write_text("profiles.csv", profiles.str());
  rec.write_json("comparison.json", doc);
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.command == Command::report) {
    int status = kExitOk;
    RunRecorder rec(cfg.output_dir);
    rec.write_text("report.md", report(cfg.runs, status));
    log << "wrote " << rec.path("report.md").string() << "\n";
    return status;
  }
  if (!cfg.model) throw ConfigError("/model", "required property missing");
  if (cfg.command == Command::simulate || cfg.command == Command::compare) require_seed(cfg);

  RunRecorder rec(cfg.output_dir);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  switch (cfg.command) {
    case Command::speed: run_speed(cfg, rec); break;
    case Command::assumptions: run_assumptions(cfg, rec); break;
    case Command::simulate: run_simulate(cfg, rec); break;
    case Command::solve: run_solve(cfg, rec); break;
    case Command::compare: run_compare(cfg, rec); break;
    case Command::report: break;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json effective = cfg.source;
  if (cfg.seed) effective["seed"] = *cfg.seed;
  effective["threads"] = cfg.threads;
  effective["output_dir"] = cfg.output_dir.string();
  const bool ok = rec.all_pass();
  rec.finish(effective, to_string(cfg.command), cfg.threads, started, utc_now(), wall,
             ok ? "ok" : "checks-failed");
  log << to_string(cfg.command) << ": " << (ok ? "ok" : "checks failed") << " -> "
      << cfg.output_dir.string() << "\n";
  return ok ? kExitOk : kExitChecksFailed;
}

}  // namespace kpplab::cli
