#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "kpplab/error.hpp"
#include "kpplab/field.hpp"

namespace kpplab::cli {

using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::speed: return "speed";
    case Command::assumptions: return "assumptions";
    case Command::simulate: return "simulate";
    case Command::solve: return "solve";
    case Command::compare: return "compare";
    case Command::report: return "report";
  }
  return "unknown";
}

namespace {

std::string child(const std::string& pointer, const std::string& key) {
  std::string escaped;
  for (char ch : key) {
    if (ch == '~') escaped += "~0";
    else if (ch == '/') escaped += "~1";
    else escaped += ch;
  }
  return pointer + "/" + escaped;
}

std::string child(const std::string& pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

const json& require_object(const json& doc, const std::string& pointer) {
  if (!doc.is_object()) throw ConfigError(pointer.empty() ? "/" : pointer, "expected an object");
  return doc;
}

void reject_unknown(const json& obj, const std::string& pointer,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(child(pointer, key), "unknown property");
  }
}

const json& member(const json& obj, const std::string& pointer, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(child(pointer, key), "required property missing");
  return obj.at(key);
}

double number(const json& v, const std::string& pointer) {
  if (!v.is_number()) throw ConfigError(pointer, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(pointer, "expected a finite number");
  return x;
}

double positive(const json& v, const std::string& pointer) {
  const double x = number(v, pointer);
  if (!(x > 0.0)) throw ConfigError(pointer, "expected a positive number");
  return x;
}

double nonnegative(const json& v, const std::string& pointer) {
  const double x = number(v, pointer);
  if (x < 0.0) throw ConfigError(pointer, "expected a nonnegative number");
  return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& pointer) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(pointer, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string text(const json& v, const std::string& pointer) {
  if (!v.is_string()) throw ConfigError(pointer, "expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& pointer) {
  if (!v.is_array()) throw ConfigError(pointer, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], child(pointer, i)));
  return out;
}

template <typename Fn>
void optional_member(const json& obj, const std::string& pointer, const std::string& key, Fn fn) {
  if (obj.contains(key)) fn(obj.at(key), child(pointer, key));
}

// Library validation errors inside a config section are attributed to it.
template <typename Fn>
auto attributed(const std::string& pointer, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw ConfigError(pointer, e.what());
  }
}

Kernel parse_kernel(const json& doc, const std::string& p) {
  require_object(doc, p);
  const std::string family = text(member(doc, p, "family"), child(p, "family"));
  if (family == "gaussian") {
    reject_unknown(doc, p, {"family", "sigma"});
    const double s = positive(member(doc, p, "sigma"), child(p, "sigma"));
    return attributed(p, [&] { return Kernel::gaussian(s); });
  }
  if (family == "two_sided_exponential") {
    reject_unknown(doc, p, {"family", "beta"});
    const double b = positive(member(doc, p, "beta"), child(p, "beta"));
    return attributed(p, [&] { return Kernel::two_sided_exponential(b); });
  }
  if (family == "uniform") {
    reject_unknown(doc, p, {"family", "r"});
    const double r = positive(member(doc, p, "r"), child(p, "r"));
    return attributed(p, [&] { return Kernel::uniform(r); });
  }
  if (family == "tabulated") {
    reject_unknown(doc, p, {"family", "x", "density", "normalize"});
    auto x = numbers(member(doc, p, "x"), child(p, "x"));
    auto d = numbers(member(doc, p, "density"), child(p, "density"));
    bool normalize = false;
    optional_member(doc, p, "normalize", [&](const json& v, const std::string& q) {
      if (!v.is_boolean()) throw ConfigError(q, "expected a boolean");
      normalize = v.get<bool>();
    });
    return attributed(p, [&] { return Kernel::tabulated(std::move(x), std::move(d), normalize); });
  }
  throw ConfigError(child(p, "family"),
                    "unknown kernel family '" + family +
                        "' (gaussian, two_sided_exponential, uniform, tabulated)");
}

json kernel_to_json(const Kernel& k) {
  return std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, GaussianFamily>) {
          return {{"family", "gaussian"}, {"sigma", f.sigma}};
        } else if constexpr (std::is_same_v<F, TwoSidedExponentialFamily>) {
          return {{"family", "two_sided_exponential"}, {"beta", f.beta}};
        } else if constexpr (std::is_same_v<F, UniformFamily>) {
          return {{"family", "uniform"}, {"r", f.r}};
        } else {
          return {{"family", "tabulated"}, {"x", f.x}, {"density", f.density}};
        }
      },
      k.family());
}

Motion parse_motion(const json& doc, const std::string& p) {
  require_object(doc, p);
  const std::string family = text(member(doc, p, "family"), child(p, "family"));
  if (family == "constant") {
    reject_unknown(doc, p, {"family"});
    return ConstantMotion{};
  }
  if (family == "brownian") {
    reject_unknown(doc, p, {"family"});
    return BrownianMotion{};
  }
  if (family == "jump") {
    reject_unknown(doc, p, {"family", "kernel"});
    return PureJumpMotion{parse_kernel(member(doc, p, "kernel"), child(p, "kernel"))};
  }
  throw ConfigError(child(p, "family"),
                    "unknown motion family '" + family + "' (constant, jump, brownian)");
}

BranchingLaw parse_law(const json& doc, const std::string& p) {
  require_object(doc, p);
  const std::string family = text(member(doc, p, "family"), child(p, "family"));
  if (family == "binary") {
    reject_unknown(doc, p, {"family"});
    return BinaryAtParent{};
  }
  if (family == "offspring") {
    reject_unknown(doc, p, {"family", "probabilities"});
    const std::string q = child(p, "probabilities");
    const json& probs = member(doc, p, "probabilities");
    if (!probs.is_object() || probs.empty()) {
      throw ConfigError(q, "expected a nonempty object mapping child counts to probabilities");
    }
    std::vector<std::pair<int, double>> law;
    for (const auto& [key, value] : probs.items()) {
      const std::string kp = child(q, key);
      std::size_t used = 0;
      int n = -1;
      try {
        n = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || n < 0) throw ConfigError(kp, "child count must be an integer >= 0");
      law.emplace_back(n, nonnegative(value, kp));
    }
    return attributed(q, [&] { return make_offspring_law(std::move(law)); });
  }
  if (family == "displaced") {
    reject_unknown(doc, p, {"family", "kernel"});
    return BinaryOneDisplaced{parse_kernel(member(doc, p, "kernel"), child(p, "kernel"))};
  }
  throw ConfigError(child(p, "family"),
                    "unknown branching law '" + family + "' (binary, offspring, displaced)");
}

GridParams parse_grid(const json& doc, const std::string& p) {
  require_object(doc, p);
  reject_unknown(doc, p, {"x_min", "x_max", "points"});
  GridParams g;
  g.x_min = number(member(doc, p, "x_min"), child(p, "x_min"));
  g.x_max = number(member(doc, p, "x_max"), child(p, "x_max"));
  g.points = unsigned_integer(member(doc, p, "points"), child(p, "points"));
  attributed(p, [&] { return Grid(g.x_min, g.x_max, g.points).size(); });
  return g;
}

SimulateParams parse_simulate(const json& doc, const std::string& p) {
  require_object(doc, p);
  reject_unknown(doc, p, {"t_max", "record_times", "replicas", "prune_window", "max_particles",
                          "martingales"});
  SimulateParams s;
  s.t_max = nonnegative(member(doc, p, "t_max"), child(p, "t_max"));
  s.record_times = {s.t_max};
  optional_member(doc, p, "record_times", [&](const json& v, const std::string& q) {
    s.record_times = numbers(v, q);
  });
  optional_member(doc, p, "replicas", [&](const json& v, const std::string& q) {
    s.replicas = unsigned_integer(v, q);
  });
  optional_member(doc, p, "prune_window", [&](const json& v, const std::string& q) {
    s.prune_window = positive(v, q);
  });
  optional_member(doc, p, "max_particles", [&](const json& v, const std::string& q) {
    s.max_particles = unsigned_integer(v, q);
  });
  optional_member(doc, p, "martingales", [&](const json& v, const std::string& q) {
    if (!v.is_boolean()) throw ConfigError(q, "expected a boolean");
    s.martingales = v.get<bool>();
  });
  return s;
}

SolveParams parse_solve(const json& doc, const std::string& p) {
  require_object(doc, p);
  reject_unknown(doc, p, {"t_max", "dt", "record_every", "level", "points", "grid",
                          "snapshot_times", "fit_from"});
  SolveParams s;
  optional_member(doc, p, "t_max", [&](const json& v, const std::string& q) {
    s.t_max = positive(v, q);
  });
  optional_member(doc, p, "dt", [&](const json& v, const std::string& q) { s.dt = positive(v, q); });
  optional_member(doc, p, "record_every", [&](const json& v, const std::string& q) {
    s.record_every = positive(v, q);
  });
  optional_member(doc, p, "level", [&](const json& v, const std::string& q) {
    s.level = number(v, q);
    if (!(s.level > 0.0 && s.level < 1.0)) throw ConfigError(q, "level must lie in (0, 1)");
  });
  optional_member(doc, p, "points", [&](const json& v, const std::string& q) {
    s.points = unsigned_integer(v, q);
  });
  optional_member(doc, p, "grid", [&](const json& v, const std::string& q) {
    s.grid = parse_grid(v, q);
  });
  optional_member(doc, p, "snapshot_times", [&](const json& v, const std::string& q) {
    s.snapshot_times = numbers(v, q);
  });
  optional_member(doc, p, "fit_from", [&](const json& v, const std::string& q) {
    s.fit_from = nonnegative(v, q);
  });
  return s;
}

CompareParams parse_compare(const json& doc, const std::string& p) {
  require_object(doc, p);
  reject_unknown(doc, p, {"kind", "t", "replicas", "grid", "tolerance", "n_used", "prune_window",
                          "pde_time", "pde_points", "resamples"});
  CompareParams c;
  const std::string kind = text(member(doc, p, "kind"), child(p, "kind"));
  if (kind == "u_vs_mc") c.kind = CompareKind::u_vs_mc;
  else if (kind == "martingale_vs_pde") c.kind = CompareKind::martingale_vs_pde;
  else throw ConfigError(child(p, "kind"), "unknown comparison (u_vs_mc, martingale_vs_pde)");
  if (c.kind == CompareKind::martingale_vs_pde) c.tolerance = 0.05;
  optional_member(doc, p, "t", [&](const json& v, const std::string& q) { c.t = nonnegative(v, q); });
  optional_member(doc, p, "replicas", [&](const json& v, const std::string& q) {
    c.replicas = unsigned_integer(v, q);
  });
  optional_member(doc, p, "grid", [&](const json& v, const std::string& q) {
    c.grid = parse_grid(v, q);
  });
  optional_member(doc, p, "tolerance", [&](const json& v, const std::string& q) {
    c.tolerance = positive(v, q);
  });
  optional_member(doc, p, "n_used", [&](const json& v, const std::string& q) {
    c.n_used = static_cast<int>(unsigned_integer(v, q));
  });
  optional_member(doc, p, "prune_window", [&](const json& v, const std::string& q) {
    c.prune_window = positive(v, q);
  });
  optional_member(doc, p, "pde_time", [&](const json& v, const std::string& q) {
    c.pde_time = positive(v, q);
  });
  optional_member(doc, p, "pde_points", [&](const json& v, const std::string& q) {
    c.pde_points = unsigned_integer(v, q);
  });
  optional_member(doc, p, "resamples", [&](const json& v, const std::string& q) {
    c.resamples = unsigned_integer(v, q);
  });
  return c;
}

}  // namespace

BranchingModel parse_model(const json& doc, const std::string& p) {
  require_object(doc, p);
  reject_unknown(doc, p, {"motion", "law", "label"});
  Motion motion = parse_motion(member(doc, p, "motion"), child(p, "motion"));
  BranchingLaw law = parse_law(member(doc, p, "law"), child(p, "law"));
  std::string label;
  optional_member(doc, p, "label", [&](const json& v, const std::string& q) { label = text(v, q); });
  return attributed(p, [&] { return BranchingModel(std::move(motion), std::move(law), label); });
}

json model_to_json(const BranchingModel& model) {
  json motion = std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ConstantMotion>) return {{"family", "constant"}};
        else if constexpr (std::is_same_v<M, BrownianMotion>) return {{"family", "brownian"}};
        else return {{"family", "jump"}, {"kernel", kernel_to_json(m.kernel)}};
      },
      model.motion());
  json law = std::visit(
      [](const auto& l) -> json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, BinaryAtParent>) {
          return {{"family", "binary"}};
        } else if constexpr (std::is_same_v<L, OffspringAtParent>) {
          json probs = json::object();
          for (const auto& [n, prob] : l.probabilities) probs[std::to_string(n)] = prob;
          return {{"family", "offspring"}, {"probabilities", probs}};
        } else {
          return {{"family", "displaced"}, {"kernel", kernel_to_json(l.displacement)}};
        }
      },
      model.law());
  json out = {{"motion", motion}, {"law", law}, {"tag", model.tag()}};
  if (!model.label().empty()) out["label"] = model.label();
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  require_object(doc, "");
  reject_unknown(doc, "", {"$schema", "command", "model", "seed", "threads", "output_dir",
                           "simulate", "solve", "compare", "runs"});
  ExperimentConfig cfg;
  cfg.source = doc;
  const std::string cmd = text(member(doc, "", "command"), "/command");
  const std::pair<const char*, Command> commands[] = {
      {"speed", Command::speed},       {"assumptions", Command::assumptions},
      {"simulate", Command::simulate}, {"solve", Command::solve},
      {"compare", Command::compare},   {"report", Command::report}};
  bool known = false;
  for (const auto& [name, c] : commands) {
    if (cmd == name) {
      cfg.command = c;
      known = true;
    }
  }
  if (!known) {
    throw ConfigError("/command",
                      "unknown command '" + cmd +
                          "' (speed, assumptions, simulate, solve, compare, report)");
  }

  if (cfg.command == Command::report) {
    const json& runs = member(doc, "", "runs");
    if (!runs.is_array()) throw ConfigError("/runs", "expected an array of directories");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      cfg.runs.emplace_back(text(runs[i], child("/runs", i)));
    }
  } else {
    cfg.model = parse_model(member(doc, "", "model"), "/model");
  }
  optional_member(doc, "", "seed", [&](const json& v, const std::string& q) {
    cfg.seed = unsigned_integer(v, q);
  });
  optional_member(doc, "", "threads", [&](const json& v, const std::string& q) {
    cfg.threads = static_cast<unsigned>(unsigned_integer(v, q));
    if (cfg.threads == 0) throw ConfigError(q, "threads must be at least 1");
  });
  optional_member(doc, "", "output_dir", [&](const json& v, const std::string& q) {
    cfg.output_dir = text(v, q);
  });

  switch (cfg.command) {
    case Command::simulate:
      cfg.simulate = parse_simulate(member(doc, "", "simulate"), "/simulate");
      break;
    case Command::solve:
      if (doc.contains("solve")) cfg.solve = parse_solve(doc.at("solve"), "/solve");
      break;
    case Command::compare:
      cfg.compare = parse_compare(member(doc, "", "compare"), "/compare");
      break;
    default:
      break;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace kpplab::cli
