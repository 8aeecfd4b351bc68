#include "kpplab/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace kpplab {

namespace {

struct Lifeline {
  double x;
  double born;
};

bool is_integer_time(double t) { return t == std::floor(t); }

}  // namespace

void RunConfig::validate() const {
  if (!(t_max >= 0.0)) throw Error(ErrorCode::domain, "t_max must be nonnegative");
  if (!(prune_window > 0.0)) throw Error(ErrorCode::domain, "prune_window must be positive");
  if (!std::is_sorted(record_times.begin(), record_times.end())) {
    throw Error(ErrorCode::domain, "record_times must be sorted");
  }
  for (double t : record_times) {
    if (t < 0.0 || t > t_max) throw Error(ErrorCode::domain, "record time outside [0, t_max]");
  }
  if (max_particles == 0) throw Error(ErrorCode::domain, "max_particles must be positive");
}

Population advance(const Population& pop, double t_target, const BranchingModel& model,
                   std::size_t max_particles, Rng& rng) {
  if (!(t_target >= pop.time)) throw Error(ErrorCode::domain, "advance target precedes pop.time");
  if (t_target == pop.time) return pop;

  Population out;
  out.time = t_target;
  out.pruned_mass_bound = pop.pruned_mass_bound;
  out.positions.reserve(pop.positions.size() * 2);

  const Motion& motion = model.motion();
  const BranchingLaw& law = model.law();
  std::vector<Lifeline> stack;
  std::vector<double> children;

  for (double start : pop.positions) {
    stack.push_back({start, pop.time});
    while (!stack.empty()) {
      const Lifeline node = stack.back();
      stack.pop_back();
      const double branch_at = node.born + rng.exponential();
      const double end = std::min(branch_at, t_target);
      const double x = node.x + sample_motion(motion, end - node.born, rng);
      if (branch_at >= t_target) {
        out.positions.push_back(x);
      } else {
        children.clear();
        sample_offspring(law, x, rng, children);
        for (double c : children) stack.push_back({c, branch_at});
      }
      if (out.positions.size() + stack.size() > max_particles) {
        throw CapacityError(t_target, max_particles);
      }
    }
  }
  return out;
}

Population prune(const Population& pop, double lambda_star, double window) {
  if (!(window > 0.0)) throw Error(ErrorCode::domain, "prune window must be positive");
  if (pop.positions.empty()) return pop;
  const double cutoff = *std::min_element(pop.positions.begin(), pop.positions.end()) + window;
  Population out;
  out.time = pop.time;
  out.positions.reserve(pop.positions.size());
  for (double x : pop.positions) {
    if (x <= cutoff) out.positions.push_back(x);
  }
  const auto removed = pop.positions.size() - out.positions.size();
  out.pruned_mass_bound =
      pop.pruned_mass_bound + static_cast<double>(removed) * std::exp(-lambda_star * window);
  return out;
}

std::optional<double> leftmost(const Population& pop) {
  if (pop.positions.empty()) return std::nullopt;
  return *std::min_element(pop.positions.begin(), pop.positions.end());
}

std::pair<double, double> martingales(const Population& pop, int n, double lambda_star,
                                      double psi_star) {
  double w = 0.0, d = 0.0;
  for (double y : pop.positions) {
    const double h = lambda_star * y + n * psi_star;
    const double e = std::exp(-h);
    w += e;
    d += h * e;
  }
  return {w, d};
}

void for_each_replica(std::size_t count, unsigned threads,
                      const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  for (unsigned w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (std::size_t r = next++; r < count; r = next++) {
        try {
          fn(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

EnsembleResult run_ensemble(const BranchingModel& model, const RunConfig& cfg,
                            std::size_t replicas, const std::optional<SpeedProfile>& speed,
                            unsigned threads) {
  cfg.validate();
  const bool pruning = std::isfinite(cfg.prune_window);
  if (pruning && !speed) {
    throw Error(ErrorCode::domain, "pruning needs lambda* (pass a SpeedProfile)");
  }

  std::vector<double> checkpoints = cfg.record_times;
  if (speed) {
    for (int n = 0; n <= static_cast<int>(std::floor(cfg.t_max)); ++n) checkpoints.push_back(n);
  }
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  struct ReplicaOutput {
    std::vector<MinimumSample> minima;
    MartingaleTrace trace;
    std::optional<std::string> failure;
    double pruned = 0.0;
  };
  std::vector<ReplicaOutput> outputs(replicas);

  for_each_replica(replicas, threads, [&](std::size_t r) {
    ReplicaOutput& o = outputs[r];
    o.trace.replica = r;
    const std::uint64_t seed = stream_seed(cfg.seed, r);
    Rng rng(seed);
    Population pop = Population::single(0.0);
    try {
      for (double c : checkpoints) {
        pop = advance(pop, c, model, cfg.max_particles, rng);
        if (std::binary_search(cfg.record_times.begin(), cfg.record_times.end(), c)) {
          const auto m = leftmost(pop);
          o.minima.push_back({c, m.value_or(std::numeric_limits<double>::infinity()),
                              !m.has_value(), r, seed});
        }
        if (speed && is_integer_time(c)) {
          const int n = static_cast<int>(c);
          const auto [w, d] = martingales(pop, n, speed->lambda_star, speed->psi_star);
          o.trace.entries.push_back({n, w, d});
        }
        if (pruning) pop = prune(pop, speed->lambda_star, cfg.prune_window);
      }
      o.pruned = pop.pruned_mass_bound;
    } catch (const CapacityError& e) {
      o.failure = e.what();
    }
  });

  EnsembleResult result;
  if (model.lattice()) {
    result.warnings.push_back(model.tag() +
                              " is lattice: the limit law of M_t does not apply");
  }
  for (std::size_t r = 0; r < replicas; ++r) {
    auto& o = outputs[r];
    if (o.failure) {
      result.invalid.push_back({r, *o.failure});
      continue;
    }
    result.minima.insert(result.minima.end(), o.minima.begin(), o.minima.end());
    if (speed) result.traces.push_back(std::move(o.trace));
    result.max_pruned_mass_bound = std::max(result.max_pruned_mass_bound, o.pruned);
  }
  return result;
}

MeanEstimate empirical_v(const BranchingModel& model, double lambda, double t,
                         std::size_t replicas, std::uint64_t seed, std::size_t max_particles,
                         unsigned threads) {
  if (replicas == 0) throw Error(ErrorCode::empty_sample, "empirical_v needs replicas > 0");
  std::vector<double> sums(replicas);
  for_each_replica(replicas, threads, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    const Population pop = advance(Population::single(0.0), t, model, max_particles, rng);
    double s = 0.0;
    for (double y : pop.positions) s += std::exp(-lambda * y);
    sums[r] = s;
  });
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= static_cast<double>(replicas);
  double var = 0.0;
  for (double s : sums) var += (s - mean) * (s - mean);
  MeanEstimate est;
  est.mean = mean;
  est.samples = replicas;
  est.standard_error =
      replicas > 1 ? std::sqrt(var / static_cast<double>(replicas - 1) / replicas) : 0.0;
  return est;
}

ExtinctionEstimate extinction_frequency(const BranchingModel& model, double t,
                                        std::size_t replicas, std::uint64_t seed,
                                        std::size_t max_particles, unsigned threads) {
  if (replicas == 0) throw Error(ErrorCode::empty_sample, "extinction_frequency needs replicas");
  std::vector<char> extinct(replicas, 0), capped(replicas, 0);
  for_each_replica(replicas, threads, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    try {
      extinct[r] = advance(Population::single(0.0), t, model, max_particles, rng).extinct();
    } catch (const CapacityError&) {
      capped[r] = 1;
    }
  });
  ExtinctionEstimate est;
  est.replicas = replicas;
  const auto dead = std::count(extinct.begin(), extinct.end(), 1);
  est.capacity_hits = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  est.fraction = static_cast<double>(dead) / static_cast<double>(replicas);
  est.standard_error = std::sqrt(est.fraction * (1.0 - est.fraction) / replicas);
  return est;
}

}  // namespace kpplab
