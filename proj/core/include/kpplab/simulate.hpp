#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpplab/error.hpp"
#include "kpplab/model.hpp"
#include "kpplab/rng.hpp"
#include "kpplab/spectral.hpp"

namespace kpplab {

/// Particle positions of one realization at `time`.
struct Population {
  std::vector<double> positions;
  double time = 0.0;
  /// Accumulated (count removed) * exp(-lambda* L) over all prunes.
  double pruned_mass_bound = 0.0;

  bool extinct() const { return positions.empty(); }
  static Population single(double x = 0.0) { return Population{{x}, 0.0, 0.0}; }
};

struct RunConfig {
  double t_max = 1.0;
  std::vector<double> record_times;
  /// Pruning window L; +inf disables pruning.
  double prune_window = std::numeric_limits<double>::infinity();
  std::size_t max_particles = 5'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MartingaleEntry {
  int n = 0;
  double w = 0.0;  // additive martingale W_n
  double d = 0.0;  // derivative martingale D_n
};

struct MartingaleTrace {
  std::size_t replica = 0;
  std::vector<MartingaleEntry> entries;
};

/// Left-most position at a record time. Extinct replicas are kept with
/// `extinct` set and m = +inf.
struct MinimumSample {
  double t = 0.0;
  double m = 0.0;
  bool extinct = false;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
};

/// Thrown by advance() when the population outgrows the cap.
class CapacityError : public Error {
 public:
  CapacityError(double time_reached, std::size_t particles)
      : Error(ErrorCode::capacity, "population exceeded " + std::to_string(particles) +
                                       " particles before t=" + std::to_string(time_reached)),
        time_reached_(time_reached),
        particles_(particles) {}

  double time_reached() const { return time_reached_; }
  std::size_t particles() const { return particles_; }

 private:
  double time_reached_;
  std::size_t particles_;
};

/// Exact event-driven evolution of every lifeline from pop.time to t_target.
/// Each lifeline is followed depth first with an explicit stack; branching
/// clocks are Exp(1) and the motion is sampled exactly between events.
Population advance(const Population& pop, double t_target, const BranchingModel& model,
                   std::size_t max_particles, Rng& rng);

inline Population advance(const Population& pop, double t_target, const BranchingModel& model,
                          const RunConfig& cfg, Rng& rng) {
  return advance(pop, t_target, model, cfg.max_particles, rng);
}

/// Drops particles further than L to the right of the minimum.
Population prune(const Population& pop, double lambda_star, double window);

std::optional<double> leftmost(const Population& pop);

/// (W_n, D_n) for the population at integer time n.
std::pair<double, double> martingales(const Population& pop, int n, double lambda_star,
                                      double psi_star);

struct InvalidReplica {
  std::size_t replica = 0;
  std::string reason;
};

struct EnsembleResult {
  std::vector<MinimumSample> minima;
  std::vector<MartingaleTrace> traces;
  std::vector<InvalidReplica> invalid;
  std::vector<std::string> warnings;
  double max_pruned_mass_bound = 0.0;
};

/// Independent replicas started from {0}. Replica r draws from
/// Rng::stream(cfg.seed, r). Minima are recorded at cfg.record_times and,
/// when `speed` is given, (W_n, D_n) at n = 0, 1, ..., floor(t_max).
/// Pruning (finite cfg.prune_window) needs `speed`.
EnsembleResult run_ensemble(const BranchingModel& model, const RunConfig& cfg,
                            std::size_t replicas,
                            const std::optional<SpeedProfile>& speed = std::nullopt,
                            unsigned threads = 1);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of v_lambda(0,t) = E sum exp(-lambda y).
MeanEstimate empirical_v(const BranchingModel& model, double lambda, double t,
                         std::size_t replicas, std::uint64_t seed,
                         std::size_t max_particles = 5'000'000, unsigned threads = 1);

struct ExtinctionEstimate {
  double fraction = 0.0;
  double standard_error = 0.0;
  std::size_t replicas = 0;
  /// Replicas that hit the particle cap; counted as surviving.
  std::size_t capacity_hits = 0;
};

ExtinctionEstimate extinction_frequency(const BranchingModel& model, double t,
                                        std::size_t replicas, std::uint64_t seed,
                                        std::size_t max_particles = 20'000,
                                        unsigned threads = 1);

/// Runs fn(r) for r in [0, count) on up to `threads` workers.
void for_each_replica(std::size_t count, unsigned threads,
                      const std::function<void(std::size_t)>& fn);

}  // namespace kpplab
