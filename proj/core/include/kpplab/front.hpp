#pragma once

#include <vector>

#include "kpplab/field.hpp"
#include "kpplab/model.hpp"
#include "kpplab/spectral.hpp"

namespace kpplab {

/// Position where u crosses `level`, by linear interpolation between the
/// first grid point reaching the level and its left neighbour.
/// Throws no_front when the level is not bracketed on the grid.
double front_position(const Field& field, double level = 0.5);

struct FrontEntry {
  double t = 0.0;
  double m_half = 0.0;
};

struct FrontTrace {
  std::vector<FrontEntry> entries;
};

struct FrontFit {
  double c_est = 0.0;
  double log_slope = 0.0;
  double intercept = 0.0;
};

/// Least squares m(t) ~ c t + s ln t + C over entries with t in [t_lo, t_hi].
/// The asymptotic prediction is c -> c*, s -> -3 / (2 lambda*); lambda_star
/// is only used for the diagnostic in errors.
/// Throws fit when fewer than 10 entries fall in the window or the design
/// is rank deficient.
FrontFit measure_front(const FrontTrace& trace, double lambda_star, double t_lo, double t_hi);

/// Fixed-frame domain [-40, c* t_max + 40].
Grid front_grid(const SpeedProfile& speed, double t_max, std::size_t n_points);

struct FrontRunOptions {
  double t_max = 60.0;
  double dt = 0.1;
  double record_every = 0.5;
  double level = 0.5;
  std::vector<double> snapshot_times;  // fields kept at these times
};

struct FrontRun {
  FrontTrace trace;
  std::vector<Field> snapshots;
  Field final_field;
};

/// Evolves Heaviside data u = 1_{x >= 0} (stored as its complement) and
/// records the level crossing every `record_every` time units.
FrontRun run_front(const BranchingModel& model, const Grid& grid, const FrontRunOptions& opt);

}  // namespace kpplab
