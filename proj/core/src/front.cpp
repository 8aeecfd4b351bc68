#include "kpplab/front.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "kpplab/error.hpp"
#include "kpplab/pde.hpp"

namespace kpplab {

double front_position(const Field& field, double level) {
  const std::size_t n = field.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (field.u(i) >= level) {
      if (i == 0) break;
      const double lo = field.u(i - 1), hi = field.u(i);
      const double w = (level - lo) / (hi - lo);
      return field.grid.x(i - 1) + w * field.grid.dx();
    }
  }
  std::ostringstream msg;
  msg << "level " << level << " is not bracketed on the grid at t = " << field.t;
  throw Error(ErrorCode::no_front, msg.str());
}

FrontFit measure_front(const FrontTrace& trace, double lambda_star, double t_lo, double t_hi) {
  std::vector<FrontEntry> used;
  for (const auto& e : trace.entries) {
    if (e.t >= t_lo && e.t <= t_hi && e.t > 0.0) used.push_back(e);
  }
  if (used.size() < 10) {
    std::ostringstream msg;
    msg << "front fit needs at least 10 entries in [" << t_lo << ", " << t_hi << "], got "
        << used.size();
    throw Error(ErrorCode::fit, msg.str());
  }
  const auto rows = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd a(rows, 3);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double t = used[static_cast<std::size_t>(r)].t;
    a(r, 0) = t;
    a(r, 1) = std::log(t);
    a(r, 2) = 1.0;
    b(r) = used[static_cast<std::size_t>(r)].m_half;
  }
  // Column scaling keeps the rank test meaningful for long windows.
  const Eigen::Vector3d scale = a.colwise().norm().transpose();
  for (int c = 0; c < 3; ++c) a.col(c) /= scale(c);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    std::ostringstream msg;
    msg << "front fit design is rank deficient on [" << t_lo << ", " << t_hi
        << "] (predicted log slope " << -1.5 / lambda_star << ")";
    throw Error(ErrorCode::fit, msg.str());
  }
  const Eigen::Vector3d beta = qr.solve(b).cwiseQuotient(scale);
  return {beta(0), beta(1), beta(2)};
}

Grid front_grid(const SpeedProfile& speed, double t_max, std::size_t n_points) {
  return Grid(-40.0, speed.c_star * t_max + 40.0, n_points);
}

FrontRun run_front(const BranchingModel& model, const Grid& grid, const FrontRunOptions& opt) {
  if (!(opt.record_every > 0.0)) throw Error(ErrorCode::domain, "record_every must be positive");
  const SEquationStepper stepper(model, grid);

  std::vector<double> targets;
  const auto records = static_cast<std::size_t>(std::floor(opt.t_max / opt.record_every + 1e-9));
  for (std::size_t k = 1; k <= records; ++k) {
    targets.push_back(static_cast<double>(k) * opt.record_every);
  }
  for (double s : opt.snapshot_times) {
    if (s < 0.0 || s > opt.t_max) throw Error(ErrorCode::domain, "snapshot outside [0, t_max]");
    targets.push_back(s);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                targets.end());

  FrontRun run{{}, {}, Field::heaviside(grid, Orientation::complement)};
  Field field = run.final_field;
  for (double target : targets) {
    field = stepper.evolve(std::move(field), target, opt.dt);
    const double ratio = target / opt.record_every;
    if (std::abs(ratio - std::round(ratio)) < 1e-9 && target > 0.0) {
      run.trace.entries.push_back({target, front_position(field, opt.level)});
    }
    for (double s : opt.snapshot_times) {
      if (std::abs(s - target) < 1e-9) run.snapshots.push_back(field);
    }
  }
  run.final_field = std::move(field);
  return run;
}

}  // namespace kpplab
