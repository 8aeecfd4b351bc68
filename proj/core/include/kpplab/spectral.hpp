#pragma once

#include <array>
#include <optional>
#include <string>

#include "kpplab/extended.hpp"
#include "kpplab/model.hpp"

namespace kpplab {

/// The minimal-speed data of a model.
struct SpeedProfile {
  ExtendedReal lambda0;      // abscissa of psi; sentinel = unbounded
  double lambda_star = 0.0;  // minimizer of psi(l)/l
  double c_star = 0.0;       // psi(lambda_star)/lambda_star
  double psi_star = 0.0;     // psi(lambda_star)
  double psi_prime_at_star = 0.0;
  double delta = 0.0;        // witness for the second-moment condition
};

struct Verdict {
  bool pass = false;
  std::string diagnostic;
};

struct AssumptionReport {
  Verdict a1, a2, a3, a4, non_lattice;
  /// w_{0,0}(0,1), w_{0,l*}(0,1), w_{delta,l*}(0,1).
  std::array<ExtendedReal, 3> w_values{ExtendedReal::infinity(), ExtendedReal::infinity(),
                                       ExtendedReal::infinity()};
  std::optional<SpeedProfile> speed;

  bool all_pass() const {
    return a1.pass && a2.pass && a3.pass && a4.pass && non_lattice.pass;
  }
};

/// lambda_0 = sup{s > 0 : psi(s) < inf}, analytic from the kernels.
/// Throws no_finite_transform when psi is infinite on all of (0, inf).
ExtendedReal abscissa(const BranchingModel& model);

/// Same quantity located by bisection on the finiteness of log_laplace;
/// reports unbounded when psi(cap) is finite.
ExtendedReal abscissa_by_bisection(const BranchingModel& model, double cap = 1e3,
                                   double tol = 1e-10);

/// Minimizes psi(l)/l by golden section on (eps, lambda_0 - eps), then pins
/// the stationary point l psi'(l) = psi(l) by bisection. `tol` is the
/// relative accuracy of the golden-section stage.
/// Throws no_minimizer when psi(l)/l decreases without bound as l grows and
/// boundary_infimum when the infimum sits at lambda_0.
SpeedProfile minimal_speed(const BranchingModel& model, double tol = 1e-10);

/// w_{l,m}(0,t) = E[sum e^{-l y} sum e^{-m y}] from the linear ODE
///   w'(s) = psi(l+m) w(s) + kappa(l,m) exp(s (psi(l) + psi(m))),  w(0) = 1,
/// integrated with an adaptive Dormand-Prince stepper (relative tol 1e-10).
/// kappa is E[sum_{i != j} e^{-l z_i} e^{-m z_j}] over children at the origin.
/// Returns the sentinel when l + m >= lambda_0 or a transform diverges.
ExtendedReal second_moment_w(const BranchingModel& model, double lambda, double mu, double t);

/// The inhomogeneous coefficient kappa(l, m) of the w-equation.
ExtendedReal second_moment_source(const BranchingModel& model, double lambda, double mu);

AssumptionReport check_assumptions(const BranchingModel& model);

/// psi(l) / 2^k, the log-Laplace transform of the walk sampled at 2^-k.
ExtendedReal psi_per_sampling(const BranchingModel& model, int k, double lambda);

}  // namespace kpplab
