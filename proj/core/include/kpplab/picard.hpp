#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kpplab/field.hpp"
#include "kpplab/model.hpp"

namespace kpplab {

struct PicardResult {
  Field field;                   // u(., t) in value orientation
  int iterations = 0;
  std::vector<double> increments;  // sup |u_{n+1} - u_n| over the space-time mesh
};

/// Called after every iteration with the iterate at the final time.
using PicardObserver = std::function<void(int iteration, const Field& at_t)>;

/// Minimal solution of the mild S-equation
///   u(t) = T0_t f + int_0^t T0_s B(u(t - s)) ds
/// by Picard iteration from u_0 = 0 on a uniform time mesh of n_time points
/// (product trapezoid rule, exact for the e^{-s} clock factor). T0 includes
/// the rate-1 branching clock: e^{-s} for X1, e^{-s} times the
/// compound-Poisson jump semigroup for X2, truncated where the Poisson tail
/// drops below 1e-10.
///
/// Supports X1+P1, X1+P2, X1+P3 and X2+P1. Throws iteration_limit when the
/// increment is still above tol after max_iter sweeps.
PicardResult picard_solve(const BranchingModel& model, const Field& f, double t,
                          std::size_t n_time, int max_iter, double tol,
                          const PicardObserver& observer = {});

}  // namespace kpplab
