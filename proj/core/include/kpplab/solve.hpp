#pragma once

#include "kpplab/field.hpp"
#include "kpplab/model.hpp"

namespace kpplab {

/// v_l(x, t) = E[sum_{y in X_t} e^{-l y}] for the process started at x,
/// from the linear equation dv/dt = L v + (linearized branching) v with
/// v(x, 0) = e^{-l x}.
///
/// The solver steps phi(x, t) = e^{l x} v(x, t) instead, whose equation has
/// exponentially tilted kernels and stays O(e^{psi t}), so nothing overflows
/// in the interior. RK4 with step dt, reduced to 0.2 dx^2 for Brownian
/// motion and shortened at the end.
/// Throws range when e^{-l x} or the result leaves the double range.
Field solve_v(const BranchingModel& model, double lambda, const Grid& grid, double t, double dt);

}  // namespace kpplab
