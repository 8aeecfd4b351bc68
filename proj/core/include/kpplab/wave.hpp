#pragma once

#include "kpplab/field.hpp"
#include "kpplab/model.hpp"

namespace kpplab {

/// sup_x |S_dt profile (x + c dt) - profile(x)| where S_dt is one pde_step:
/// how far the profile is from moving rigidly at speed c. Computed on the
/// stored values (either orientation), shift by linear interpolation.
double wave_residual(const Field& profile, double c, const BranchingModel& model, double dt);

/// Newton solve of the discrete travelling-wave equation
///   c D q + L q + G(q) = 0   (complement orientation, D central difference)
/// on the profile's grid, keeping its limits and pinning q = 1/2 at the grid
/// point where the initial guess first drops to 1/2. Sparse LU per step with
/// backtracking on the residual norm. Throws iteration_limit if the sup of
/// the residual does not fall below tol.
Field converge_wave(const BranchingModel& model, double c, const Field& initial,
                    double tol = 1e-11, int max_iter = 60);

/// Field on `target` with values field(x + shift) (constant extension).
Field resample(const Field& field, const Grid& target, double shift = 0.0);

}  // namespace kpplab
