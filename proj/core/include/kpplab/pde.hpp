#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kpplab/convolution.hpp"
#include "kpplab/field.hpp"
#include "kpplab/model.hpp"

namespace kpplab {

/// Explicit RK4 integrator for the strong form of the S-equation
///   du/dt = L u - u + B(u)
/// with L the generator of the motion (0, jump, or half Laplacian) and B the
/// branching nonlinearity (u^2, sum p_n u^n, or u (b * u)). In the complement
/// orientation q = 1 - u the same dynamics read dq/dt = L q + G(q) with
/// G(q) = (1 - q) - B(1 - q).
///
/// The constant limits beyond the grid evolve by the pointwise ODE, since L
/// annihilates constants.
class SEquationStepper {
 public:
  SEquationStepper(const BranchingModel& model, const Grid& grid);

  const Grid& grid() const { return grid_; }
  const BranchingModel& model() const { return model_; }

  /// Largest admissible dt: 0.2 min(1, dx^2) for Brownian motion, 0.1 otherwise.
  double stability_bound() const;

  /// Right-hand side on the stored values of a field with the given limits.
  /// `out` has n + 2 entries: the grid values then the left and right limits.
  void rhs(std::span<const double> values, double left, double right, Orientation o,
           std::span<double> out) const;

  /// One RK4 step. Throws step_size when dt exceeds the stability bound or
  /// the result leaves [-1e-6, 1 + 1e-6].
  Field step(const Field& field, double dt) const;

  /// Steps to t_end with step dt (the last step is shortened to land exactly).
  /// The observer, if any, sees every intermediate field.
  Field evolve(Field field, double t_end, double dt,
               const std::function<void(const Field&)>& observer = {}) const;

  /// Convolution of the motion kernel in generator orientation, if any.
  const Convolver* motion_convolver() const { return motion_ ? &*motion_ : nullptr; }
  /// Convolution of the P3 displacement kernel in generator orientation, if any.
  const Convolver* law_convolver() const { return law_ ? &*law_ : nullptr; }

  /// Branching nonlinearity B and its complement counterpart G, pointwise
  /// (P3 needs the convolved value `conv`).
  double reaction(double y, double conv, Orientation o) const;
  /// d reaction / dy holding conv fixed, and d reaction / d conv.
  std::pair<double, double> reaction_derivative(double y, double conv, Orientation o) const;

 private:
  BranchingModel model_;
  Grid grid_;
  std::optional<Convolver> motion_;
  std::optional<Convolver> law_;
  bool brownian_ = false;
  mutable std::vector<double> scratch_;
};

/// One RK4 step of the model's strong form.
Field pde_step(const BranchingModel& model, const Field& field, double dt);

}  // namespace kpplab
