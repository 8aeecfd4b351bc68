#include "kpplab/wave.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "kpplab/error.hpp"
#include "kpplab/pde.hpp"

namespace kpplab {

double wave_residual(const Field& profile, double c, const BranchingModel& model, double dt) {
  const Field moved = pde_step(model, profile, dt);
  double sup = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double back = moved.interpolate(profile.grid.x(i) + c * dt);
    sup = std::max(sup, std::abs(back - profile.values[i]));
  }
  return sup;
}

Field resample(const Field& field, const Grid& target, double shift) {
  std::vector<double> v(target.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = field.interpolate(target.x(i) + shift);
  return Field(target, std::move(v), field.t, field.left_limit, field.right_limit,
               field.orientation);
}

namespace {

// F(q) = c D q + L q + G(q) with the pinned row replaced by q_pin - 1/2.
std::vector<double> wave_equation(const SEquationStepper& st, double c, const Field& q,
                                  std::size_t pin) {
  const std::size_t n = q.size();
  std::vector<double> r(n + 2);
  st.rhs(q.values, q.left_limit, q.right_limit, Orientation::complement, r);
  r.resize(n);
  const double h = c / (2.0 * q.grid.dx());
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = i == 0 ? q.left_limit : q.values[i - 1];
    const double hi = i + 1 == n ? q.right_limit : q.values[i + 1];
    r[i] += h * (hi - lo);
  }
  r[pin] = q.values[pin] - 0.5;
  return r;
}

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

Field converge_wave(const BranchingModel& model, double c, const Field& initial, double tol,
                    int max_iter) {
  Field q = initial.with_orientation(Orientation::complement);
  const Grid& grid = q.grid;
  const std::size_t n = grid.size();
  const SEquationStepper st(model, grid);

  std::size_t pin = 0;
  while (pin < n && q.values[pin] > 0.5) ++pin;
  if (pin == 0 || pin == n) throw Error(ErrorCode::no_front, "initial guess has no 1/2 crossing");

  const double dx = grid.dx();
  const Convolver* motion = st.motion_convolver();
  const Convolver* law = st.law_convolver();
  const bool brownian = std::holds_alternative<BrownianMotion>(model.motion());

  std::vector<double> conv(n, 0.0);
  std::vector<double> r = wave_equation(st, c, q, pin);
  double norm = sup_norm(r);

  for (int iter = 0; iter < max_iter && norm >= tol; ++iter) {
    if (law) law->apply(q.values, q.left_limit, q.right_limit, conv);
    std::vector<Eigen::Triplet<double>> trip;
    auto add_kernel = [&](const Convolver& k, std::size_t i, double scale) {
      const auto K = static_cast<std::ptrdiff_t>(k.half_width());
      const auto& w = k.weights();
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(w.size()); ++j) {
        const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(i) - (j - K);
        if (col >= 0 && col < static_cast<std::ptrdiff_t>(n) && w[static_cast<std::size_t>(j)] != 0.0) {
          trip.emplace_back(static_cast<int>(i), static_cast<int>(col),
                            scale * w[static_cast<std::size_t>(j)]);
        }
      }
    };
    for (std::size_t i = 0; i < n; ++i) {
      const int ii = static_cast<int>(i);
      if (i == pin) {
        trip.emplace_back(ii, ii, 1.0);
        continue;
      }
      double diag = 0.0;
      if (i > 0) trip.emplace_back(ii, ii - 1, -c / (2.0 * dx));
      if (i + 1 < n) trip.emplace_back(ii, ii + 1, c / (2.0 * dx));
      if (motion) {
        add_kernel(*motion, i, 1.0);
        diag -= 1.0;
      }
      if (brownian) {
        const double h = 0.5 / (dx * dx);
        if (i > 0) trip.emplace_back(ii, ii - 1, h);
        if (i + 1 < n) trip.emplace_back(ii, ii + 1, h);
        diag -= 2.0 * h;
      }
      const auto [d_self, d_conv] = st.reaction_derivative(q.values[i], conv[i], Orientation::complement);
      diag += d_self;
      if (law) add_kernel(*law, i, d_conv);
      trip.emplace_back(ii, ii, diag);
    }
    Eigen::SparseMatrix<double> jac(static_cast<int>(n), static_cast<int>(n));
    jac.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorCode::iteration_limit, "travelling-wave Jacobian is singular");
    }
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<int>(n));
    const Eigen::VectorXd delta = lu.solve(rhs);

    // Backtrack until the residual decreases.
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      Field trial = q;
      for (std::size_t i = 0; i < n; ++i) trial.values[i] -= step * delta(static_cast<int>(i));
      auto rt = wave_equation(st, c, trial, pin);
      const double nt = sup_norm(rt);
      if (nt < norm) {
        q = std::move(trial);
        r = std::move(rt);
        norm = nt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(norm < tol)) {
    std::ostringstream msg;
    msg << "travelling-wave Newton stalled at residual " << norm;
    throw Error(ErrorCode::iteration_limit, msg.str());
  }
  q.t = 0.0;
  return q;
}

}  // namespace kpplab
