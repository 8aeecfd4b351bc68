#include "kpplab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpplab/error.hpp"

namespace kpplab {

namespace {

constexpr double clamp_slack = 1e-10;
constexpr double instability_slack = 1e-6;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

SEquationStepper::SEquationStepper(const BranchingModel& model, const Grid& grid)
    : model_(model), grid_(grid) {
  if (const auto* jump = std::get_if<PureJumpMotion>(&model.motion())) {
    motion_.emplace(jump->kernel.reflected(), grid, ConvolutionMethod::direct);
  }
  brownian_ = std::holds_alternative<BrownianMotion>(model.motion());
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&model.law())) {
    law_.emplace(p3->displacement.reflected(), grid, ConvolutionMethod::direct);
  }
  scratch_.resize(grid.size());
}

double SEquationStepper::stability_bound() const {
  if (brownian_) return 0.2 * std::min(1.0, grid_.dx() * grid_.dx());
  return 0.1;
}

double SEquationStepper::reaction(double y, double conv, Orientation o) const {
  const bool value = o == Orientation::value;
  return std::visit(
      overloaded{
          [&](const BinaryAtParent&) { return value ? y * y - y : y - y * y; },
          [&](const OffspringAtParent& law) {
            if (value) {
              double total = 0.0, b = 0.0;
              for (const auto& [n, p] : law.probabilities) {
                b += p * std::pow(y, n);
                total += p;
              }
              return (1.0 - total) + b - y;
            }
            // G(q) = sum p_n (1 - (1 - q)^n) - q, accurate for tiny q.
            double g = 0.0;
            const double l = std::log1p(-y);
            for (const auto& [n, p] : law.probabilities) {
              if (n > 0) g -= p * std::expm1(n * l);
            }
            return g - y;
          },
          [&](const BinaryOneDisplaced&) { return value ? y * conv - y : (1.0 - y) * conv; },
      },
      model_.law());
}

std::pair<double, double> SEquationStepper::reaction_derivative(double y, double conv,
                                                                Orientation o) const {
  const bool value = o == Orientation::value;
  return std::visit(
      overloaded{
          [&](const BinaryAtParent&) {
            return std::pair{value ? 2.0 * y - 1.0 : 1.0 - 2.0 * y, 0.0};
          },
          [&](const OffspringAtParent& law) {
            double d = 0.0;
            for (const auto& [n, p] : law.probabilities) {
              if (n == 0) continue;
              d += p * n * std::pow(value ? y : 1.0 - y, n - 1);
            }
            return std::pair{d - 1.0, 0.0};
          },
          [&](const BinaryOneDisplaced&) {
            return value ? std::pair{conv - 1.0, y} : std::pair{-conv, 1.0 - y};
          },
      },
      model_.law());
}

void SEquationStepper::rhs(std::span<const double> values, double left, double right,
                           Orientation o, std::span<double> out) const {
  const std::size_t n = grid_.size();
  if (values.size() != n || out.size() != n + 2) {
    throw Error(ErrorCode::domain, "rhs buffers do not match the grid");
  }
  // Motion part L y; zero for constant motion and on the limits.
  if (motion_) {
    motion_->apply(values, left, right, out.first(n));
    for (std::size_t i = 0; i < n; ++i) out[i] -= values[i];
  } else if (brownian_) {
    const double h = 0.5 / (grid_.dx() * grid_.dx());
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = i == 0 ? left : values[i - 1];
      const double hi = i + 1 == n ? right : values[i + 1];
      out[i] = h * (lo - 2.0 * values[i] + hi);
    }
  } else {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  }

  if (law_) {
    law_->apply(values, left, right, scratch_);
    for (std::size_t i = 0; i < n; ++i) out[i] += reaction(values[i], scratch_[i], o);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] += reaction(values[i], 0.0, o);
  }
  // Limits: the kernel has unit mass, so b * y equals y there.
  out[n] = reaction(left, left, o);
  out[n + 1] = reaction(right, right, o);
}

Field SEquationStepper::step(const Field& field, double dt) const {
  if (field.grid.size() != grid_.size() || field.grid.x_min() != grid_.x_min() ||
      field.grid.x_max() != grid_.x_max()) {
    throw Error(ErrorCode::domain, "field grid differs from the stepper grid");
  }
  if (!(dt > 0.0)) throw Error(ErrorCode::domain, "dt must be positive");
  if (dt > stability_bound() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds the stability bound " << stability_bound();
    throw Error(ErrorCode::step_size, msg.str());
  }
  const std::size_t n = grid_.size();
  const Orientation o = field.orientation;

  std::vector<double> y0(field.values);
  y0.push_back(field.left_limit);
  y0.push_back(field.right_limit);
  std::vector<double> k1(n + 2), k2(n + 2), k3(n + 2), k4(n + 2), tmp(n + 2);

  auto eval = [&](const std::vector<double>& y, std::vector<double>& k) {
    rhs(std::span<const double>(y.data(), n), y[n], y[n + 1], o, k);
  };
  auto stage = [&](const std::vector<double>& k, double h) {
    for (std::size_t i = 0; i < n + 2; ++i) tmp[i] = y0[i] + h * k[i];
  };

  eval(y0, k1);
  stage(k1, 0.5 * dt);
  eval(tmp, k2);
  stage(k2, 0.5 * dt);
  eval(tmp, k3);
  stage(k3, dt);
  eval(tmp, k4);

  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n + 2; ++i) {
    double v = y0[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double over = std::max(-v, v - 1.0);
    if (!(over <= instability_slack)) {
      std::ostringstream msg;
      msg << "value " << v << " left [0,1] after a step of " << dt << "; reduce dt";
      throw Error(ErrorCode::step_size, msg.str());
    }
    if (over > 0.0 && over < clamp_slack) v = std::clamp(v, 0.0, 1.0);
    y0[i] = v;
  }

  Field out = field;
  out.left_limit = y0[n];
  out.right_limit = y0[n + 1];
  y0.resize(n);
  out.values = std::move(y0);
  out.t = field.t + dt;
  return out;
}

Field SEquationStepper::evolve(Field field, double t_end, double dt,
                               const std::function<void(const Field&)>& observer) const {
  if (t_end < field.t) throw Error(ErrorCode::domain, "evolve target precedes the field time");
  const double start = field.t;
  const auto steps = static_cast<std::size_t>(std::ceil((t_end - start) / dt - 1e-9));
  for (std::size_t s = 0; s < steps; ++s) {
    const double target = s + 1 == steps ? t_end : start + static_cast<double>(s + 1) * dt;
    field = step(field, target - field.t);
    field.t = target;
    if (observer) observer(field);
  }
  return field;
}

Field pde_step(const BranchingModel& model, const Field& field, double dt) {
  return SEquationStepper(model, field.grid).step(field, dt);
}

}  // namespace kpplab
