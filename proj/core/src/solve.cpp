#include "kpplab/solve.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "kpplab/convolution.hpp"
#include "kpplab/error.hpp"

namespace kpplab {

Field solve_v(const BranchingModel& model, double lambda, const Grid& grid, double t, double dt) {
  if (!(t >= 0.0) || !(dt > 0.0)) throw Error(ErrorCode::domain, "solve_v needs t >= 0, dt > 0");
  const std::size_t n = grid.size();

  // e^{-l x} must be representable at both grid ends.
  const double worst = std::max(-lambda * grid.x_min(), -lambda * grid.x_max());
  if (worst > 700.0) {
    std::ostringstream msg;
    msg << "e^{-lambda x} overflows on [" << grid.x_min() << ", " << grid.x_max() << "]";
    throw Error(ErrorCode::range, msg.str());
  }

  // Tilted convolutions: int a(z) e^{-l z} phi(x + z) dz.
  std::optional<Convolver> jump, displaced;
  if (const auto* pj = std::get_if<PureJumpMotion>(&model.motion())) {
    if (laplace_transform(pj->kernel, lambda).is_infinite()) {
      throw Error(ErrorCode::range, "jump kernel has no Laplace transform at lambda");
    }
    jump.emplace(pj->kernel.reflected(), grid, ConvolutionMethod::direct, 1e-12, lambda);
  }
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&model.law())) {
    if (laplace_transform(p3->displacement, lambda).is_infinite()) {
      throw Error(ErrorCode::range, "displacement kernel has no Laplace transform at lambda");
    }
    displaced.emplace(p3->displacement.reflected(), grid, ConvolutionMethod::direct, 1e-12,
                      lambda);
  }
  const bool brownian = std::holds_alternative<BrownianMotion>(model.motion());
  double growth = 0.0;  // constant part of the linearized branching term
  if (std::holds_alternative<BinaryAtParent>(model.law())) growth = 1.0;
  if (std::holds_alternative<OffspringAtParent>(model.law())) {
    growth = offspring_mean(model.law()) - 1.0;
  }
  auto mass = [](const Convolver& c) {
    double s = 0.0;
    for (double w : c.weights()) s += w;
    return s;
  };
  // Rate of the spatially constant part (the limits evolve by this).
  double limit_rate = growth;
  if (jump) limit_rate += mass(*jump) - 1.0;
  if (brownian) limit_rate += 0.5 * lambda * lambda;
  if (displaced) limit_rate += mass(*displaced);

  const double dx = grid.dx();
  std::vector<double> scratch(n);
  auto rhs = [&](const std::vector<double>& y, std::vector<double>& out) {
    const double left = y[n], right = y[n + 1];
    std::span<const double> phi(y.data(), n);
    for (std::size_t i = 0; i < n; ++i) out[i] = growth * y[i];
    if (jump) {
      jump->apply(phi, left, right, scratch);
      for (std::size_t i = 0; i < n; ++i) out[i] += scratch[i] - y[i];
    }
    if (displaced) {
      displaced->apply(phi, left, right, scratch);
      for (std::size_t i = 0; i < n; ++i) out[i] += scratch[i];
    }
    if (brownian) {
      for (std::size_t i = 0; i < n; ++i) {
        const double lo = i == 0 ? left : y[i - 1];
        const double hi = i + 1 == n ? right : y[i + 1];
        out[i] += 0.5 * (lo - 2.0 * y[i] + hi) / (dx * dx) - lambda * (hi - lo) / (2.0 * dx) +
                  0.5 * lambda * lambda * y[i];
      }
    }
    out[n] = limit_rate * left;
    out[n + 1] = limit_rate * right;
  };

  std::vector<double> y(n + 2, 1.0), k1(n + 2), k2(n + 2), k3(n + 2), k4(n + 2), tmp(n + 2);
  // The explicit Laplacian needs the same step restriction as pde_step.
  if (brownian) dt = std::min(dt, 0.2 * std::min(1.0, dx * dx));
  const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
  double now = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double target = s + 1 == steps ? t : static_cast<double>(s + 1) * dt;
    const double h = target - now;
    rhs(y, k1);
    for (std::size_t i = 0; i < n + 2; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n + 2; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n + 2; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n + 2; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    now = target;
  }

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::exp(-lambda * grid.x(i)) * y[i];
    if (!std::isfinite(v[i])) throw Error(ErrorCode::range, "v overflowed the double range");
  }
  const double left = v.front(), right = v.back();
  return Field(grid, std::move(v), t, left, right);
}

}  // namespace kpplab
