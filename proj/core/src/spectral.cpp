#include "kpplab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "kpplab/error.hpp"

namespace kpplab {

namespace {

constexpr double kGolden = 0.6180339887498949;

double ratio(const BranchingModel& model, double lambda) {
  const auto psi = log_laplace(model, lambda);
  return psi.is_finite() ? psi.value() / lambda : std::numeric_limits<double>::infinity();
}

// Stationarity residual of psi(l)/l; increasing in l because psi is convex.
double stationarity(const BranchingModel& model, double lambda) {
  return lambda * log_laplace_derivative(model, lambda) - log_laplace(model, lambda).value();
}

double golden_section(const BranchingModel& model, double a, double b, double tol) {
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = ratio(model, x1), f2 = ratio(model, x2);
  for (int it = 0; it < 300 && (b - a) > tol * std::max(1.0, 0.5 * (a + b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = ratio(model, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = ratio(model, x2);
    }
  }
  return 0.5 * (a + b);
}

double central_difference(const BranchingModel& model, double lambda) {
  const double h = 1e-6 * std::max(1.0, lambda);
  return (log_laplace(model, lambda + h).value() - log_laplace(model, lambda - h).value()) /
         (2.0 * h);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

ExtendedReal abscissa(const BranchingModel& model) {
  ExtendedReal result = ExtendedReal::infinity();
  auto take = [&](const Kernel& k) {
    const auto a = k.abscissa();
    if (a.is_finite() && (result.is_infinite() || a.value() < result.value())) result = a;
  };
  if (const auto* jump = std::get_if<PureJumpMotion>(&model.motion())) take(jump->kernel);
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&model.law())) take(p3->displacement);
  if (result.is_finite() && !(result.value() > 0.0)) {
    throw Error(ErrorCode::no_finite_transform, "psi is infinite for every lambda > 0");
  }
  return result;
}

ExtendedReal abscissa_by_bisection(const BranchingModel& model, double cap, double tol) {
  auto finite = [&](double l) { return log_laplace_finite(model, l); };
  if (finite(cap)) return ExtendedReal::infinity();
  double lo = cap;
  while (lo > 1e-12 && !finite(lo)) lo *= 0.5;
  if (!finite(lo)) {
    throw Error(ErrorCode::no_finite_transform, "psi is infinite for every tested lambda > 0");
  }
  double hi = std::min(cap, 2.0 * lo);
  while (hi - lo > tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    (finite(mid) ? lo : hi) = mid;
  }
  return ExtendedReal(0.5 * (lo + hi));
}

SpeedProfile minimal_speed(const BranchingModel& model, double tol) {
  const auto psi0 = log_laplace(model, 0.0);
  if (psi0.is_infinite() || !(psi0.value() > 0.0)) {
    throw Error(ErrorCode::domain, "minimal_speed needs psi(0) in (0, inf)");
  }
  const ExtendedReal lambda0 = abscissa(model);

  double upper;
  if (lambda0.is_finite()) {
    upper = lambda0.value();
  } else {
    double b = 1.0;
    while (ratio(model, 2.0 * b) < ratio(model, b)) {
      b *= 2.0;
      if (b > 1e6) {
        throw Error(ErrorCode::no_minimizer,
                    "psi(l)/l keeps decreasing as l grows; the infimum is not attained");
      }
    }
    upper = 2.0 * b;
  }
  const double eps = 1e-4 * std::max(1.0, upper);
  const double lo = eps, hi = upper - eps;

  double star = golden_section(model, lo, hi, tol);

  if (lambda0.is_finite() && stationarity(model, hi) < 0.0) {
    throw Error(ErrorCode::boundary_infimum,
                "infimum of psi(l)/l is approached at lambda_0 = " + fmt(lambda0.value()));
  }

  // Pin the stationary point; the golden stage is limited to ~sqrt(eps).
  double a = std::max(lo, star * (1.0 - 1e-6)), b = std::min(hi, star * (1.0 + 1e-6));
  for (int grow = 0; grow < 40 && !(stationarity(model, a) <= 0.0); ++grow)
    a = std::max(lo, star - (star - a) * 2.0);
  for (int grow = 0; grow < 40 && !(stationarity(model, b) >= 0.0); ++grow)
    b = std::min(hi, star + (b - star) * 2.0);
  if (stationarity(model, a) <= 0.0 && stationarity(model, b) >= 0.0) {
    for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
      const double mid = 0.5 * (a + b);
      (stationarity(model, mid) < 0.0 ? a : b) = mid;
    }
    star = 0.5 * (a + b);
  }

  SpeedProfile s;
  s.lambda0 = lambda0;
  s.lambda_star = star;
  s.psi_star = log_laplace(model, star).value();
  s.c_star = s.psi_star / star;
  s.psi_prime_at_star = central_difference(model, star);
  s.delta = lambda0.is_finite() ? std::min(0.5 * (lambda0.value() - star), 1.0) : 1.0;
  return s;
}

ExtendedReal second_moment_source(const BranchingModel& model, double lambda, double mu) {
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&model.law())) {
    const auto bl = p3->displacement.laplace(lambda);
    const auto bm = p3->displacement.laplace(mu);
    if (bl.is_infinite() || bm.is_infinite()) return ExtendedReal::infinity();
    return ExtendedReal(bl.value() + bm.value());
  }
  return ExtendedReal(offspring_factorial_moment(model.law()));
}

ExtendedReal second_moment_w(const BranchingModel& model, double lambda, double mu, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::domain, "second_moment_w needs t >= 0");
  const ExtendedReal lambda0 = abscissa(model);
  if (lambda0.is_finite() && lambda + mu >= lambda0.value()) return ExtendedReal::infinity();
  const auto psi_sum = log_laplace(model, lambda + mu);
  const auto psi_l = log_laplace(model, lambda);
  const auto psi_m = log_laplace(model, mu);
  const auto kappa = second_moment_source(model, lambda, mu);
  if (psi_sum.is_infinite() || psi_l.is_infinite() || psi_m.is_infinite() ||
      kappa.is_infinite()) {
    return ExtendedReal::infinity();
  }
  if (t == 0.0) return ExtendedReal(1.0);

  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  const double a = psi_sum.value(), k = kappa.value(), g = psi_l.value() + psi_m.value();
  auto rhs = [a, k, g](const State& w, State& dw, double s) {
    dw[0] = a * w[0] + k * std::exp(g * s);
  };
  State w{1.0};
  auto stepper = odeint::make_controlled(1e-300, 1e-10, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, w, 0.0, t, std::min(t, 1e-3));
  if (!std::isfinite(w[0])) return ExtendedReal::infinity();
  return ExtendedReal(w[0]);
}

AssumptionReport check_assumptions(const BranchingModel& model) {
  AssumptionReport r;
  const auto psi0 = log_laplace(model, 0.0);
  r.a1.pass = psi0.is_finite() && psi0.value() > 0.0;
  r.a1.diagnostic = psi0.is_finite() ? "psi(0) = " + fmt(psi0.value()) : "psi(0) = inf";

  ExtendedReal lambda0 = ExtendedReal::infinity();
  try {
    lambda0 = abscissa(model);
    r.a2.pass = true;
    r.a2.diagnostic = lambda0.is_finite() ? "lambda_0 = " + fmt(lambda0.value())
                                          : "lambda_0 unbounded";
  } catch (const Error& e) {
    r.a2.diagnostic = e.what();
  }

  if (r.a1.pass && r.a2.pass) {
    try {
      r.speed = minimal_speed(model);
      r.a3.pass = true;
      r.a3.diagnostic = "lambda* = " + fmt(r.speed->lambda_star) +
                        ", c* = " + fmt(r.speed->c_star);
    } catch (const Error& e) {
      r.a3.diagnostic = e.what();
    }
  } else {
    r.a3.diagnostic = "requires A1 and A2";
  }

  if (r.speed) {
    const auto& s = *r.speed;
    const bool interior = lambda0.is_infinite() || s.lambda_star < lambda0.value();
    const double slope_gap = std::abs(s.psi_prime_at_star - s.c_star);
    const bool slope_ok = slope_gap <= 1e-6 * s.c_star;
    r.w_values = {second_moment_w(model, 0.0, 0.0, 1.0),
                  second_moment_w(model, 0.0, s.lambda_star, 1.0),
                  second_moment_w(model, s.delta, s.lambda_star, 1.0)};
    const bool w_ok = std::all_of(r.w_values.begin(), r.w_values.end(),
                                  [](const ExtendedReal& w) { return w.is_finite(); });
    r.a4.pass = interior && slope_ok && w_ok;
    std::ostringstream os;
    os << "delta = " << fmt(s.delta) << ", |psi'(l*) - c*| = " << fmt(slope_gap)
       << (interior ? "" : ", lambda* not below lambda_0") << (w_ok ? "" : ", some w infinite");
    r.a4.diagnostic = os.str();
  } else {
    r.a4.diagnostic = "requires A3";
  }

  r.non_lattice.pass = !model.lattice();
  r.non_lattice.diagnostic = model.lattice() ? "all particles of X_1 sit on the starting point"
                                             : "displacements have a density";
  return r;
}

ExtendedReal psi_per_sampling(const BranchingModel& model, int k, double lambda) {
  if (k < 0) throw Error(ErrorCode::domain, "sampling exponent k must be nonnegative");
  const auto psi = log_laplace(model, lambda);
  if (psi.is_infinite()) return psi;
  return ExtendedReal(std::ldexp(psi.value(), -k));
}

}  // namespace kpplab
