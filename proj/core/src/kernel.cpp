#include "kpplab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpplab/error.hpp"

namespace kpplab {

namespace {

// Largest argument for which exp() stays finite with some headroom.
constexpr double kMaxExponent = 700.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::invalid_kernel, std::string(what) + " must be positive and finite");
  }
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

// Two-sided Gaussian quantile: smallest z with P(|Z| > z) <= tail.
double gaussian_tail_quantile(double tail) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::numbers::sqrt2) > tail) lo = mid; else hi = mid;
  }
  return hi;
}

}  // namespace

Kernel Kernel::gaussian(double sigma) {
  require_positive(sigma, "gaussian sigma");
  return Kernel(GaussianFamily{sigma});
}

Kernel Kernel::two_sided_exponential(double beta) {
  require_positive(beta, "two_sided_exponential beta");
  return Kernel(TwoSidedExponentialFamily{beta});
}

Kernel Kernel::uniform(double r) {
  require_positive(r, "uniform r");
  return Kernel(UniformFamily{r});
}

Kernel Kernel::tabulated(std::vector<double> x, std::vector<double> density, bool normalize) {
  if (x.size() < 2 || x.size() != density.size()) {
    throw Error(ErrorCode::invalid_kernel,
                "tabulated kernel needs at least two (x, density) pairs of equal length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(density[i])) {
      throw Error(ErrorCode::invalid_kernel, "tabulated kernel has non-finite entries");
    }
    if (density[i] < 0.0) {
      throw Error(ErrorCode::invalid_kernel, "tabulated density is negative at x=" +
                                                 std::to_string(x[i]));
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw Error(ErrorCode::invalid_kernel, "tabulated grid is not strictly increasing");
    }
  }
  double mass = trapezoid(x, density);
  if (normalize) {
    if (!(mass > 0.0)) throw Error(ErrorCode::invalid_kernel, "tabulated kernel has zero mass");
    for (auto& d : density) d /= mass;
    mass = trapezoid(x, density);
  }
  if (std::abs(mass - 1.0) > 1e-9) {
    throw Error(ErrorCode::invalid_kernel,
                "tabulated kernel mass is " + std::to_string(mass) + ", expected 1");
  }
  std::vector<double> cumulative(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + 0.5 * (x[i] - x[i - 1]) * (density[i] + density[i - 1]);
  }
  return Kernel(TabulatedFamily{std::move(x), std::move(density), std::move(cumulative)});
}

std::string Kernel::family_name() const {
  return std::visit(overloaded{
                        [](const GaussianFamily&) { return std::string("gaussian"); },
                        [](const TwoSidedExponentialFamily&) {
                          return std::string("two_sided_exponential");
                        },
                        [](const UniformFamily&) { return std::string("uniform"); },
                        [](const TabulatedFamily&) { return std::string("tabulated"); },
                    },
                    family_);
}

bool Kernel::symmetric() const {
  if (const auto* t = std::get_if<TabulatedFamily>(&family_)) {
    const std::size_t n = t->x.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(t->x[i] + t->x[n - 1 - i]) > 1e-12 ||
          std::abs(t->density[i] - t->density[n - 1 - i]) > 1e-12) {
        return false;
      }
    }
  }
  return true;
}

double Kernel::density(double x) const {
  return std::visit(
      overloaded{
          [x](const GaussianFamily& g) {
            const double z = x / g.sigma;
            return std::exp(-0.5 * z * z) / (g.sigma * std::sqrt(2.0 * std::numbers::pi));
          },
          [x](const TwoSidedExponentialFamily& e) {
            return 0.5 * e.beta * std::exp(-e.beta * std::abs(x));
          },
          [x](const UniformFamily& u) { return std::abs(x) <= u.r ? 0.5 / u.r : 0.0; },
          [x](const TabulatedFamily& t) {
            if (x < t.x.front() || x > t.x.back()) return 0.0;
            auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
            if (it == t.x.end()) return t.density.back();
            const auto i = static_cast<std::size_t>(it - t.x.begin());
            const double w = (x - t.x[i - 1]) / (t.x[i] - t.x[i - 1]);
            return (1.0 - w) * t.density[i - 1] + w * t.density[i];
          },
      },
      family_);
}

ExtendedReal Kernel::log_laplace(double lambda) const {
  return std::visit(
      overloaded{
          [lambda](const GaussianFamily& g) {
            return ExtendedReal(0.5 * lambda * lambda * g.sigma * g.sigma);
          },
          [lambda](const TwoSidedExponentialFamily& e) {
            if (std::abs(lambda) >= e.beta) return ExtendedReal::infinity();
            const double b2 = e.beta * e.beta;
            return ExtendedReal(-std::log1p(-lambda * lambda / b2));
          },
          [lambda](const UniformFamily& u) {
            const double z = std::abs(lambda * u.r);
            if (z < 1e-4) {
              const double z2 = z * z;
              return ExtendedReal(z2 / 6.0 - z2 * z2 / 180.0);
            }
            if (z < 20.0) return ExtendedReal(std::log(std::sinh(z) / z));
            // log(sinh z / z) = z - log(2 z) + log(1 - e^{-2z})
            return ExtendedReal(z - std::log(2.0 * z) + std::log1p(-std::exp(-2.0 * z)));
          },
          [lambda](const TabulatedFamily& t) {
            // Log-sum-exp form of the trapezoid rule; finite for every lambda.
            double top = -std::numeric_limits<double>::infinity();
            for (double x : t.x) top = std::max(top, -lambda * x);
            double s = 0.0;
            for (std::size_t i = 1; i < t.x.size(); ++i) {
              s += 0.5 * (t.x[i] - t.x[i - 1]) *
                   (t.density[i] * std::exp(-lambda * t.x[i] - top) +
                    t.density[i - 1] * std::exp(-lambda * t.x[i - 1] - top));
            }
            return ExtendedReal(top + std::log(s));
          },
      },
      family_);
}

ExtendedReal Kernel::laplace(double lambda) const {
  const ExtendedReal l = log_laplace(lambda);
  if (l.is_infinite()) return l;
  if (l.value() > kMaxExponent) {
    throw Error(ErrorCode::range, "Laplace transform of the " + family_name() +
                                      " kernel is finite but exceeds the double range");
  }
  return ExtendedReal(std::exp(l.value()));
}

double Kernel::laplace_derivative(double lambda) const {
  return std::visit(
      overloaded{
          [lambda](const GaussianFamily& g) {
            const double s2 = g.sigma * g.sigma;
            return lambda * s2 * std::exp(0.5 * lambda * lambda * s2);
          },
          [lambda](const TwoSidedExponentialFamily& e) {
            const double b2 = e.beta * e.beta;
            const double d = b2 - lambda * lambda;
            return 2.0 * b2 * lambda / (d * d);
          },
          [lambda](const UniformFamily& u) {
            const double z = lambda * u.r;
            if (std::abs(z) < 1e-4) return u.r * (z / 3.0 + z * z * z / 30.0);
            return u.r * (z * std::cosh(z) - std::sinh(z)) / (z * z);
          },
          [lambda](const TabulatedFamily& t) {
            double s = 0.0;
            for (std::size_t i = 1; i < t.x.size(); ++i) {
              const double x0 = t.x[i - 1], x1 = t.x[i];
              s += 0.5 * (x1 - x0) *
                   (x1 * t.density[i] * std::exp(-lambda * x1) +
                    x0 * t.density[i - 1] * std::exp(-lambda * x0));
            }
            return -s;
          },
      },
      family_);
}

ExtendedReal Kernel::abscissa() const {
  if (const auto* e = std::get_if<TwoSidedExponentialFamily>(&family_)) {
    return ExtendedReal(e->beta);
  }
  // Gaussian and compactly supported kernels have entire transforms.
  return ExtendedReal::infinity();
}

namespace {
// Exact integral of x^k d(x) for the piecewise-linear density (Simpson is
// exact for the cubic integrand on each segment).
double tabulated_moment(const TabulatedFamily& t, int k) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.x.size(); ++i) {
    const double x0 = t.x[i - 1], x1 = t.x[i], xm = 0.5 * (x0 + x1);
    const double d0 = t.density[i - 1], d1 = t.density[i], dm = 0.5 * (d0 + d1);
    s += (x1 - x0) / 6.0 *
         (std::pow(x0, k) * d0 + 4.0 * std::pow(xm, k) * dm + std::pow(x1, k) * d1);
  }
  return s;
}
}  // namespace

double Kernel::mean() const {
  if (const auto* t = std::get_if<TabulatedFamily>(&family_)) return tabulated_moment(*t, 1);
  return 0.0;
}

double Kernel::second_moment() const {
  return std::visit(overloaded{
                        [](const GaussianFamily& g) { return g.sigma * g.sigma; },
                        [](const TwoSidedExponentialFamily& e) { return 2.0 / (e.beta * e.beta); },
                        [](const UniformFamily& u) { return u.r * u.r / 3.0; },
                        [](const TabulatedFamily& t) { return tabulated_moment(t, 2); },
                    },
                    family_);
}

double Kernel::truncation_radius(double tail, double tilt) const {
  return std::visit(
      overloaded{
          [&](const GaussianFamily& g) {
            // a(x) exp(tilt x) is a scaled normal density centred at tilt sigma^2.
            const double scale = std::exp(0.5 * tilt * tilt * g.sigma * g.sigma);
            return std::abs(tilt) * g.sigma * g.sigma +
                   g.sigma * gaussian_tail_quantile(tail / scale);
          },
          [&](const TwoSidedExponentialFamily& e) {
            const double rate = e.beta - std::abs(tilt);
            if (!(rate > 0.0)) {
              throw Error(ErrorCode::domain, "tilt outside the kernel's Laplace strip");
            }
            return std::max(0.0, std::log(e.beta / (rate * tail))) / rate;
          },
          [](const UniformFamily& u) { return u.r; },
          [](const TabulatedFamily& t) {
            return std::max(std::abs(t.x.front()), std::abs(t.x.back()));
          },
      },
      family_);
}

double Kernel::sample(Rng& rng) const {
  return std::visit(
      overloaded{
          [&rng](const GaussianFamily& g) { return rng.normal(0.0, g.sigma); },
          [&rng](const TwoSidedExponentialFamily& e) {
            const double m = rng.exponential(e.beta);
            return rng.coin() ? m : -m;
          },
          [&rng](const UniformFamily& u) { return rng.uniform(-u.r, u.r); },
          [&rng](const TabulatedFamily& t) {
            const double target = rng.uniform() * t.cumulative.back();
            auto it = std::upper_bound(t.cumulative.begin(), t.cumulative.end(), target);
            std::size_t i = static_cast<std::size_t>(it - t.cumulative.begin());
            i = std::clamp<std::size_t>(i, 1, t.x.size() - 1);
            const double h = t.x[i] - t.x[i - 1];
            const double d0 = t.density[i - 1], d1 = t.density[i];
            const double m = target - t.cumulative[i - 1];
            // Solve d0 h s + (d1 - d0) h s^2 / 2 = m for s in [0, 1].
            const double qa = 0.5 * (d1 - d0) * h, qb = d0 * h;
            double s;
            if (std::abs(qa) < 1e-14 * std::max(1.0, qb)) {
              s = qb > 0.0 ? m / qb : 0.5;
            } else {
              const double disc = std::max(0.0, qb * qb + 4.0 * qa * m);
              s = 2.0 * m / (qb + std::sqrt(disc));
            }
            return t.x[i - 1] + std::clamp(s, 0.0, 1.0) * h;
          },
      },
      family_);
}

Kernel Kernel::reflected() const {
  if (const auto* t = std::get_if<TabulatedFamily>(&family_)) {
    std::vector<double> x(t->x.rbegin(), t->x.rend());
    std::vector<double> d(t->density.rbegin(), t->density.rend());
    for (auto& v : x) v = -v;
    return tabulated(std::move(x), std::move(d));
  }
  return *this;
}

}  // namespace kpplab
