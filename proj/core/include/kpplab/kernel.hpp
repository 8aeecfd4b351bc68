#pragma once

#include <string>
#include <variant>
#include <vector>

#include "kpplab/extended.hpp"
#include "kpplab/rng.hpp"

namespace kpplab {

struct GaussianFamily {
  double sigma;
};

/// Density (beta/2) exp(-beta |x|).
struct TwoSidedExponentialFamily {
  double beta;
};

/// Uniform density on [-r, r].
struct UniformFamily {
  double r;
};

/// Piecewise-linear density through (x[i], density[i]); zero outside the grid.
struct TabulatedFamily {
  std::vector<double> x;
  std::vector<double> density;
  std::vector<double> cumulative;  // trapezoid mass up to x[i]
};

using KernelFamily =
    std::variant<GaussianFamily, TwoSidedExponentialFamily, UniformFamily, TabulatedFamily>;

/// Probability density on the real line used for jumps (a) and for the
/// displaced child of the P3 branching law (b).
class Kernel {
 public:
  static Kernel gaussian(double sigma);
  static Kernel two_sided_exponential(double beta);
  static Kernel uniform(double r);
  /// Throws invalid_kernel unless x is strictly increasing, densities are
  /// finite and nonnegative, and the trapezoid mass is 1 within 1e-9. With
  /// `normalize` the table is rescaled to unit mass first.
  static Kernel tabulated(std::vector<double> x, std::vector<double> density,
                          bool normalize = false);

  const KernelFamily& family() const { return family_; }
  std::string family_name() const;
  bool symmetric() const;

  double density(double x) const;

  /// (La)(lambda) = int a(x) exp(-lambda x) dx, or the infinity sentinel.
  /// Throws range when the transform is finite but exceeds the double range.
  ExtendedReal laplace(double lambda) const;
  /// log of laplace(); finite wherever the transform converges.
  ExtendedReal log_laplace(double lambda) const;
  /// d/dlambda of laplace(); only meaningful where the transform is finite.
  double laplace_derivative(double lambda) const;
  /// sup{s > 0 : laplace(s) finite}; the sentinel means unbounded.
  ExtendedReal abscissa() const;

  double mean() const;
  double second_moment() const;

  /// Radius R with int_{|x|>R} a(x) exp(tilt x) dx below `tail`.
  double truncation_radius(double tail = 1e-12, double tilt = 0.0) const;

  double sample(Rng& rng) const;

  /// The kernel of -J when J has this density.
  Kernel reflected() const;

 private:
  explicit Kernel(KernelFamily f) : family_(std::move(f)) {}
  KernelFamily family_;
};

}  // namespace kpplab
