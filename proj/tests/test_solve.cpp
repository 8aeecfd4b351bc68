#include <cmath>

#include "doctest.h"
#include "kpplab/convolution.hpp"
#include "kpplab/error.hpp"
#include "kpplab/front.hpp"
#include "kpplab/pde.hpp"
#include "kpplab/picard.hpp"
#include "kpplab/solve.hpp"
#include "kpplab/spectral.hpp"
#include "kpplab/wave.hpp"
#include "support.hpp"

using namespace kpplab;
using namespace kpplab::testing;

namespace {
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double logistic(double f, double t) { return f * std::exp(-t) / (1.0 - f + f * std::exp(-t)); }
double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}
const BranchingModel logistic_model(ConstantMotion{}, BinaryAtParent{});
}  // namespace

TEST_CASE("grid invariants") {
  const Grid g(-3.0, 5.0, 256);
  CHECK(std::abs(g.dx() * 255 - 8.0) <= 1e-12);
  CHECK_THROWS_AS(Grid(0, 1, 100), Error);
  CHECK_THROWS_AS(Grid(1, 0, 128), Error);
  CHECK(g.refined().size() == 512);
}

TEST_CASE("convolution of constants and of a step") {
  const Grid g(-20.0, 20.0, 8192);
  const Kernel k = Kernel::gaussian(1.0);
  for (auto method : {ConvolutionMethod::fft, ConvolutionMethod::direct}) {
    const Field one = convolve(k, Field::constant(g, 1.0), method);
    for (double v : one.values) CHECK(std::abs(v - 1.0) <= 1e-9);
    const Field zero = convolve(k, Field::constant(g, 0.0), method);
    for (double v : zero.values) CHECK(std::abs(v) <= 1e-14);

    const Field h = convolve(k, Field::heaviside(g), method);
    std::size_t first = 0;
    while (g.x(first) < 0.0) ++first;
    // The discrete step sits half a cell left of the first nonnegative point.
    const double edge = g.x(first) - 0.5 * g.dx();
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(h.values[i] - normal_cdf(g.x(i) - edge)));
    }
    CHECK(err <= 1e-6);
    CHECK(std::abs(h.interpolate(0.0) - 0.5) <= 2.0 * g.dx());
  }
  CHECK_THROWS_AS(Convolver(Kernel::gaussian(1.0), Grid(-2.0, 2.0, 64), ConvolutionMethod::fft),
                  Error);
}

TEST_CASE("fft and direct convolution agree") {
  const Grid g(-30.0, 30.0, 2048);
  const Field f = Field::from_function(g, [](double x) { return 0.5 + 0.5 * std::tanh(x / 3); }, 0, 1);
  const Kernel k = Kernel::two_sided_exponential(2.0);
  const Field a = convolve(k, f, ConvolutionMethod::fft);
  const Field b = convolve(k, f, ConvolutionMethod::direct);
  CHECK(sup_diff(a.values, b.values) <= 1e-12);
}

TEST_CASE("stationary states and the logistic oracle") {
  const Grid g(-10.0, 10.0, 256);
  const auto m = gaussian_jump_binary();
  const Field one = pde_step(m, Field::constant(g, 1.0), 0.05);
  for (double v : one.values) CHECK(std::abs(v - 1.0) <= 1e-9);
  const Field zero = pde_step(m, Field::constant(g, 0.0), 0.05);
  for (double v : zero.values) CHECK(v == 0.0);

  const SEquationStepper st(logistic_model, Grid(-1.0, 1.0, 16));
  Field f = st.evolve(Field::constant(Grid(-1.0, 1.0, 16), 0.5), 1.0, 1e-3);
  CHECK(std::abs(f.values[3] - 1.0 / (1.0 + std::exp(1.0))) <= 1e-8);
  CHECK(std::abs(f.u_left() - 1.0 / (1.0 + std::exp(1.0))) <= 1e-8);
}

TEST_CASE("logistic error shrinks with the step") {
  const Grid g(-1.0, 1.0, 16);
  const SEquationStepper st(logistic_model, g);
  const double exact = logistic(0.5, 1.0);
  const double e1 = std::abs(st.evolve(Field::constant(g, 0.5), 1.0, 0.1).values[0] - exact);
  const double e2 = std::abs(st.evolve(Field::constant(g, 0.5), 1.0, 0.05).values[0] - exact);
  CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("complement orientation reproduces the value orientation") {
  const Grid g(-20.0, 20.0, 512);
  const auto m = gaussian_jump_binary();
  const SEquationStepper st(m, g);
  const Field u = st.evolve(Field::heaviside(g), 2.0, 0.05);
  const Field q = st.evolve(Field::heaviside(g, Orientation::complement), 2.0, 0.05);
  CHECK(sup_diff(u.u_values(), q.u_values()) <= 1e-12);
}

TEST_CASE("step size and stability errors") {
  const Grid g(-10.0, 10.0, 256);
  try {
    pde_step(bbm(), Field::heaviside(g), 0.1);
    FAIL("expected step_size");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_size);
  }
  const SEquationStepper st(gaussian_jump_binary(), g);
  CHECK(st.stability_bound() == 0.1);
  CHECK(SEquationStepper(bbm(), g).stability_bound() == doctest::Approx(0.2 * g.dx() * g.dx()));
}

TEST_CASE("Brownian front with the Laplacian") {
  const Grid g(-20.0, 20.0, 512);
  const SEquationStepper st(bbm(), g);
  const Field f = st.evolve(Field::heaviside(g, Orientation::complement), 1.0, st.stability_bound());
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(f.u(i) >= f.u(i - 1) - 1e-10);
  CHECK(f.u(0) < 1e-6);
  CHECK(f.u(g.size() - 1) == doctest::Approx(1.0));
}

TEST_CASE("picard: trivial data, logistic oracle, monotone iterates") {
  const Grid g(-1.0, 1.0, 8);
  const auto ones = picard_solve(logistic_model, Field::constant(g, 1.0), 1.0, 200, 60, 1e-12);
  for (double v : ones.field.values) CHECK(std::abs(v - 1.0) <= 1e-10);

  const auto zeros = picard_solve(logistic_model, Field::constant(g, 0.0), 1.0, 50, 10, 1e-14);
  CHECK(zeros.increments.front() == 0.0);
  for (double v : zeros.field.values) CHECK(v == 0.0);

  std::vector<double> history;
  const auto half = picard_solve(logistic_model, Field::constant(g, 0.5), 1.0, 2000, 60, 1e-12,
                                 [&](int, const Field& f) { history.push_back(f.values[0]); });
  CHECK(std::abs(half.field.values[0] - logistic(0.5, 1.0)) <= 1e-4);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] >= history[i - 1] - 1e-12);
  for (double v : history) CHECK(v <= 1.0 + 1e-12);

  CHECK_THROWS_AS(picard_solve(logistic_model, Field::constant(g, 0.5), 1.0, 100, 2, 1e-14), Error);
  CHECK_THROWS_AS(picard_solve(bbm(), Field::constant(g, 0.5), 1.0, 100, 20, 1e-8), Error);
}

TEST_CASE("picard agrees with time stepping for jump and offspring models") {
  const Grid g(-12.0, 12.0, 128);
  const auto m = gaussian_jump_binary();
  const auto p = picard_solve(m, Field::heaviside(g), 1.0, 41, 50, 1e-10);
  const Field s = SEquationStepper(m, g).evolve(Field::heaviside(g), 1.0, 0.025);
  CHECK(sup_diff(p.field.values, s.values) <= 2e-3);

  const auto m2 = static_offspring({{0, 0.2}, {2, 0.5}, {3, 0.3}});
  const auto p2 = picard_solve(m2, Field::constant(g, 0.6), 1.0, 401, 80, 1e-12);
  const Field s2 = SEquationStepper(m2, g).evolve(Field::constant(g, 0.6), 1.0, 0.01);
  CHECK(std::abs(p2.field.values[0] - s2.values[0]) <= 1e-5);

  const BranchingModel m3(ConstantMotion{}, BinaryOneDisplaced{Kernel::gaussian(1.0)});
  const auto p3 = picard_solve(m3, Field::heaviside(g), 1.0, 201, 80, 1e-12);
  const Field s3 = SEquationStepper(m3, g).evolve(Field::heaviside(g), 1.0, 0.01);
  CHECK(sup_diff(p3.field.values, s3.values) <= 1e-4);
}

TEST_CASE("solve_v") {
  // x = 0 sits on a node so no interpolation enters the comparison.
  const Grid g(-16.0, 15.9375, 512);
  const auto m = gaussian_jump_binary();
  const Field v = solve_v(m, 0.0, g, 1.0, 0.01);
  CHECK(std::abs(v.interpolate(0.0) - std::exp(1.0)) <= 1e-8);
  const Field v0 = solve_v(m, 0.8, g, 0.0, 0.01);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(v0.values[i] == std::exp(-0.8 * g.x(i)));
  const Field b = solve_v(bbm(), 1.0, g, 1.0, 0.01);
  CHECK(std::abs(b.interpolate(0.0) - std::exp(1.5)) <= 1e-8);
  const Grid wide(-40.0, 39.921875, 1024);
  for (const auto& model : {m, bbm(), jump_binary(Kernel::two_sided_exponential(2.0))}) {
    for (double l : {0.3, 1.0}) {
      const double at0 = solve_v(model, l, wide, 1.0, 0.01).interpolate(0.0);
      CHECK(std::abs(std::log(at0) - log_laplace(model, l).value()) <= 1e-6);
    }
  }
  CHECK_THROWS_AS(solve_v(m, 50.0, g, 1.0, 0.01), Error);
}

TEST_CASE("front position and fitting") {
  const Grid g(-10.0, 10.0, 1024);
  const double h0 = front_position(Field::heaviside(g));
  CHECK(std::abs(h0) <= g.dx());
  const Field phi = Field::from_function(g, [](double x) { return normal_cdf(x - 3.0); }, 0, 1);
  CHECK(std::abs(front_position(phi) - 3.0) <= g.dx() * g.dx());
  try {
    front_position(Field::constant(g, 0.4));
    FAIL("expected no_front");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_front);
  }

  FrontTrace tr;
  for (int i = 1; i <= 40; ++i) {
    const double t = 0.5 * i;
    tr.entries.push_back({t, 1.5 * t - 1.06 * std::log(t) + 2.0});
  }
  const auto fit = measure_front(tr, 1.0, 1.0, 20.0);
  CHECK(fit.c_est == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(fit.log_slope == doctest::Approx(-1.06).epsilon(1e-9));
  CHECK(fit.intercept == doctest::Approx(2.0).epsilon(1e-9));
  FrontTrace lin;
  for (int i = 1; i <= 20; ++i) lin.entries.push_back({double(i), std::exp(0.5) * i});
  const auto f2 = measure_front(lin, 1.0, 1.0, 20.0);
  CHECK(f2.c_est == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
  CHECK(std::abs(f2.log_slope) <= 1e-9);
  CHECK(std::abs(f2.intercept) <= 1e-9);
  CHECK_THROWS_AS(measure_front(lin, 1.0, 1.0, 5.0), Error);
}

TEST_CASE("comparison and sandwich ordering") {
  const Grid g(-20.0, 20.0, 512);
  const double h = 2.0;
  const Field lower = Field::heaviside(g);
  const Field upper = Field::heaviside(g, Orientation::value, h);
  const Field middle = Field::from_function(
      g, [&](double x) { return 0.5 + 0.5 * std::tanh(4.0 * (x + h / 2)); }, 0.0, 1.0);
  for (const auto& m : {gaussian_jump_binary(), bbm()}) {
    const SEquationStepper st(m, g);
    const double dt = std::min(0.05, st.stability_bound());
    std::vector<Field> f = {lower.with_orientation(Orientation::complement),
                            middle.with_orientation(Orientation::complement),
                            upper.with_orientation(Orientation::complement)};
    for (int r = 0; r < 5; ++r) {
      for (auto& x : f) x = st.evolve(std::move(x), x.t + 0.5, dt);
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(f[0].u(i) <= f[1].u(i) + 1e-8);
        CHECK(f[1].u(i) <= f[2].u(i) + 1e-8);
      }
    }
  }
}

TEST_CASE("wave residual of constants and of a converged wave") {
  const auto m = gaussian_jump_binary();
  const Grid g(-30.0, 30.0, 512);
  CHECK(wave_residual(Field::constant(g, 1.0), 1.3, m, 0.05) <= 1e-9);
  CHECK(wave_residual(Field::constant(g, 0.0), 1.3, m, 0.05) == 0.0);

  const auto sp = minimal_speed(m);
  const Field guess = Field::from_function(
      g, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, 0.0, 1.0, Orientation::complement);
  const Field w = converge_wave(m, sp.c_star, guess);
  CHECK(std::abs(front_position(w) - 0.0) <= g.dx());
  CHECK(wave_residual(w, sp.c_star, m, 0.05) <= 5 * g.dx() * g.dx() + 5 * 0.05);
}
