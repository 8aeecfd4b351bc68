#include <cmath>

#include "doctest.h"
#include "kpplab/analyze.hpp"
#include "kpplab/error.hpp"
#include "kpplab/spectral.hpp"
#include "support.hpp"

using namespace kpplab;
using namespace kpplab::testing;

namespace {
std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1.0);
  return v;
}
ProfileEstimate gumbel(const std::vector<double>& x, double shift) {
  ProfileEstimate p;
  p.x_grid = x;
  for (double y : x) p.values.push_back(std::exp(-std::exp(-(y - shift))));
  p.standard_error.assign(x.size(), 0.0);
  return p;
}
MartingaleTrace trace(std::size_t r, std::vector<double> d) {
  MartingaleTrace t;
  t.replica = r;
  for (std::size_t n = 0; n < d.size(); ++n) t.entries.push_back({int(n), 1.0, d[n]});
  return t;
}
}  // namespace

TEST_CASE("estimate_d_infinity") {
  const auto d = estimate_d_infinity({trace(0, {0, 0, 0, 0, 0}), trace(1, {0, 0, 0, 0, 0})}, 4);
  CHECK(d.samples == std::vector<double>{0.0, 0.0});
  const auto c = estimate_d_infinity({trace(0, {0.0, 2.0, 2.0, 2.0, 2.0})}, 4);
  CHECK(c.cauchy_gap == 0.0);
  const auto neg = estimate_d_infinity({trace(0, {0.0, 1.0, 3.0, -0.5, -0.2})}, 4);
  CHECK(neg.samples[0] == 0.0);
  CHECK(neg.cauchy_gap == doctest::Approx(3.2));
  try {
    estimate_d_infinity({trace(0, {0.0, 1.0})}, 4);
    FAIL("expected insufficient_horizon");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_horizon);
  }
}

TEST_CASE("phi_from_martingale") {
  const auto x = linspace(-10, 10, 81);
  DInfinityEnsemble zeros{{0, 0, 0}, 4, 0};
  const auto one = phi_from_martingale(zeros, 1.0, x);
  for (double v : one.values) CHECK(v == 1.0);
  DInfinityEnsemble ones{std::vector<double>(20, 1.0), 4, 0};
  const auto g = phi_from_martingale(ones, 1.0, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(g.values[i] == doctest::Approx(std::exp(-std::exp(-x[i]))));
    CHECK(g.standard_error[i] <= 1e-12);
  }
  // Mixed ensemble: monotone in x, tails at 1 and at P[D = 0].
  DInfinityEnsemble mixed;
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) mixed.samples.push_back(rng.uniform() < 0.2 ? 0.0 : rng.exponential());
  const auto xs = linspace(-30, 30, 121);
  const auto p = phi_from_martingale(mixed, 1.0, xs, 500, 7);
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(p.values[i] >= p.values[i - 1]);
  double zero_frac = 0.0;
  for (double v : mixed.samples) zero_frac += v == 0.0;
  zero_frac /= double(mixed.samples.size());
  CHECK(std::abs(p.values.front() - zero_frac) <= 1e-9);
  CHECK(std::abs(p.values.back() - 1.0) <= 1e-9);
  CHECK(p.standard_error[60] > 0.0);
  CHECK(p.source == ProfileSource::martingale_mc);
  // Larger D gives a smaller profile.
  DInfinityEnsemble bigger = mixed;
  for (double& v : bigger.samples) v *= 2.0;
  const auto q = phi_from_martingale(bigger, 1.0, xs, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(q.values[i] <= p.values[i]);
}

TEST_CASE("recentered_cdf") {
  const auto x = linspace(-5, 5, 11);
  std::vector<MinimumSample> extinct(5);
  for (auto& s : extinct) {
    s.t = 4.0;
    s.extinct = true;
    s.m = std::numeric_limits<double>::infinity();
  }
  for (double v : recentered_cdf(extinct, 4.0, 1.0, 1.5, x).values) CHECK(v == 1.0);

  const double t = 4.0, ls = 1.0, cs = 1.5;
  MinimumSample one;
  one.t = t;
  one.m = -cs * t + 1.5 / ls * std::log(t);
  const auto step = recentered_cdf({one}, t, ls, cs, x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(step.values[i] == (x[i] >= 0.0 ? 1.0 : 0.0));
  CHECK_THROWS_AS(recentered_cdf({}, t, ls, cs, x), Error);

  std::vector<MinimumSample> many;
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    MinimumSample s;
    s.t = t;
    s.m = rng.normal(-cs * t, 2.0);
    many.push_back(s);
  }
  const auto p = recentered_cdf(many, t, ls, cs, linspace(-30, 30, 61));
  for (std::size_t i = 1; i < p.values.size(); ++i) CHECK(p.values[i] >= p.values[i - 1]);
  CHECK(p.values.front() == 0.0);
  CHECK(p.values.back() == 1.0);
}

TEST_CASE("align_shift recovers shifts") {
  const auto x = linspace(-20, 20, 801);
  const double cell = x[1] - x[0];
  const auto p = gumbel(x, 0.0);
  for (double s : {-5.0, -1.0, 0.0, 1.0, 2.5, 5.0}) {
    const auto q = gumbel(x, s);
    const auto a = align_shift(p, q);
    CHECK(std::abs(a.shift - s) <= cell);
    CHECK(a.sup_dist <= 1e-3);
  }
  const auto a = align_shift(p, p);
  CHECK(std::abs(a.shift) <= 1e-6);
  CHECK(a.sup_dist <= 1e-9);

  ProfileEstimate low = p, high = p;
  for (double& v : low.values) v *= 0.1;
  for (double& v : high.values) v = 0.5 + 0.1 * v;
  try {
    align_shift(low, high);
    FAIL("expected alignment error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::alignment);
  }
}

TEST_CASE("u_vs_mc on the logistic model") {
  const BranchingModel m(ConstantMotion{}, BinaryAtParent{});
  const Grid g(-2.0, 2.0, 16);
  const auto r = u_vs_mc(m, 1.0, g, 20000, 4, 1);
  // u is the Heaviside value propagated pointwise: 0 left of the origin, 1 right of it.
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(r.u_pde[i] == (g.x(i) >= 0.0 ? 1.0 : 0.0));
  }
  CHECK(r.sup_distance == 0.0);
  const auto t0 = u_vs_mc(gaussian_jump_binary(), 0.0, Grid(-10, 10, 64), 100, 1, 1);
  CHECK(t0.sup_distance == 0.0);
}

TEST_CASE("sampling consistency") {
  const auto b = bbm();
  const auto rep = sampling_consistency(b, {0, 2}, 0.0, 20000, 11, 1);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[1].t == 0.25);
  CHECK(rep.rows[1].closed_form == log_laplace(b, 0.0).value());
  CHECK(rep.all_pass());
}
