#include <cmath>

#include "doctest.h"
#include "kpplab/error.hpp"
#include "kpplab/simulate.hpp"
#include "kpplab/spectral.hpp"
#include "support.hpp"

using namespace kpplab;
using namespace kpplab::testing;

TEST_CASE("advance to the current time is the identity") {
  Rng rng(1);
  const Population p = Population::single(0.0);
  const Population q = advance(p, 0.0, bbm(), 1000, rng);
  CHECK(q.positions == p.positions);
  CHECK(q.time == 0.0);
  CHECK_THROWS_AS(advance(advance(p, 1.0, bbm(), 1000, rng), 0.5, bbm(), 1000, rng), Error);
}

TEST_CASE("Yule population mean") {
  const BranchingModel m(ConstantMotion{}, BinaryAtParent{});
  const int n = 100000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < n; ++r) {
    Rng rng = Rng::stream(42, r);
    const double size = double(advance(Population::single(0.0), 1.0, m, 100000, rng).positions.size());
    s += size;
    s2 += size * size;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - std::exp(1.0)) <= 4.0 * se);
}

TEST_CASE("capacity errors carry the cap") {
  Rng rng(3);
  try {
    advance(Population::single(0.0), 12.0, bbm(), 50, rng);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.code() == ErrorCode::capacity);
    CHECK(e.particles() == 50);
  }
}

TEST_CASE("prune and leftmost") {
  Population p{{0.0, 5.0, 30.0}, 1.0, 0.0};
  const Population q = prune(p, 1.0, 12.0);
  CHECK(q.positions == std::vector<double>{0.0, 5.0});
  CHECK(q.pruned_mass_bound == doctest::Approx(std::exp(-12.0)));
  const Population r = prune(q, 1.0, 12.0);
  CHECK(r.positions == q.positions);
  CHECK(r.pruned_mass_bound == q.pruned_mass_bound);
  CHECK(prune(Population::single(4.0), 2.0, 0.1).positions == std::vector<double>{4.0});
  CHECK_THROWS_AS(prune(p, 1.0, 0.0), Error);

  CHECK(*leftmost(Population{{1.5, -2.0, 0.3}, 0, 0}) == -2.0);
  CHECK_FALSE(leftmost(Population{{}, 0, 0}).has_value());
  CHECK(*leftmost(Population::single(7.0)) == 7.0);
}

TEST_CASE("martingale formulas") {
  const auto [w0, d0] = martingales(Population::single(0.0), 0, 1.3, 2.0);
  CHECK(w0 == 1.0);
  CHECK(d0 == 0.0);
  const double a = 0.7;
  const auto [w1, d1] = martingales(Population::single(a), 1, 1.0, 1.0);
  CHECK(w1 == doctest::Approx(std::exp(-a - 1)));
  CHECK(d1 == doctest::Approx((a + 1) * std::exp(-a - 1)));
}

TEST_CASE("ensembles are deterministic and skip invalid replicas") {
  const auto m = bbm();
  const auto sp = minimal_speed(m);
  RunConfig cfg;
  cfg.t_max = 4.0;
  cfg.record_times = {1.0, 2.5, 4.0};
  cfg.seed = 2024;
  const auto a = run_ensemble(m, cfg, 50, sp, 1);
  const auto b = run_ensemble(m, cfg, 50, sp, 3);
  REQUIRE(a.minima.size() == b.minima.size());
  for (std::size_t i = 0; i < a.minima.size(); ++i) {
    CHECK(a.minima[i].m == b.minima[i].m);
    CHECK(a.minima[i].replica == b.minima[i].replica);
  }
  REQUIRE(a.traces.size() == 50);
  for (std::size_t r = 0; r < 50; ++r) {
    REQUIRE(a.traces[r].entries.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(a.traces[r].entries[k].n == int(k));
      CHECK(a.traces[r].entries[k].d == b.traces[r].entries[k].d);
    }
    CHECK(a.traces[r].entries[0].d == 0.0);
  }
  CHECK(run_ensemble(m, cfg, 0, sp, 1).minima.empty());

  cfg.max_particles = 30;
  const auto c = run_ensemble(m, cfg, 20, sp, 1);
  CHECK(c.invalid.size() + c.traces.size() == 20);
  CHECK_FALSE(c.invalid.empty());

  const auto lattice = run_ensemble(static_offspring({{2, 1.0}}), RunConfig{2.0, {2.0}}, 3,
                                    std::nullopt, 1);
  CHECK_FALSE(lattice.warnings.empty());
}

TEST_CASE("run config validation") {
  RunConfig cfg;
  cfg.t_max = 2.0;
  cfg.record_times = {3.0};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.record_times = {1.0, 0.5};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.record_times = {0.5};
  cfg.prune_window = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("pruned mass bound is nondecreasing") {
  const auto m = bbm();
  const auto sp = minimal_speed(m);
  RunConfig cfg;
  cfg.t_max = 6.0;
  cfg.record_times = {2.0, 4.0, 6.0};
  cfg.prune_window = 3.0;
  cfg.seed = 9;
  Rng rng(9);
  Population p = Population::single(0.0);
  double last = 0.0;
  for (double t : cfg.record_times) {
    p = prune(advance(p, t, m, 1000000, rng), sp.lambda_star, cfg.prune_window);
    CHECK(p.pruned_mass_bound >= last);
    CHECK(p.positions.front() <= *leftmost(p) + cfg.prune_window);
    last = p.pruned_mass_bound;
  }
}

TEST_CASE("empirical_v at t = 0 and its Yule mean") {
  const auto m = gaussian_jump_binary();
  const auto v0 = empirical_v(m, 0.7, 0.0, 10, 1, 1000, 1);
  CHECK(v0.mean == 1.0);
  CHECK(v0.standard_error == 0.0);
  const auto v = empirical_v(m, 0.0, 1.0, 20000, 5, 100000, 1);
  CHECK(std::abs(v.mean - std::exp(1.0)) <= 4.0 * v.standard_error);
  CHECK_THROWS_AS(empirical_v(m, 0.0, 1.0, 0, 5, 100, 1), Error);
}

TEST_CASE("P2 extinction frequency, small ensemble") {
  const auto m = static_offspring({{0, 0.2}, {2, 0.8}});
  const auto e = extinction_frequency(m, 25.0, 3000, 77, 20000, 1);
  CHECK(std::abs(e.fraction - 0.25) <= 4.0 * e.standard_error);
}

TEST_CASE("minimum drifts left and approaches the minimal speed") {
  const auto m = bbm();
  RunConfig cfg;
  cfg.t_max = 12.0;
  cfg.record_times = {8.0, 12.0};
  cfg.seed = 5;
  const auto res = run_ensemble(m, cfg, 200, std::nullopt, 1);
  double s8 = 0.0, s12 = 0.0;
  for (const auto& x : res.minima) (x.t == 8.0 ? s8 : s12) += x.m / x.t;
  s8 /= 200.0;
  s12 /= 200.0;
  CHECK(s8 < 0.0);
  CHECK(s12 > -std::sqrt(2.0));
  CHECK(std::abs(s12 + std::sqrt(2.0)) < std::abs(s8 + std::sqrt(2.0)));
}
