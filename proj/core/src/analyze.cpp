#include "kpplab/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kpplab/error.hpp"
#include "kpplab/pde.hpp"
#include "kpplab/rng.hpp"
#include "kpplab/spectral.hpp"

namespace kpplab {

const char* to_string(ProfileSource s) {
  switch (s) {
    case ProfileSource::martingale_mc: return "martingale-mc";
    case ProfileSource::empirical_cdf: return "empirical-cdf";
    case ProfileSource::pde_front: return "pde-front";
  }
  return "unknown";
}

double ProfileEstimate::at(double x) const {
  if (x_grid.empty()) throw Error(ErrorCode::empty_sample, "profile has no points");
  if (x <= x_grid.front()) return values.front();
  if (x >= x_grid.back()) return values.back();
  const auto it = std::upper_bound(x_grid.begin(), x_grid.end(), x);
  const auto i = static_cast<std::size_t>(it - x_grid.begin());
  const double w = (x - x_grid[i - 1]) / (x_grid[i] - x_grid[i - 1]);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

ProfileEstimate profile_from_field(const Field& field) {
  ProfileEstimate p;
  p.x_grid = field.grid.points();
  p.values = field.u_values();
  p.standard_error.assign(p.values.size(), 0.0);
  p.source = ProfileSource::pde_front;
  return p;
}

DInfinityEnsemble estimate_d_infinity(const std::vector<MartingaleTrace>& traces, int n_used) {
  if (n_used < 0) throw Error(ErrorCode::domain, "n_used must be nonnegative");
  DInfinityEnsemble out;
  out.n_used = n_used;
  out.samples.reserve(traces.size());
  const int half = n_used / 2;
  for (const auto& tr : traces) {
    const MartingaleEntry* at_n = nullptr;
    const MartingaleEntry* at_half = nullptr;
    for (const auto& e : tr.entries) {
      if (e.n == n_used) at_n = &e;
      if (e.n == half) at_half = &e;
    }
    if (!at_n || !at_half) {
      std::ostringstream msg;
      msg << "replica " << tr.replica << " has no derivative martingale at n = " << n_used;
      throw Error(ErrorCode::insufficient_horizon, msg.str());
    }
    out.samples.push_back(std::max(0.0, at_n->d));
    out.cauchy_gap = std::max(out.cauchy_gap, std::abs(at_n->d - at_half->d));
  }
  return out;
}

ProfileEstimate phi_from_martingale(const DInfinityEnsemble& d, double lambda_star,
                                    const std::vector<double>& x_grid, std::size_t resamples,
                                    std::uint64_t seed) {
  const std::size_t n = d.samples.size();
  if (n == 0) throw Error(ErrorCode::empty_sample, "no D samples");
  const std::size_t g = x_grid.size();
  ProfileEstimate p;
  p.x_grid = x_grid;
  p.source = ProfileSource::martingale_mc;
  p.values.assign(g, 0.0);
  p.standard_error.assign(g, 0.0);

  // terms[j * n + i] = exp(-e^{-l* x_j} D_i)
  std::vector<double> terms(g * n);
  for (std::size_t j = 0; j < g; ++j) {
    const double scale = std::exp(-lambda_star * x_grid[j]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = d.samples[i] == 0.0 ? 1.0 : std::exp(-scale * d.samples[i]);
      terms[j * n + i] = e;
      sum += e;
    }
    p.values[j] = sum / static_cast<double>(n);
  }
  if (resamples < 2) return p;

  // Bootstrap through multiplicity counts so every grid point shares a draw.
  Rng rng(seed);
  std::vector<double> counts(n);
  std::vector<double> mean(g, 0.0), sq(g, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t b = 0; b < resamples; ++b) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[pick(rng.engine())] += 1.0;
    for (std::size_t j = 0; j < g; ++j) {
      const double* t = &terms[j * n];
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += counts[i] * t[i];
      const double est = s / static_cast<double>(n);
      const double delta = est - mean[j];
      mean[j] += delta / static_cast<double>(b + 1);
      sq[j] += delta * (est - mean[j]);
    }
  }
  for (std::size_t j = 0; j < g; ++j) {
    p.standard_error[j] = std::sqrt(sq[j] / static_cast<double>(resamples - 1));
  }
  return p;
}

ProfileEstimate recentered_cdf(const std::vector<MinimumSample>& samples, double t,
                               double lambda_star, double c_star,
                               const std::vector<double>& x_grid) {
  if (samples.empty()) throw Error(ErrorCode::empty_sample, "recentered_cdf needs samples");
  const double centre = c_star * t - (t > 0.0 ? 1.5 / lambda_star * std::log(t) : 0.0);
  std::vector<double> shifted;
  shifted.reserve(samples.size());
  for (const auto& s : samples) {
    shifted.push_back(s.extinct ? std::numeric_limits<double>::infinity() : s.m + centre);
  }
  std::sort(shifted.begin(), shifted.end());
  const double n = static_cast<double>(shifted.size());
  ProfileEstimate p;
  p.x_grid = x_grid;
  p.source = ProfileSource::empirical_cdf;
  for (double x : x_grid) {
    // Count of shifted >= -x.
    const auto below = std::lower_bound(shifted.begin(), shifted.end(), -x) - shifted.begin();
    const double f = (n - static_cast<double>(below)) / n;
    p.values.push_back(f);
    p.standard_error.push_back(std::sqrt(f * (1.0 - f) / n));
  }
  return p;
}

namespace {

double sup_distance(const ProfileEstimate& p, const ProfileEstimate& q, double s) {
  double sup = 0.0;
  for (std::size_t i = 0; i < p.x_grid.size(); ++i) {
    sup = std::max(sup, std::abs(p.values[i] - q.at(p.x_grid[i] + s)));
  }
  return sup;
}

}  // namespace

Alignment align_shift(const ProfileEstimate& p, const ProfileEstimate& q) {
  if (p.x_grid.size() < 2 || q.x_grid.size() < 2) {
    throw Error(ErrorCode::empty_sample, "align_shift needs at least two points per profile");
  }
  const auto [pmin, pmax] = std::minmax_element(p.values.begin(), p.values.end());
  const auto [qmin, qmax] = std::minmax_element(q.values.begin(), q.values.end());
  if (*pmax < *qmin || *qmax < *pmin) {
    throw Error(ErrorCode::alignment, "profiles have disjoint value ranges");
  }
  const double lo = q.x_grid.front() - p.x_grid.back();
  const double hi = q.x_grid.back() - p.x_grid.front();
  const int scan = 4000;
  const double h = (hi - lo) / scan;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= scan; ++k) {
    const double v = sup_distance(p, q, lo + k * h);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = lo + std::max(0, best - 1) * h;
  double b = lo + std::min(scan, best + 1) * h;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = sup_distance(p, q, c), fd = sup_distance(p, q, d);
  while (b - a > 1e-10 * std::max(1.0, std::abs(a))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = sup_distance(p, q, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = sup_distance(p, q, d);
    }
  }
  Alignment out{0.5 * (a + b), sup_distance(p, q, 0.5 * (a + b))};
  if (best_val < out.sup_dist) out = {lo + best * h, best_val};
  return out;
}

UvsMc u_vs_mc(const BranchingModel& model, double t, const Grid& grid, std::size_t replicas,
              std::uint64_t seed, unsigned threads, double dt) {
  if (replicas == 0) throw Error(ErrorCode::empty_sample, "u_vs_mc needs replicas");
  UvsMc out;
  out.x = grid.points();

  Field field = Field::heaviside(grid, Orientation::complement);
  if (t > 0.0) {
    const SEquationStepper stepper(model, grid);
    field = stepper.evolve(std::move(field), t, std::min(dt, stepper.stability_bound()));
  }
  out.u_pde = field.u_values();

  std::vector<double> minima(replicas);
  for_each_replica(replicas, threads, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    const Population pop = advance(Population::single(0.0), t, model, 50'000'000, rng);
    minima[r] = leftmost(pop).value_or(std::numeric_limits<double>::infinity());
  });
  std::sort(minima.begin(), minima.end());
  const double n = static_cast<double>(replicas);
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    const auto below = std::lower_bound(minima.begin(), minima.end(), -out.x[i]) - minima.begin();
    const double f = (n - static_cast<double>(below)) / n;
    out.u_mc.push_back(f);
    out.standard_error.push_back(std::sqrt(f * (1.0 - f) / n));
    out.sup_distance = std::max(out.sup_distance, std::abs(f - out.u_pde[i]));
  }
  return out;
}

bool SamplingReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const SamplingRow& r) { return r.pass; });
}

SamplingReport sampling_consistency(const BranchingModel& model, const std::vector<int>& k_list,
                                    double lambda, std::size_t replicas, std::uint64_t seed,
                                    unsigned threads) {
  const ExtendedReal psi = log_laplace(model, lambda);
  if (psi.is_infinite()) throw Error(ErrorCode::domain, "psi is infinite at lambda");
  SamplingReport report;
  for (int k : k_list) {
    if (k < 0) throw Error(ErrorCode::domain, "sampling level k must be nonnegative");
    SamplingRow row;
    row.k = k;
    row.lambda = lambda;
    row.t = std::ldexp(1.0, -k);
    row.psi = psi.value();
    row.closed_form = std::ldexp(psi_per_sampling(model, k, lambda).value(), k);
    const MeanEstimate v = empirical_v(model, lambda, row.t, replicas,
                                       stream_seed(seed, static_cast<std::uint64_t>(k)),
                                       5'000'000, threads);
    const double scale = std::ldexp(1.0, k);
    row.scaled_estimate = scale * std::log(v.mean);
    row.standard_error = scale * v.standard_error / v.mean;
    row.pass = std::abs(row.scaled_estimate - row.psi) <= 3.0 * row.standard_error;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace kpplab
