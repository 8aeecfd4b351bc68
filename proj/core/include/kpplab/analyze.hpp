#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpplab/field.hpp"
#include "kpplab/model.hpp"
#include "kpplab/simulate.hpp"

namespace kpplab {

enum class ProfileSource { martingale_mc, empirical_cdf, pde_front };
const char* to_string(ProfileSource s);

/// A monotone profile sampled on a grid, with pointwise standard errors.
struct ProfileEstimate {
  std::vector<double> x_grid;
  std::vector<double> values;
  std::vector<double> standard_error;
  ProfileSource source = ProfileSource::pde_front;

  /// Linear interpolation with constant extension beyond the grid.
  double at(double x) const;
};

/// The u values of a field as a pde_front profile.
ProfileEstimate profile_from_field(const Field& field);

struct DInfinityEnsemble {
  std::vector<double> samples;
  int n_used = 0;
  double cauchy_gap = 0.0;  // max over replicas of |D_n - D_{n/2}|
};

/// D_{n_used} per replica floored at 0, with the Cauchy gap as diagnostic.
/// Throws insufficient_horizon when a trace lacks n_used or n_used / 2.
DInfinityEnsemble estimate_d_infinity(const std::vector<MartingaleTrace>& traces, int n_used);

/// phi(x) = mean of exp(-e^{-l* x} D) with bootstrap standard errors.
ProfileEstimate phi_from_martingale(const DInfinityEnsemble& d, double lambda_star,
                                    const std::vector<double>& x_grid,
                                    std::size_t resamples = 1000, std::uint64_t seed = 1);

/// Fraction of replicas with M_t + c* t - (3 / (2 l*)) ln t >= -x; extinct
/// replicas count as M_t = +inf. Binomial standard errors.
ProfileEstimate recentered_cdf(const std::vector<MinimumSample>& samples, double t,
                               double lambda_star, double c_star,
                               const std::vector<double>& x_grid);

struct Alignment {
  double shift = 0.0;
  double sup_dist = 0.0;
};

/// Shift s minimizing sup_x |p(x) - q(x + s)| over p's grid: coarse scan,
/// then golden section around the best scan point.
/// Throws alignment when the value ranges do not overlap.
Alignment align_shift(const ProfileEstimate& p, const ProfileEstimate& q);

struct UvsMc {
  double sup_distance = 0.0;
  std::vector<double> x;
  std::vector<double> u_pde;
  std::vector<double> u_mc;
  std::vector<double> standard_error;
};

/// Compares u(x, t) from the S-equation with Heaviside data against the
/// Monte Carlo frequency of M_t >= -x on the same grid.
UvsMc u_vs_mc(const BranchingModel& model, double t, const Grid& grid, std::size_t replicas,
              std::uint64_t seed, unsigned threads = 1, double dt = 0.05);

struct SamplingRow {
  int k = 0;
  double lambda = 0.0;
  double t = 0.0;              // 2^{-k}
  double scaled_estimate = 0.0;  // 2^k ln v_hat(0, 2^{-k})
  double standard_error = 0.0;   // of the scaled estimate (delta method)
  double psi = 0.0;
  double closed_form = 0.0;      // 2^k psi_per_sampling(k)
  bool pass = false;
};

struct SamplingReport {
  std::vector<SamplingRow> rows;
  bool all_pass() const;
};

/// For each k, 2^k times the Monte Carlo log-Laplace over time 2^{-k} against
/// psi(lambda) within 3 standard errors.
SamplingReport sampling_consistency(const BranchingModel& model, const std::vector<int>& k_list,
                                    double lambda, std::size_t replicas, std::uint64_t seed,
                                    unsigned threads = 1);

}  // namespace kpplab
