#include "kpplab/picard.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "kpplab/convolution.hpp"
#include "kpplab/error.hpp"

namespace kpplab {

namespace {

// A function on the grid together with its two constant limits.
struct Slice {
  std::vector<double> v;
  double left = 0.0;
  double right = 0.0;
};

// Number of Poisson(t) terms needed for a tail below 1e-10.
std::size_t poisson_terms(double t) {
  double p = std::exp(-t), cdf = p;
  std::size_t n = 0;
  while (1.0 - cdf > 1e-10 && n < 10000) {
    ++n;
    p *= t / static_cast<double>(n);
    cdf += p;
  }
  return n + 1;
}

class Branching {
 public:
  Branching(const BranchingModel& model, const Grid& grid) : law_(model.law()) {
    if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&law_)) {
      conv_.emplace(p3->displacement.reflected(), grid, ConvolutionMethod::direct);
    }
  }

  double pointwise(double u, double conv) const {
    if (std::holds_alternative<BinaryAtParent>(law_)) return u * u;
    if (const auto* p2 = std::get_if<OffspringAtParent>(&law_)) {
      double total = 0.0, b = 0.0;
      for (const auto& [n, p] : p2->probabilities) {
        b += p * std::pow(u, n);
        total += p;
      }
      return (1.0 - total) + b;
    }
    return u * conv;
  }

  Slice apply(const Slice& u) const {
    Slice out;
    out.v.resize(u.v.size());
    std::vector<double> c(u.v.size(), 0.0);
    if (conv_) conv_->apply(u.v, u.left, u.right, c);
    for (std::size_t i = 0; i < u.v.size(); ++i) out.v[i] = pointwise(u.v[i], c[i]);
    out.left = pointwise(u.left, u.left);
    out.right = pointwise(u.right, u.right);
    return out;
  }

 private:
  BranchingLaw law_;
  std::optional<Convolver> conv_;
};

}  // namespace

PicardResult picard_solve(const BranchingModel& model, const Field& f_in, double t,
                          std::size_t n_time, int max_iter, double tol,
                          const PicardObserver& observer) {
  const std::string tag = model.tag();
  if (tag != "X1+P1" && tag != "X1+P2" && tag != "X1+P3" && tag != "X2+P1") {
    throw Error(ErrorCode::invalid_model, "picard_solve has no explicit mild form for " + tag);
  }
  if (!(t >= 0.0)) throw Error(ErrorCode::domain, "picard_solve needs t >= 0");
  if (n_time < 2) throw Error(ErrorCode::domain, "picard_solve needs n_time >= 2");
  if (max_iter < 1) throw Error(ErrorCode::domain, "picard_solve needs max_iter >= 1");

  const Field f = f_in.with_orientation(Orientation::value);
  for (double v : f.values) {
    if (v < 0.0 || v > 1.0) throw Error(ErrorCode::domain, "initial data must lie in [0,1]");
  }
  const Grid& grid = f.grid;
  const std::size_t nx = grid.size();
  const std::size_t nt = n_time;
  const double h = t / static_cast<double>(nt - 1);

  std::optional<Convolver> jump;
  if (const auto* pj = std::get_if<PureJumpMotion>(&model.motion())) {
    jump.emplace(pj->kernel.reflected(), grid, ConvolutionMethod::direct);
  }
  const std::size_t terms = jump ? poisson_terms(t) : 1;

  // powers(g)[n] = (reflected a)^{*n} g
  auto powers = [&](const Slice& g) {
    std::vector<Slice> out(terms);
    out[0] = g;
    for (std::size_t n = 1; n < terms; ++n) {
      out[n].v.resize(nx);
      out[n].left = g.left;
      out[n].right = g.right;
      jump->apply(out[n - 1].v, g.left, g.right, out[n].v);
    }
    return out;
  };
  // Jump semigroup J_s in the power basis: Poisson(s) masses.
  std::vector<std::vector<double>> coeff(nt, std::vector<double>(terms));
  for (std::size_t j = 0; j < nt; ++j) {
    const double s = static_cast<double>(j) * h;
    double p = std::exp(-s);
    for (std::size_t n = 0; n < terms; ++n) {
      if (n > 0) p *= s / static_cast<double>(n);
      coeff[j][n] = jump ? p : 1.0;
    }
  }
  // Product trapezoid for int e^{-s} g(s) ds with g linear on each cell:
  // left and right node weights of a cell starting at s, divided by e^{-s}.
  const double em = std::expm1(-h);
  const double w_left = h > 0.0 ? (h + em) / h : 0.0;
  const double w_right = h > 0.0 ? (-em - h * std::exp(-h)) / h : 0.0;
  auto accumulate = [&](Slice& acc, const std::vector<Slice>& pw, double weight,
                        const std::vector<double>& c) {
    for (std::size_t n = 0; n < terms; ++n) {
      const double a = weight * c[n];
      if (a == 0.0) continue;
      for (std::size_t i = 0; i < nx; ++i) acc.v[i] += a * pw[n].v[i];
      acc.left += a * pw[n].left;
      acc.right += a * pw[n].right;
    }
  };

  // Free term T0_{t_i} f for every mesh time.
  const Slice f_slice{f.values, f.left_limit, f.right_limit};
  const auto f_powers = powers(f_slice);
  std::vector<Slice> free_term(nt, Slice{std::vector<double>(nx, 0.0), 0.0, 0.0});
  for (std::size_t i = 0; i < nt; ++i) {
    accumulate(free_term[i], f_powers, std::exp(-static_cast<double>(i) * h), coeff[i]);
  }

  const Branching branching(model, grid);
  std::vector<Slice> u(nt, Slice{std::vector<double>(nx, 0.0), 0.0, 0.0});

  PicardResult result{Field(grid, std::vector<double>(nx, 0.0), t, 0.0, 0.0), 0, {}};
  for (int iter = 1; iter <= max_iter; ++iter) {
    std::vector<std::vector<Slice>> b_powers(nt);
    for (std::size_t m = 0; m < nt; ++m) b_powers[m] = powers(branching.apply(u[m]));

    double increment = 0.0;
    std::vector<Slice> next(nt);
    for (std::size_t i = 0; i < nt; ++i) {
      Slice acc = free_term[i];
      for (std::size_t j = 0; j <= i && i > 0; ++j) {
        double w = 0.0;
        if (j < i) w += std::exp(-static_cast<double>(j) * h) * w_left;
        if (j > 0) w += std::exp(-static_cast<double>(j - 1) * h) * w_right;
        accumulate(acc, b_powers[i - j], w, coeff[j]);
      }
      for (std::size_t x = 0; x < nx; ++x) {
        increment = std::max(increment, std::abs(acc.v[x] - u[i].v[x]));
      }
      increment = std::max({increment, std::abs(acc.left - u[i].left),
                            std::abs(acc.right - u[i].right)});
      next[i] = std::move(acc);
    }
    u = std::move(next);
    result.increments.push_back(increment);
    result.iterations = iter;
    result.field = Field(grid, u.back().v, t, u.back().left, u.back().right);
    if (observer) observer(iter, result.field);
    if (increment < tol) return result;
  }
  std::ostringstream msg;
  msg << "Picard iteration did not reach tol " << tol << " in " << max_iter
      << " iterations (last increment " << result.increments.back() << ")";
  throw Error(ErrorCode::iteration_limit, msg.str());
}

}  // namespace kpplab
