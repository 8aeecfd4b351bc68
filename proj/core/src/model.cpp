#include "kpplab/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kpplab/error.hpp"

namespace kpplab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

OffspringAtParent make_offspring_law(std::vector<std::pair<int, double>> probabilities) {
  std::map<int, double> merged;
  double total = 0.0;
  for (const auto& [n, p] : probabilities) {
    if (n < 0) throw Error(ErrorCode::invalid_model, "offspring count must be nonnegative");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::invalid_model, "offspring probability outside [0,1]");
    }
    merged[n] += p;
    total += p;
  }
  if (total > 1.0 + 1e-12) {
    throw Error(ErrorCode::invalid_model, "offspring probabilities sum to more than 1");
  }
  OffspringAtParent law;
  for (const auto& [n, p] : merged) {
    if (p > 0.0) law.probabilities.emplace_back(n, p);
  }
  return law;
}

BranchingModel::BranchingModel(Motion motion, BranchingLaw law, std::string label)
    : motion_(std::move(motion)), law_(std::move(law)), label_(std::move(label)) {
  if (const auto* p2 = std::get_if<OffspringAtParent>(&law_)) {
    law_ = make_offspring_law(p2->probabilities);
  }
  if (label_.empty()) label_ = tag();
}

std::string motion_tag(const Motion& motion) {
  return std::visit(overloaded{
                        [](const ConstantMotion&) { return std::string("X1"); },
                        [](const PureJumpMotion&) { return std::string("X2"); },
                        [](const BrownianMotion&) { return std::string("X3"); },
                    },
                    motion);
}

std::string law_tag(const BranchingLaw& law) {
  return std::visit(overloaded{
                        [](const BinaryAtParent&) { return std::string("P1"); },
                        [](const OffspringAtParent&) { return std::string("P2"); },
                        [](const BinaryOneDisplaced&) { return std::string("P3"); },
                    },
                    law);
}

std::string BranchingModel::tag() const { return motion_tag(motion_) + "+" + law_tag(law_); }

bool BranchingModel::lattice() const {
  return std::holds_alternative<ConstantMotion>(motion_) &&
         !std::holds_alternative<BinaryOneDisplaced>(law_);
}

ExtendedReal laplace_transform(const Kernel& kernel, double lambda) {
  return kernel.laplace(lambda);
}

double offspring_mean(const BranchingLaw& law) {
  return std::visit(overloaded{
                        [](const BinaryAtParent&) { return 2.0; },
                        [](const OffspringAtParent& p) {
                          double m = 0.0;
                          for (const auto& [n, pn] : p.probabilities) m += n * pn;
                          return m;
                        },
                        [](const BinaryOneDisplaced&) { return 2.0; },
                    },
                    law);
}

double offspring_factorial_moment(const BranchingLaw& law) {
  return std::visit(overloaded{
                        [](const BinaryAtParent&) { return 2.0; },
                        [](const OffspringAtParent& p) {
                          double m = 0.0;
                          for (const auto& [n, pn] : p.probabilities)
                            m += static_cast<double>(n) * (n - 1) * pn;
                          return m;
                        },
                        [](const BinaryOneDisplaced&) { return 2.0; },
                    },
                    law);
}

// psi = (motion generator on e_lambda) + (births) - (branching death), with
// the rate-1 jump and rate-1 branching clocks. Constant parts are summed
// first so that X2+P1 reduces to (La)(lambda) exactly.
ExtendedReal log_laplace(const BranchingModel& model, double lambda) {
  double constant = -1.0;  // branching death
  double transform = 0.0;

  if (const auto* jump = std::get_if<PureJumpMotion>(&model.motion())) {
    const auto la = jump->kernel.laplace(lambda);
    if (la.is_infinite()) return ExtendedReal::infinity();
    transform += la.value();
    constant -= 1.0;
  } else if (std::holds_alternative<BrownianMotion>(model.motion())) {
    transform += 0.5 * lambda * lambda;
  }

  const BranchingLaw& law = model.law();
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&law)) {
    const auto lb = p3->displacement.laplace(lambda);
    if (lb.is_infinite()) return ExtendedReal::infinity();
    transform += lb.value();
    constant += 1.0;
  } else {
    constant += offspring_mean(law);
  }
  const double psi = transform + constant;
  if (!std::isfinite(psi)) return ExtendedReal::infinity();
  return ExtendedReal(psi);
}

bool log_laplace_finite(const BranchingModel& model, double lambda) {
  if (const auto* jump = std::get_if<PureJumpMotion>(&model.motion())) {
    if (jump->kernel.log_laplace(lambda).is_infinite()) return false;
  }
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&model.law())) {
    if (p3->displacement.log_laplace(lambda).is_infinite()) return false;
  }
  return true;
}

double log_laplace_derivative(const BranchingModel& model, double lambda) {
  double d = 0.0;
  if (const auto* jump = std::get_if<PureJumpMotion>(&model.motion())) {
    d += jump->kernel.laplace_derivative(lambda);
  } else if (std::holds_alternative<BrownianMotion>(model.motion())) {
    d += lambda;
  }
  if (const auto* p3 = std::get_if<BinaryOneDisplaced>(&model.law())) {
    d += p3->displacement.laplace_derivative(lambda);
  }
  return d;
}

void sample_offspring(const BranchingLaw& law, double parent, Rng& rng, std::vector<double>& out) {
  std::visit(overloaded{
                 [&](const BinaryAtParent&) {
                   out.push_back(parent);
                   out.push_back(parent);
                 },
                 [&](const OffspringAtParent& p) {
                   double u = rng.uniform();
                   for (const auto& [n, pn] : p.probabilities) {
                     if (u < pn) {
                       out.insert(out.end(), static_cast<std::size_t>(n), parent);
                       return;
                     }
                     u -= pn;
                   }
                   // Remaining mass: death without children.
                 },
                 [&](const BinaryOneDisplaced& p) {
                   out.push_back(parent);
                   out.push_back(parent + p.displacement.sample(rng));
                 },
             },
             law);
}

std::vector<double> sample_offspring(const BranchingLaw& law, double parent, Rng& rng) {
  std::vector<double> out;
  sample_offspring(law, parent, rng, out);
  return out;
}

double sample_motion(const Motion& motion, double duration, Rng& rng) {
  if (!(duration >= 0.0)) throw Error(ErrorCode::domain, "negative motion duration");
  return std::visit(overloaded{
                        [](const ConstantMotion&) { return 0.0; },
                        [&](const PureJumpMotion& j) {
                          double x = 0.0;
                          for (double s = rng.exponential(); s < duration; s += rng.exponential())
                            x += j.kernel.sample(rng);
                          return x;
                        },
                        [&](const BrownianMotion&) {
                          return duration > 0.0 ? rng.normal(0.0, std::sqrt(duration)) : 0.0;
                        },
                    },
                    motion);
}

}  // namespace kpplab
