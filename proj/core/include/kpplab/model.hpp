#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kpplab/extended.hpp"
#include "kpplab/kernel.hpp"
#include "kpplab/rng.hpp"

namespace kpplab {

// Non-branching parts. Jump rate and branching rate are both fixed to 1.

/// X1: the particle does not move.
struct ConstantMotion {};

/// X2: jumps at rate 1 by displacements drawn from `kernel`.
struct PureJumpMotion {
  Kernel kernel;
};

/// X3: standard Brownian motion (variance rate 1).
struct BrownianMotion {};

using Motion = std::variant<ConstantMotion, PureJumpMotion, BrownianMotion>;

// Branching laws.

/// P1: two children at the parent's position.
struct BinaryAtParent {};

/// P2: n children at the parent's position with probability p_n. Any
/// probability deficit 1 - sum p_n is death without offspring.
struct OffspringAtParent {
  std::vector<std::pair<int, double>> probabilities;
};

/// P3: one child at the parent's position, one displaced by a draw from b.
struct BinaryOneDisplaced {
  Kernel displacement;
};

using BranchingLaw = std::variant<BinaryAtParent, OffspringAtParent, BinaryOneDisplaced>;

/// Validates a P2 law (p_n in [0,1], sum <= 1, n >= 0) and merges duplicates.
OffspringAtParent make_offspring_law(std::vector<std::pair<int, double>> probabilities);

class BranchingModel {
 public:
  BranchingModel(Motion motion, BranchingLaw law, std::string label = {});

  const Motion& motion() const { return motion_; }
  const BranchingLaw& law() const { return law_; }
  const std::string& label() const { return label_; }

  /// Catalogue tag such as "X2+P1".
  std::string tag() const;

  /// True when every particle of X_1 sits on the starting point (X1 with P1/P2).
  bool lattice() const;

 private:
  Motion motion_;
  BranchingLaw law_;
  std::string label_;
};

/// Tag of the motion part: "X1", "X2" or "X3".
std::string motion_tag(const Motion& motion);
/// Tag of the law part: "P1", "P2" or "P3".
std::string law_tag(const BranchingLaw& law);

ExtendedReal laplace_transform(const Kernel& kernel, double lambda);

/// psi(lambda) = ln E sum_{y in X_1} exp(-lambda y) from the closed forms of
/// the catalogue.
ExtendedReal log_laplace(const BranchingModel& model, double lambda);

/// Whether psi(lambda) < inf, decided in log space so that transforms too
/// large for a double still count as finite.
bool log_laplace_finite(const BranchingModel& model, double lambda);

/// d psi / d lambda where psi is finite.
double log_laplace_derivative(const BranchingModel& model, double lambda);

double offspring_mean(const BranchingLaw& law);

/// E[N(N-1)] for the number N of children.
double offspring_factorial_moment(const BranchingLaw& law);

/// Children of a parent dying at `parent`, appended to `out`.
void sample_offspring(const BranchingLaw& law, double parent, Rng& rng, std::vector<double>& out);
std::vector<double> sample_offspring(const BranchingLaw& law, double parent, Rng& rng);

/// Displacement of the non-branching part over `duration`.
double sample_motion(const Motion& motion, double duration, Rng& rng);

}  // namespace kpplab
