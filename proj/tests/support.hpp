#pragma once

#include <cmath>

#include "kpplab/model.hpp"

namespace kpplab::testing {

inline BranchingModel jump_binary(const Kernel& a) {
  return BranchingModel(PureJumpMotion{a}, BinaryAtParent{}, "jump-binary");
}

inline BranchingModel gaussian_jump_binary() { return jump_binary(Kernel::gaussian(1.0)); }

inline BranchingModel bbm() {
  return BranchingModel(BrownianMotion{}, make_offspring_law({{2, 1.0}}), "bbm");
}

inline BranchingModel static_offspring(std::vector<std::pair<int, double>> p) {
  return BranchingModel(ConstantMotion{}, make_offspring_law(std::move(p)), "static");
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace kpplab::testing
