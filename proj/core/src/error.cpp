#include "kpplab/error.hpp"

namespace kpplab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_kernel: return "invalid-kernel";
    case ErrorCode::invalid_model: return "invalid-model";
    case ErrorCode::domain: return "domain";
    case ErrorCode::no_finite_transform: return "no-finite-transform";
    case ErrorCode::boundary_infimum: return "boundary-infimum";
    case ErrorCode::no_minimizer: return "no-minimizer";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::grid_too_small: return "grid-too-small";
    case ErrorCode::step_size: return "step-size";
    case ErrorCode::iteration_limit: return "iteration-limit";
    case ErrorCode::range: return "range";
    case ErrorCode::no_front: return "no-front";
    case ErrorCode::fit: return "fit";
    case ErrorCode::insufficient_horizon: return "insufficient-horizon";
    case ErrorCode::alignment: return "alignment";
    case ErrorCode::empty_sample: return "empty-sample";
    case ErrorCode::format: return "format";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

}  // namespace kpplab
