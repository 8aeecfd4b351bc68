#pragma once

#include <stdexcept>
#include <string>

namespace kpplab {

enum class ErrorCode {
  invalid_kernel,
  invalid_model,
  domain,
  no_finite_transform,
  boundary_infimum,
  no_minimizer,
  capacity,
  grid_too_small,
  step_size,
  iteration_limit,
  range,
  no_front,
  fit,
  insufficient_horizon,
  alignment,
  empty_sample,
  format,
  config,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kpplab
