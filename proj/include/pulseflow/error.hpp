#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pulseflow {

enum class ErrorCode {
  invalid_argument,
  io,
  fewer_than_three_points,
  zero_area,
  too_few_phases,
  non_positive_area,
  non_positive_reconstruction,
  x_out_of_range,
  reversed_interval,
  step_size_underflow,
  particular_solution_blowup,
  degenerate_quadratic,
  non_unique,
  none_admissible,
  infeasible,
  no_bracket,
  empty_feasible_interval,
  resonant_multiplier,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error raised by every pipeline stage. The code drives CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pulseflow
