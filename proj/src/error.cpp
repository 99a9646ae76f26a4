#include "pulseflow/error.hpp"

namespace pulseflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io: return "IoError";
    case ErrorCode::fewer_than_three_points: return "FewerThanThreePoints";
    case ErrorCode::zero_area: return "ZeroArea";
    case ErrorCode::too_few_phases: return "TooFewPhases";
    case ErrorCode::non_positive_area: return "NonPositiveArea";
    case ErrorCode::non_positive_reconstruction: return "NonPositiveReconstruction";
    case ErrorCode::x_out_of_range: return "XOutOfRange";
    case ErrorCode::reversed_interval: return "ReversedInterval";
    case ErrorCode::step_size_underflow: return "StepSizeUnderflow";
    case ErrorCode::particular_solution_blowup: return "ParticularSolutionBlowup";
    case ErrorCode::degenerate_quadratic: return "DegenerateQuadratic";
    case ErrorCode::non_unique: return "NonUnique";
    case ErrorCode::none_admissible: return "NoneAdmissible";
    case ErrorCode::infeasible: return "Infeasible";
    case ErrorCode::no_bracket: return "NoBracket";
    case ErrorCode::empty_feasible_interval: return "EmptyFeasibleInterval";
    case ErrorCode::resonant_multiplier: return "ResonantMultiplier";
  }
  return "Unknown";
}

}  // namespace pulseflow
