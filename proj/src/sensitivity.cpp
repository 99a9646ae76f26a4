#include "pulseflow/sensitivity.hpp"

#include <cmath>
#include <string>

#include "pulseflow/error.hpp"

namespace pulseflow {

SensitivityCurve sensitivity_P(const RiccatiCoefficients& coeffs, double alpha,
                               const PeriodicSolution& solution, const IntegratorSettings& settings) {
  if (solution.q.size() < 2) throw Error(ErrorCode::invalid_argument, "solution has no samples");
  const std::size_t intervals = solution.q.size() - 1;
  const auto orbit = linearized_orbit(coeffs, alpha, solution.q.front(), settings, intervals);
  if (orbit.escaped) {
    throw Error(ErrorCode::particular_solution_blowup, "orbit escaped while integrating sensitivity");
  }
  SensitivityCurve out;
  out.multiplier = orbit.multiplier;
  const double gap = 1.0 - out.multiplier;
  if (std::abs(gap) < 1e-10) {
    throw Error(ErrorCode::resonant_multiplier, "multiplier " + std::to_string(out.multiplier));
  }
  const double p0 = orbit.path.outcome.y_end[2] / gap;
  out.t = orbit.path.t;
  out.p.reserve(out.t.size());
  for (const auto& v : orbit.path.values) out.p.push_back(p0 * std::exp(v[1]) + v[2]);
  return out;
}

}  // namespace pulseflow
