#pragma once

// First-order sensitivity P = dQ/dalpha of a periodic solution: the periodic
// solution of P' = (2 A Q + B) P + C1.

#include <vector>

#include "pulseflow/riccati.hpp"

namespace pulseflow {

struct SensitivityCurve {
  std::vector<double> t;
  std::vector<double> p;    // s
  double multiplier = 0.0;  // Floquet multiplier of the homogeneous part
};

/// Uses the solution's own output grid. Throws ResonantMultiplier when
/// |1 - multiplier| < 1e-10.
SensitivityCurve sensitivity_P(const RiccatiCoefficients& coeffs, double alpha,
                               const PeriodicSolution& solution, const IntegratorSettings& settings);

}  // namespace pulseflow
