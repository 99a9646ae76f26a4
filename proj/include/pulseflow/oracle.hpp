#pragma once

// End-to-end check of the inverse pipeline on a synthetic field with a known
// elasticity parameter.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pulseflow/optimizer.hpp"
#include "pulseflow/synth.hpp"

namespace pulseflow {

/// Quadrature and shooting solution sets of one block, matched by initial value.
struct MethodComparison {
  std::size_t quadrature_count = 0;
  std::size_t shooting_count = 0;
  double max_rel_error = 0.0;  // sup |q_quad - q_shoot| / sup |q_shoot|; inf on count mismatch
  bool agree(double tol) const { return quadrature_count == shooting_count && max_rel_error <= tol; }
};

/// Throws what quadrature_periodic throws.
MethodComparison compare_methods(const RiccatiCoefficients& coeffs, double alpha,
                                 const PeriodicOptions& options = {});

struct OracleCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct OracleThresholds {
  double alpha_rel = 0.10;
  double mse_fraction = 0.05;
  double cross_method = 1e-6;
};

struct OracleReport {
  double alpha_true = 0.0;
  std::optional<std::string> error;  // pipeline error text when no optimum exists
  std::optional<ErrorCode> error_code;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double alpha_opt = 0.0;
  double alpha_rel_error = 0.0;
  double mse = 0.0;
  double qbar = 0.0;
  std::optional<double> flow_recovery;  // sup |Q(alpha_opt) - Q(alpha*)| / sup |Q(alpha*)|
  double cross_method = 0.0;            // worst block at alpha_opt
  double runtime_s = 0.0;
  std::vector<OracleCheck> checks;

  bool passed() const;
};

nlohmann::json to_json(const OracleReport& r);

/// Generates the field, fits it with the pulse harmonic count, and runs the
/// downstream pair through the full inverse pipeline.
OracleReport oracle_run(const SynthSpec& spec, const InverseConfig& config,
                        const OracleThresholds& thresholds = {});

}  // namespace pulseflow
