#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pulseflow/hemodynamics.hpp"
#include "pulseflow/optimizer.hpp"
#include "pulseflow/sensitivity.hpp"

namespace pulseflow {

inline constexpr const char* kPeriodicityQuadratic =
    "Q0(T)*Wh(T)*K^2 + (Q0(T)*Wih(T) + Wh(T) - 1)*K + Wih(T) = 0";

nlohmann::json report_json(const OptimizationResult& result, ElasticTermConvention convention);

/// Report for a run that stopped with an error code (no optimum).
nlohmann::json failure_report_json(const std::string& error, const std::vector<std::string>& warnings,
                                   ElasticTermConvention convention);

/// `t_frac,q_10,q_50,q_90` (column names follow the fractions).
std::string flow_csv(const FlowCurves& flow, const std::vector<double>& fractions);

/// Nullcline roots of both blocks at alpha: t_frac,block1_low,block1_high,block2_low,block2_high.
/// Missing roots are left empty.
std::string nullcline_csv(const RiccatiCoefficients& first, const RiccatiCoefficients& second,
                          double alpha, const std::vector<double>& t);

/// Admissible solutions and their slopes: t_frac,block1_Q,block1_dQdt,block2_Q,block2_dQdt.
std::string phase_csv(const RiccatiCoefficients& first, const RiccatiCoefficients& second,
                      double alpha, const PeriodicSolution& q1, const PeriodicSolution& q2);

std::string sensitivity_csv(const SensitivityCurve& curve);

std::string hemo_csv(const std::vector<HemoStation>& stations);

}  // namespace pulseflow
