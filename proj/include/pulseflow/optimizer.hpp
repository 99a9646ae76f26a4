#pragma once

// Two adjacent blocks at the downstream end of a segment, and the search for
// the elasticity parameter alpha that makes the outflow of the first block
// match the inflow of the second.

#include <optional>
#include <string>
#include <vector>

#include "pulseflow/area_field.hpp"
#include "pulseflow/riccati.hpp"

namespace pulseflow {

struct BlockPair {
  Block first;
  Block second;

  /// [x_end - 2L, x_end - L] and [x_end - L, x_end]; x_end defaults to the
  /// last station.
  static BlockPair downstream(const AreaField& field, double block_length = 1.0,
                              std::optional<double> x_end = std::nullopt);
  void validate() const;
};

struct InverseConfig {
  double qbar_min = 66.7;   // cm^3/s
  double qbar_max = 100.0;  // cm^3/s
  double alpha_initial = 2.5e3;
  double expansion_factor = 2.0;
  int max_expansions = 30;
  double alpha_rel_tol = 1e-6;
  double qbar_rel_tol = 1e-6;
  int max_bisections = 200;
  int max_minimizer_iterations = 500;
  std::size_t grid_intervals = kDefaultGridIntervals;
  IntegratorSettings integrator;
  ElasticTermConvention convention = ElasticTermConvention::integrated_momentum;

  void validate() const;
  PeriodicOptions periodic_options() const;
};

/// Both blocks solved at one alpha.
struct PairEvaluation {
  double alpha = 0.0;
  bool feasible = false;
  std::string infeasible_reason;
  std::vector<double> t;
  std::vector<double> exit_flow;   // Q1(t) + Phi1(t, L)
  std::vector<double> entry_flow;  // Q2(t)
  std::optional<PeriodicSolution> first;
  std::optional<PeriodicSolution> second;
  std::optional<double> delta_first;
  std::optional<double> delta_second;
  bool ambiguous = false;
  double consistency = 0.0;  // I(alpha)
  double qbar = 0.0;
  std::vector<std::string> log;
};

/// Throws DegenerateQuadratic / NonUnique for blocks without axial variation.
PairEvaluation evaluate_pair(const BlockPair& pair, double alpha, const InverseConfig& config);

/// I(alpha), or nullopt when either block has no admissible periodic solution.
std::optional<double> consistency(const BlockPair& pair, double alpha, const InverseConfig& config);

/// Mean of the two interface flows. Throws Infeasible.
double qbar(const BlockPair& pair, double alpha, const InverseConfig& config);

struct AlphaSample {
  double alpha = 0.0;
  std::optional<double> qbar;
};

struct AlphaBounds {
  double alpha_min = 0.0;  // qbar(alpha_min) = qbar_min
  double alpha_max = 0.0;  // qbar(alpha_max) = qbar_max
  double qbar_at_min = 0.0;
  double qbar_at_max = 0.0;
  std::vector<AlphaSample> samples;
  std::vector<std::string> warnings;

  double lower() const { return std::min(alpha_min, alpha_max); }
  double upper() const { return std::max(alpha_min, alpha_max); }
};

/// Throws NoBracket when either target flow is never crossed.
AlphaBounds solve_alpha_bounds(const BlockPair& pair, const InverseConfig& config);

struct Probe {
  double alpha = 0.0;
  std::optional<double> consistency;
};

struct OptimizationResult {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double alpha_opt = 0.0;
  double consistency = 0.0;
  double mse = 0.0;  // sqrt(I / T)
  double qbar = 0.0;
  double period = 0.0;
  PairEvaluation at_optimum;
  KotinResult kotin_first;
  KotinResult kotin_second;
  std::vector<Probe> probes;
  std::vector<AlphaSample> bound_samples;
  std::vector<std::string> warnings;
};

/// Bounded minimisation of I over the bound interval.
OptimizationResult minimize_consistency(const BlockPair& pair, const InverseConfig& config);
OptimizationResult minimize_consistency(const BlockPair& pair, const InverseConfig& config,
                                        const AlphaBounds& bounds);

double mse_from_consistency(double consistency, double period);

/// q(t, x) = Q(t) + Phi(t; x_b, x) for x anywhere in the field; Phi is signed
/// so upstream positions subtract the wall flux of [x, x_b].
struct FlowCurves {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<std::vector<double>> q;  // q[i][k] at x[i], t[k]
};

double signed_wall_flux(const AreaField& field, double t, double x_b, double x);

FlowCurves reconstruct_flow(const AreaField& field, const Block& block,
                            const PeriodicSolution& solution, const std::vector<double>& positions);

/// x_start + f (x_end - x_start) for each fraction f in [0, 1].
std::vector<double> fractional_positions(double x_start, double x_end,
                                         const std::vector<double>& fractions);

}  // namespace pulseflow
