#include "pulseflow/oracle.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pulseflow/numerics.hpp"

namespace pulseflow {

namespace {

double sup_rel_error(const std::vector<double>& q, const std::vector<double>& ref) {
  if (q.size() != ref.size()) return std::numeric_limits<double>::infinity();
  double diff = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) diff = std::max(diff, std::abs(q[k] - ref[k]));
  return diff / std::max(max_abs(ref), std::numeric_limits<double>::min());
}

}  // namespace

MethodComparison compare_methods(const RiccatiCoefficients& coeffs, double alpha,
                                 const PeriodicOptions& options) {
  const auto quad = quadrature_periodic(coeffs, alpha, options);
  const auto shot = shooting_periodic(coeffs, alpha, options);
  MethodComparison out;
  out.quadrature_count = quad.solutions.size();
  out.shooting_count = shot.solutions.size();
  if (out.quadrature_count != out.shooting_count) {
    out.max_rel_error = std::numeric_limits<double>::infinity();
    return out;
  }
  // Both sets are sorted by q(0).
  for (std::size_t i = 0; i < quad.solutions.size(); ++i) {
    out.max_rel_error =
        std::max(out.max_rel_error, sup_rel_error(quad.solutions[i].q, shot.solutions[i].q));
  }
  return out;
}

bool OracleReport::passed() const {
  if (error) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

nlohmann::json to_json(const OracleReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}});
  }
  return {{"alpha_true", r.alpha_true},
          {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
          {"alpha_min", r.alpha_min},
          {"alpha_max", r.alpha_max},
          {"alpha_opt", r.alpha_opt},
          {"alpha_rel_error", r.alpha_rel_error},
          {"mse", r.mse},
          {"qbar", r.qbar},
          {"flow_recovery", r.flow_recovery ? nlohmann::json(*r.flow_recovery) : nlohmann::json(nullptr)},
          {"cross_method", r.cross_method},
          {"runtime_s", r.runtime_s},
          {"checks", checks},
          {"passed", r.passed()}};
}

OracleReport oracle_run(const SynthSpec& spec, const InverseConfig& config,
                        const OracleThresholds& thresholds) {
  const auto start = std::chrono::steady_clock::now();
  OracleReport rep;
  rep.alpha_true = spec.alpha_true;
  const auto field = fit_fourier(generate(spec), spec.pulse_harmonics);
  const auto pair = BlockPair::downstream(field, 1.0);
  try {
    const auto res = minimize_consistency(pair, config);
    rep.alpha_min = res.alpha_min;
    rep.alpha_max = res.alpha_max;
    rep.alpha_opt = res.alpha_opt;
    rep.alpha_rel_error = std::abs(res.alpha_opt - spec.alpha_true) / spec.alpha_true;
    rep.mse = res.mse;
    rep.qbar = res.qbar;

    const auto truth = evaluate_pair(pair, spec.alpha_true, config);
    if (truth.feasible) rep.flow_recovery = sup_rel_error(res.at_optimum.first->q, truth.first->q);

    const auto options = config.periodic_options();
    for (const auto* block : {&pair.first, &pair.second}) {
      const auto coeffs = assemble_coefficients(*block, config.convention);
      try {
        rep.cross_method = std::max(rep.cross_method, compare_methods(coeffs, res.alpha_opt, options).max_rel_error);
      } catch (const Error&) {
        rep.cross_method = std::numeric_limits<double>::infinity();
      }
    }
    rep.checks = {
        {"alpha_within_tolerance", rep.alpha_rel_error <= thresholds.alpha_rel, rep.alpha_rel_error,
         thresholds.alpha_rel},
        {"mse_within_tolerance", rep.mse <= thresholds.mse_fraction * rep.qbar, rep.mse / rep.qbar,
         thresholds.mse_fraction},
        {"cross_method_agreement", rep.cross_method <= thresholds.cross_method, rep.cross_method,
         thresholds.cross_method},
    };
  } catch (const Error& e) {
    rep.error = e.what();
    rep.error_code = e.code();
  }
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace pulseflow
