#include "pulseflow/report.hpp"

#include <cmath>
#include <limits>

#include "pulseflow/io.hpp"

namespace pulseflow {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

nlohmann::json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

nlohmann::json kotin_json(const KotinResult& k) {
  return {{"holds", k.holds}, {"witness_t", k.witness_t}, {"witness_value", k.witness_value}};
}

nlohmann::json solution_json(const std::optional<PeriodicSolution>& s) {
  if (!s) return nullptr;
  return {{"method", s->method == PeriodicMethod::quadrature ? "quadrature" : "shooting"},
          {"k_root", optional_number(s->k_root)},
          {"mean", s->mean},
          {"q0", s->q.front()},
          {"stability_multiplier", s->multiplier},
          {"periodicity_defect", s->periodicity_defect}};
}

std::vector<double> fractions_of(const std::vector<double>& t) {
  std::vector<double> f(t.size());
  const double span = t.back() - t.front();
  for (std::size_t k = 0; k < t.size(); ++k) f[k] = (t[k] - t.front()) / span;
  return f;
}

}  // namespace

nlohmann::json report_json(const OptimizationResult& r, ElasticTermConvention convention) {
  const auto& ev = r.at_optimum;
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : r.probes) probes.push_back({{"alpha", p.alpha}, {"I", optional_number(p.consistency)}});
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : r.bound_samples) samples.push_back({{"alpha", s.alpha}, {"qbar", optional_number(s.qbar)}});
  nlohmann::json log = ev.log;
  return {{"status", "ok"},
          {"alpha_min", r.alpha_min},
          {"alpha_max", r.alpha_max},
          {"alpha_opt", r.alpha_opt},
          {"mse", r.mse},
          {"consistency", r.consistency},
          {"qbar", r.qbar},
          {"period_s", r.period},
          {"kotin_block1", r.kotin_first.holds},
          {"kotin_block2", r.kotin_second.holds},
          {"kotin_detail", {{"block1", kotin_json(r.kotin_first)}, {"block2", kotin_json(r.kotin_second)}}},
          {"delta_block1", optional_number(ev.delta_first)},
          {"delta_block2", optional_number(ev.delta_second)},
          {"solution_block1", solution_json(ev.first)},
          {"solution_block2", solution_json(ev.second)},
          {"warnings", r.warnings},
          {"solver_log", log},
          {"probes", probes},
          {"bound_samples", samples},
          {"periodicity_quadratic", kPeriodicityQuadratic},
          {"elastic_term", std::string(to_string(convention))}};
}

nlohmann::json failure_report_json(const std::string& error, const std::vector<std::string>& warnings,
                                   ElasticTermConvention convention) {
  auto w = warnings;
  w.push_back(error);
  return {{"status", "error"},
          {"error", error},
          {"alpha_min", nullptr},
          {"alpha_max", nullptr},
          {"alpha_opt", nullptr},
          {"mse", nullptr},
          {"kotin_block1", nullptr},
          {"kotin_block2", nullptr},
          {"delta_block1", nullptr},
          {"delta_block2", nullptr},
          {"warnings", w},
          {"periodicity_quadratic", kPeriodicityQuadratic},
          {"elastic_term", std::string(to_string(convention))}};
}

std::string flow_csv(const FlowCurves& flow, const std::vector<double>& fractions) {
  std::vector<std::string> header{"t_frac"};
  for (double f : fractions) header.push_back("q_" + std::to_string(static_cast<int>(std::lround(100.0 * f))));
  std::vector<std::vector<double>> cols{fractions_of(flow.t)};
  for (const auto& q : flow.q) cols.push_back(q);
  return format_csv(header, cols);
}

std::string nullcline_csv(const RiccatiCoefficients& first, const RiccatiCoefficients& second,
                          double alpha, const std::vector<double>& t) {
  std::vector<std::vector<double>> cols(5);
  cols[0] = fractions_of(t);
  for (double tk : t) {
    int c = 1;
    for (const auto* co : {&first, &second}) {
      const auto r = nullcline(*co, alpha, tk);
      cols[c].push_back(r.empty() ? kMissing : r.front());
      cols[c + 1].push_back(r.size() < 2 ? kMissing : r.back());
      c += 2;
    }
  }
  return format_csv({"t_frac", "block1_low", "block1_high", "block2_low", "block2_high"}, cols);
}

std::string phase_csv(const RiccatiCoefficients& first, const RiccatiCoefficients& second,
                      double alpha, const PeriodicSolution& q1, const PeriodicSolution& q2) {
  std::vector<std::vector<double>> cols(5);
  cols[0] = fractions_of(q1.t);
  for (std::size_t k = 0; k < q1.t.size(); ++k) {
    const auto a = first.at(q1.t[k]);
    const auto b = second.at(q2.t[k]);
    cols[1].push_back(q1.q[k]);
    cols[2].push_back((a.A * q1.q[k] + a.B) * q1.q[k] + a.C(alpha));
    cols[3].push_back(q2.q[k]);
    cols[4].push_back((b.A * q2.q[k] + b.B) * q2.q[k] + b.C(alpha));
  }
  return format_csv({"t_frac", "block1_Q", "block1_dQdt", "block2_Q", "block2_dQdt"}, cols);
}

std::string sensitivity_csv(const SensitivityCurve& curve) {
  return format_csv({"t_frac", "P_seconds"}, {fractions_of(curve.t), curve.p});
}

std::string hemo_csv(const std::vector<HemoStation>& stations) {
  std::string out = "x_cm,Wo,Re_mean,Re_peak,regime\n";
  for (const auto& s : stations) {
    out += format_number(s.x) + "," + format_number(s.womersley) + "," + format_number(s.reynolds_mean) +
           "," + format_number(s.reynolds_peak) + "," + std::string(s.regime) + "\n";
  }
  return out;
}

}  // namespace pulseflow
