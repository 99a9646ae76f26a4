// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pulseflow/cli.hpp"
#include "pulseflow/hemodynamics.hpp"
#include "pulseflow/io.hpp"
#include "pulseflow/numerics.hpp"
#include "pulseflow/optimizer.hpp"
#include "pulseflow/oracle.hpp"
#include "pulseflow/sensitivity.hpp"
#include "pulseflow/synth.hpp"

using namespace pulseflow;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Solutions emitted anywhere in the run, checked for periodicity by criterion 3.
std::vector<PeriodicSolution> g_emitted;
IntegratorSettings g_settings;

void keep(const std::vector<PeriodicSolution>& s) { g_emitted.insert(g_emitted.end(), s.begin(), s.end()); }

struct Case {
  SynthSpec spec;
  double x_start = 0.0;
  double alpha = 0.0;
};

std::vector<Case> random_cases(std::size_t n) {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Case> cases;
  for (std::size_t i = 0; i < n; ++i) {
    Case c;
    c.spec.area_inlet = 6.0 + 2.0 * u(rng);
    c.spec.area_outlet = c.spec.area_inlet * (0.5 + 0.45 * u(rng));
    c.spec.amplitude = 0.005 + 0.045 * u(rng);
    c.spec.wave_speed = 300.0 + 1200.0 * u(rng);
    c.spec.seed = rng();
    c.x_start = std::floor(9.0 * u(rng));
    c.alpha = 300.0 * std::pow(10.0, u(rng));
    cases.push_back(c);
  }
  return cases;
}

// Criterion bodies return PASS/FAIL and fill a one-line detail.
using Criterion = std::function<bool(std::string&)>;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool cross_method(std::string& detail) {
  const auto t0 = Clock::now();
  const auto cases = random_cases(24);
  double worst = 0.0;
  std::size_t agreed = 0, solutions = 0;
  for (const auto& c : cases) {
    const auto field = fit_fourier(generate(c.spec), c.spec.pulse_harmonics);
    const auto coeffs = assemble_coefficients({&field, c.x_start, 1.0});
    try {
      const auto cmp = compare_methods(coeffs, c.alpha);
      worst = std::max(worst, cmp.max_rel_error);
      solutions += cmp.quadrature_count;
      if (cmp.agree(1e-6) && cmp.quadrature_count > 0) ++agreed;
      keep(quadrature_periodic(coeffs, c.alpha).solutions);
      keep(shooting_periodic(coeffs, c.alpha).solutions);
    } catch (const Error&) {
      worst = INFINITY;
    }
  }
  const double elapsed = seconds_since(t0);
  detail = fmt("%.0f/%.0f blocks agree, %.0f solutions, worst sup rel error %.3g", agreed,
               static_cast<double>(cases.size()), solutions, worst) +
           fmt(", %.2f s", elapsed);
  return agreed == cases.size() && worst <= 1e-6 && elapsed <= 60.0;
}

bool constant_case(std::string& detail) {
  const auto c = RiccatiCoefficients::constant(1.0, -1.0, 0.0, 1.0);
  const auto r = quadrature_periodic(c, 0.0);
  keep(r.solutions);
  if (r.solutions.size() != 2 || r.k_roots.size() != 2) {
    detail = fmt("expected 2 solutions, got %.0f", static_cast<double>(r.solutions.size()));
    return false;
  }
  double q_err = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double target = i == 0 ? -1.0 : 1.0;
    for (double q : r.solutions[i].q) q_err = std::max(q_err, std::abs(q - target));
  }
  const double k_neg = *r.solutions[0].k_root, k_pos = *r.solutions[1].k_root;
  const double k_err = std::max(std::abs(k_neg - 1.0), std::abs(k_pos + 1.0));
  const double mu_err = std::max(std::abs(r.solutions[0].multiplier / std::exp(2.0) - 1.0),
                                 std::abs(r.solutions[1].multiplier / std::exp(-2.0) - 1.0));
  detail = fmt("sup|Q-(+-1)| = %.3g, K error %.3g, multiplier rel error %.3g", q_err, k_err, mu_err);
  return q_err <= 1e-8 && k_err <= 1e-8 && mu_err <= 0.01;
}

bool periodicity(std::string& detail) {
  double worst = 0.0;
  std::size_t bad = 0;
  for (const auto& s : g_emitted) {
    const double tol = periodicity_tolerance(g_settings, sup_abs(s.q));
    const double defect = std::abs(s.q.back() - s.q.front());
    worst = std::max(worst, defect / tol);
    if (defect > tol) ++bad;
  }
  detail = fmt("%.0f solutions, %.0f violations, worst defect/tolerance %.3g",
               static_cast<double>(g_emitted.size()), static_cast<double>(bad), worst);
  return bad == 0 && !g_emitted.empty();
}

bool kotin(std::string& detail) {
  std::size_t holding = 0, consistent = 0;
  auto check = [&](const RiccatiCoefficients& c, double alpha) {
    if (!kotin_check(c, alpha).holds) return;
    ++holding;
    const auto shot = shooting_periodic(c, alpha);
    std::size_t pos = 0, neg = 0;
    for (const auto& s : shot.solutions) (s.mean > 0.0 ? pos : neg)++;
    if (pos == 1 && neg == 1) ++consistent;
  };
  check(RiccatiCoefficients::constant(1.0, -1.0, 0.0, 1.0), 0.0);
  for (const auto& c : random_cases(24)) {
    const auto field = fit_fourier(generate(c.spec), c.spec.pulse_harmonics);
    check(assemble_coefficients({&field, c.x_start, 1.0}), c.alpha);
  }
  detail = fmt("Kotin holds on %.0f cases; %.0f have exactly one positive and one negative solution",
               static_cast<double>(holding), static_cast<double>(consistent));
  return holding > 0 && holding == consistent;
}

bool inverse_recovery(std::string& detail) {
  const auto r = oracle_run(SynthSpec{}, InverseConfig{});
  if (r.error) {
    detail = *r.error;
    return false;
  }
  detail = fmt("alpha_opt %.6g vs alpha* %.6g (rel error %.3g); ", r.alpha_opt, r.alpha_true, r.alpha_rel_error) +
           fmt("mse %.4g = %.3g of qbar; bounds [%.6g, %.6g]; ", r.mse, r.mse / r.qbar, r.alpha_min, r.alpha_max) +
           fmt("%.2f s", r.runtime_s);
  return r.alpha_rel_error <= 0.10 && r.mse <= 0.05 * r.qbar && r.runtime_s <= 120.0;
}

struct Defaults {
  AreaField field = fit_fourier(generate(SynthSpec{}), 3);
  BlockPair pair = BlockPair::downstream(field);
  OptimizationResult result = minimize_consistency(pair, InverseConfig{});
};

const Defaults& defaults() {
  static const Defaults d;
  return d;
}

bool sensitivity(std::string& detail) {
  const auto& d = defaults();
  const double alpha = d.result.alpha_opt;
  const auto coeffs = assemble_coefficients(d.pair.first);
  const auto& q = *d.result.at_optimum.first;
  keep({q, *d.result.at_optimum.second});
  const auto p = sensitivity_P(coeffs, alpha, q, g_settings);
  auto mismatch = [&](double delta) {
    const auto qd = select_admissible(solve_periodic(coeffs, alpha * (1.0 + delta)).solutions).solution;
    keep({qd});
    double m = 0.0;
    for (std::size_t k = 0; k < qd.q.size(); ++k) {
      m = std::max(m, std::abs((qd.q[k] - q.q[k]) / (alpha * delta) - p.p[k]));
    }
    return m / sup_abs(p.p);
  };
  const double m1 = mismatch(1e-3), m2 = mismatch(5e-4);
  detail = fmt("sup rel mismatch %.3g at delta=1e-3, %.3g at 5e-4 (ratio %.3f)", m1, m2, m2 / m1);
  return m1 <= 0.01 && m2 < m1;
}

// Max |dS/dt + dq/dx| at interior nodes (i + 1/2) cm, central differences in t
// on the output grid and in x with half-width h.
double mass_residual(std::size_t intervals, double h) {
  const auto& d = defaults();
  InverseConfig cfg;
  cfg.grid_intervals = intervals;
  const auto ev = evaluate_pair(d.pair, d.result.alpha_opt, cfg);
  std::vector<double> xs;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(i + 0.5 - h);
    xs.push_back(i + 0.5 + h);
  }
  const auto flow = reconstruct_flow(d.field, d.pair.first, *ev.first, xs);
  const double dt = flow.t[1] - flow.t[0];
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < flow.t.size(); ++k) {
    for (int i = 0; i < 10; ++i) {
      const double x = i + 0.5;
      const double s_t = (d.field.area(flow.t[k + 1], x) - d.field.area(flow.t[k - 1], x)) / (2.0 * dt);
      const double q_x = (flow.q[2 * i + 1][k] - flow.q[2 * i][k]) / (2.0 * h);
      worst = std::max(worst, std::abs(s_t + q_x));
    }
  }
  return worst;
}

bool mass_balance(std::string& detail) {
  std::vector<double> res;
  for (std::size_t n : {32, 64, 128, 256}) res.push_back(mass_residual(n, 128.0 / n / 16.0));
  double rate = INFINITY;
  for (std::size_t i = 1; i < res.size(); ++i) rate = std::min(rate, std::log2(res[i - 1] / res[i]));
  detail = fmt("residuals %.3g, %.3g, %.3g, %.3g", res[0], res[1], res[2], res[3]) +
           fmt("; worst observed rate %.3f", rate);
  return rate >= 1.9;
}

bool hemodynamics(std::string& detail) {
  const auto props = FluidProperties::for_period(1.0);
  const double re = reynolds(30.0 * std::numbers::pi, std::numbers::pi, props);
  const double wo = womersley(std::numbers::pi, props);
  detail = fmt("Re %.4f, Wo %.4f", re, wo);
  return std::abs(re - 1817.0) <= 1.0 && std::abs(wo - 27.6) <= 0.1;
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"pulseflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path workdir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("pulseflow_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

bool degenerate(std::string& detail) {
  std::vector<std::string> outcomes;
  bool ok = true;
  auto pipeline = [&](const std::string& name, const nlohmann::json& synth) {
    const auto dir = workdir(name);
    write_json(dir / "synth.json", {{"synth", synth}});
    write_json(dir / "run.json", {{"area_csv", "syn/area.csv"}});
    const int s = cli({"synth", "--config", (dir / "synth.json").string(), "--out", (dir / "syn").string()});
    const int r = cli({"reconstruct", "--config", (dir / "run.json").string(), "--out", (dir / "out").string()});
    const auto report = read_json(dir / "out/report.json");
    const auto err = report.value("error", std::string());
    const bool flagged = err.rfind("NonUnique", 0) == 0 || err.rfind("DegenerateQuadratic", 0) == 0;
    ok = ok && s == 0 && r == 2 && flagged && report.at("alpha_opt").is_null();
    outcomes.push_back(name + " exit " + std::to_string(r) + " (" + err.substr(0, err.find(':')) + ")");
  };
  pipeline("uniform_in_x", {{"area_outlet_cm2", 7.0}, {"wave_speed_cm_s", nullptr}});
  pipeline("rigid_cylinder", {{"area_outlet_cm2", 7.0}, {"amplitude", 0.0}});
  try {
    solve_periodic(RiccatiCoefficients::constant(1.0, 0.0, 0.0, 0.0), 1.0);
    ok = false;
    outcomes.push_back("zero field returned numbers");
  } catch (const Error& e) {
    const bool flagged = e.code() == ErrorCode::non_unique || e.code() == ErrorCode::degenerate_quadratic;
    ok = ok && flagged;
    outcomes.push_back("zero field " + std::string(to_string(e.code())));
  }
  detail.clear();
  for (const auto& o : outcomes) detail += (detail.empty() ? "" : "; ") + o;
  return ok;
}

std::vector<std::pair<std::string, std::string>> full_run(const fs::path& dir) {
  write_json(dir / "synth.json", {{"synth", {{"seed", 42}}}});
  write_json(dir / "run.json", {{"area_csv", "syn/area.csv"}});
  const auto cfg = (dir / "run.json").string();
  const auto out = (dir / "out").string();
  cli({"synth", "--config", (dir / "synth.json").string(), "--out", (dir / "syn").string(), "--seed", "42"});
  cli({"reconstruct", "--config", cfg, "--out", out});
  cli({"sensitivity", "--config", cfg, "--out", (dir / "sens").string(), "--report", out + "/report.json"});
  cli({"hemo", "--config", cfg, "--out", (dir / "hemo").string(), "--report", out + "/report.json"});
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& sub : {"syn", "out", "sens", "hemo"}) {
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(dir / sub)) names.push_back(e.path());
    std::sort(names.begin(), names.end());
    for (const auto& p : names) files.emplace_back(std::string(sub) + "/" + p.filename().string(), read_text(p));
  }
  return files;
}

bool determinism(std::string& detail) {
  const auto a = full_run(workdir("det_a"));
  setenv("PULSEFLOW_THREADS", "1", 1);
  const auto b = full_run(workdir("det_b"));
  unsetenv("PULSEFLOW_THREADS");
  std::size_t same = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] == b[i]) ++same;
  }
  detail = fmt("%.0f/%.0f files byte-identical across two runs (default workers vs 1)", static_cast<double>(same),
               static_cast<double>(a.size()));
  return a.size() == b.size() && same == a.size() && a.size() >= 11;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Criterion>> criteria = {
      {"cross-method periodic solutions", cross_method},
      {"constant-coefficient analytic case", constant_case},
      {"periodicity of emitted solutions", periodicity},
      {"Kotin consistency", kotin},
      {"inverse recovery on synthetic defaults", inverse_recovery},
      {"sensitivity vs finite differences", sensitivity},
      {"mass-balance residual order", mass_balance},
      {"hemodynamics spot values", hemodynamics},
      {"degenerate handling", degenerate},
      {"determinism", determinism},
  };
  // Criterion 3 audits solutions gathered by the others, so it runs last.
  std::vector<std::string> lines(criteria.size());
  bool all = true;
  auto run = [&](std::size_t i) {
    std::string detail;
    bool pass = false;
    try {
      pass = criteria[i].second(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    all = all && pass;
    lines[i] = std::string(pass ? "PASS" : "FAIL") + " " + std::to_string(i + 1) + " " + criteria[i].first +
               ": " + detail;
  };
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (i != 2) run(i);
  }
  run(2);
  for (const auto& l : lines) std::puts(l.c_str());
  return all ? 0 : 1;
}
