#include "pulseflow/cli.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <set>

#include "CLI11.hpp"
#include "pulseflow/io.hpp"
#include "pulseflow/report.hpp"
#include "pulseflow/sensitivity.hpp"

namespace pulseflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "area_csv",      "contours_json",   "period_s",      "heart_rate_bpm", "segment_cm",
    "block_length_cm", "harmonics",     "qbar_min_cm3_s", "qbar_max_cm3_s", "alpha_initial",
    "elastic_term",  "fluid",           "integrator",    "grid_intervals", "flow_fractions",
    "synth"};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid(std::string("config key '") + key + "': " + e.what());
  }
}

struct Session {
  bool verbose = false;
  fs::path out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> outputs;  // file, content

  void log(const std::string& line) const {
    if (verbose) std::cerr << line << "\n";
  }
  void emit(const std::string& name, const std::string& content) {
    write_text(out_dir / name, content);
    outputs.emplace_back(name, content);
  }
  void manifest(const std::string& subcommand, const RunConfig& cfg,
                const std::vector<fs::path>& inputs) {
    json in = json::object();
    for (const auto& p : inputs) in[p.filename().string()] = hex64(fnv1a64(read_text(p)));
    json out = json::array();
    for (const auto& [name, content] : outputs) out.push_back({{"file", name}, {"fnv1a64", hex64(fnv1a64(content))}});
    json m = {{"tool", "pulseflow"},
              {"version", kToolVersion},
              {"subcommand", subcommand},
              {"config", cfg.effective},
              {"config_hash", hex64(fnv1a64(cfg.effective.dump()))},
              {"seed", seed ? json(*seed) : json(nullptr)},
              {"inputs", in},
              {"outputs", out}};
    write_json(out_dir / "manifest.json", m);
  }
};

struct LoadedField {
  std::unique_ptr<AreaField> field;
  fs::path input;
  double segment_start = 0.0;
  double segment_end = 0.0;
};

LoadedField load_field(const RunConfig& cfg) {
  LoadedField lf;
  AreaSamples samples;
  if (cfg.area_csv) {
    lf.input = *cfg.area_csv;
    samples = read_area_csv(lf.input, cfg.period);
  } else if (cfg.contours_json) {
    lf.input = *cfg.contours_json;
    samples = read_contours_json(lf.input, cfg.period);
  } else {
    invalid("config needs area_csv or contours_json");
  }
  lf.field = std::make_unique<AreaField>(fit_fourier(samples, cfg.harmonics));
  lf.segment_start = cfg.segment_start.value_or(lf.field->x_min());
  lf.segment_end = cfg.segment_end.value_or(lf.field->x_max());
  if (!(lf.segment_end > lf.segment_start) || lf.segment_start < lf.field->x_min() ||
      lf.segment_end > lf.field->x_max()) {
    throw Error(ErrorCode::x_out_of_range, "segment outside station range");
  }
  return lf;
}

double alpha_from_report(const fs::path& path) {
  const json r = read_json(path);
  if (!r.contains("alpha_opt") || !r.at("alpha_opt").is_number()) {
    throw Error(ErrorCode::invalid_argument, path.string() + " has no alpha_opt (reconstruct failed?)");
  }
  return r.at("alpha_opt").get<double>();
}

int cmd_synth(Session& s, const fs::path& config_path) {
  const json doc = read_json(config_path);
  RunConfig cfg;
  if (doc.contains("synth")) {
    cfg = parse_run_config(doc, config_path.parent_path());
  } else {
    cfg.synth = doc.get<SynthSpec>();
  }
  if (s.seed) cfg.synth.seed = *s.seed;
  s.seed = cfg.synth.seed;
  cfg.synth.validate();
  cfg.effective = json{{"synth", cfg.synth}};
  const auto samples = generate(cfg.synth);
  s.emit("area.csv", format_area_csv(samples));
  s.emit("spec.json", json(cfg.synth).dump(2) + "\n");
  s.manifest("synth", cfg, {config_path});
  s.log("synth: " + std::to_string(samples.stations.size()) + " stations x " +
        std::to_string(samples.phase_count) + " phases");
  return 0;
}

int cmd_reconstruct(Session& s, const fs::path& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const auto lf = load_field(cfg);
  const auto pair = BlockPair::downstream(*lf.field, cfg.block_length, lf.segment_end);
  OptimizationResult res;
  try {
    res = minimize_consistency(pair, cfg.inverse);
  } catch (const Error& e) {
    if (exit_code_for(e.code()) != 2) throw;
    s.emit("report.json", failure_report_json(e.what(), {}, cfg.inverse.convention).dump(2) + "\n");
    s.manifest("reconstruct", cfg, {lf.input});
    std::cerr << e.what() << "\n";
    return 2;
  }
  const auto& ev = res.at_optimum;
  const auto positions = fractional_positions(lf.segment_start, lf.segment_end, cfg.flow_fractions);
  const auto flow = reconstruct_flow(*lf.field, pair.first, *ev.first, positions);
  const auto co1 = assemble_coefficients(pair.first, cfg.inverse.convention);
  const auto co2 = assemble_coefficients(pair.second, cfg.inverse.convention);
  s.emit("report.json", report_json(res, cfg.inverse.convention).dump(2) + "\n");
  s.emit("flow.csv", flow_csv(flow, cfg.flow_fractions));
  s.emit("nullcline.csv", nullcline_csv(co1, co2, res.alpha_opt, ev.t));
  s.emit("phase.csv", phase_csv(co1, co2, res.alpha_opt, *ev.first, *ev.second));
  s.manifest("reconstruct", cfg, {lf.input});
  s.log("alpha bounds [" + format_number(res.alpha_min) + ", " + format_number(res.alpha_max) +
        "], alpha_opt " + format_number(res.alpha_opt) + ", mse " + format_number(res.mse) + " cm^3/s");
  for (const auto& w : res.warnings) s.log("warning: " + w);
  return 0;
}

int cmd_sensitivity(Session& s, const fs::path& config_path, const fs::path& report) {
  const RunConfig cfg = load_run_config(config_path);
  const auto lf = load_field(cfg);
  const auto pair = BlockPair::downstream(*lf.field, cfg.block_length, lf.segment_end);
  const double alpha = alpha_from_report(report);
  const auto ev = evaluate_pair(pair, alpha, cfg.inverse);
  if (!ev.feasible) throw Error(ErrorCode::infeasible, ev.infeasible_reason);
  const auto co1 = assemble_coefficients(pair.first, cfg.inverse.convention);
  const auto curve = sensitivity_P(co1, alpha, *ev.first, cfg.inverse.integrator);
  s.emit("sensitivity.csv", sensitivity_csv(curve));
  s.manifest("sensitivity", cfg, {lf.input, report});
  s.log("sensitivity: multiplier " + format_number(curve.multiplier));
  return 0;
}

int cmd_hemo(Session& s, const fs::path& config_path, const fs::path& report) {
  const RunConfig cfg = load_run_config(config_path);
  const auto lf = load_field(cfg);
  const auto pair = BlockPair::downstream(*lf.field, cfg.block_length, lf.segment_end);
  const double alpha = alpha_from_report(report);
  const auto ev = evaluate_pair(pair, alpha, cfg.inverse);
  if (!ev.feasible) throw Error(ErrorCode::infeasible, ev.infeasible_reason);
  std::vector<double> positions;
  for (double x : lf.field->stations()) {
    if (x >= lf.segment_start && x <= lf.segment_end) positions.push_back(x);
  }
  const auto flow = reconstruct_flow(*lf.field, pair.first, *ev.first, positions);
  const auto stations = profile(*lf.field, flow.t, flow.x, flow.q, cfg.fluid());
  s.emit("hemo.csv", hemo_csv(stations));
  s.manifest("hemo", cfg, {lf.input, report});
  return 0;
}

}  // namespace

FluidProperties RunConfig::fluid() const {
  return FluidProperties::for_period(period, density,
                                     FluidProperties::viscosity_from_pascal_seconds(viscosity_pa_s));
}

void RunConfig::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) invalid("period must be positive");
  if (!(block_length > 0.0)) invalid("block length must be positive");
  if (harmonics < 0) invalid("harmonics must be >= 0");
  if (!(density > 0.0) || !(viscosity_pa_s > 0.0)) invalid("fluid properties must be positive");
  for (double f : flow_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) invalid("flow fractions must lie in [0, 1]");
  }
  if (area_csv && contours_json) invalid("give either area_csv or contours_json, not both");
  inverse.validate();
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) invalid("config must be a JSON object");
  for (const auto& [key, unused] : doc.items()) {
    if (!kConfigKeys.count(key)) invalid("unknown config key '" + key + "'");
  }
  RunConfig c;
  auto path_of = [&](const char* key) -> std::optional<fs::path> {
    const auto p = get_or<std::string>(doc, key, "");
    if (p.empty()) return std::nullopt;
    const fs::path raw(p);
    return raw.is_absolute() ? raw : base_dir / raw;
  };
  c.area_csv = path_of("area_csv");
  c.contours_json = path_of("contours_json");
  if (doc.contains("period_s") && doc.contains("heart_rate_bpm")) invalid("give period_s or heart_rate_bpm, not both");
  if (doc.contains("heart_rate_bpm")) {
    const double hr = get_or<double>(doc, "heart_rate_bpm", 60.0);
    if (!(hr > 0.0)) invalid("heart rate must be positive");
    c.period = 60.0 / hr;
  } else {
    c.period = get_or<double>(doc, "period_s", 1.0);
  }
  if (doc.contains("segment_cm")) {
    const auto seg = get_or<std::vector<double>>(doc, "segment_cm", {});
    if (seg.size() != 2) invalid("segment_cm must be [start, end]");
    c.segment_start = seg[0];
    c.segment_end = seg[1];
  }
  c.block_length = get_or<double>(doc, "block_length_cm", 1.0);
  c.harmonics = get_or<int>(doc, "harmonics", 3);
  c.inverse.qbar_min = get_or<double>(doc, "qbar_min_cm3_s", c.inverse.qbar_min);
  c.inverse.qbar_max = get_or<double>(doc, "qbar_max_cm3_s", c.inverse.qbar_max);
  c.inverse.alpha_initial = get_or<double>(doc, "alpha_initial", c.inverse.alpha_initial);
  c.inverse.grid_intervals = get_or<std::size_t>(doc, "grid_intervals", c.inverse.grid_intervals);
  c.inverse.convention = parse_elastic_term(get_or<std::string>(doc, "elastic_term", "integrated_momentum"));
  if (doc.contains("fluid")) {
    const auto& f = doc.at("fluid");
    c.density = get_or<double>(f, "density_g_cm3", c.density);
    c.viscosity_pa_s = get_or<double>(f, "viscosity_pa_s", c.viscosity_pa_s);
  }
  if (doc.contains("integrator")) {
    const auto& i = doc.at("integrator");
    auto& s = c.inverse.integrator;
    s.rel_tol = get_or<double>(i, "rel_tol", s.rel_tol);
    s.abs_tol = get_or<double>(i, "abs_tol", s.abs_tol);
    s.max_step = get_or<double>(i, "max_step_s", s.max_step);
    s.blowup_cap = get_or<double>(i, "blowup_cap", s.blowup_cap);
  }
  c.flow_fractions = get_or<std::vector<double>>(doc, "flow_fractions", c.flow_fractions);
  if (doc.contains("synth")) c.synth = doc.at("synth").get<SynthSpec>();
  c.validate();

  const auto& s = c.inverse.integrator;
  c.effective = json{{"area_csv", c.area_csv ? json(c.area_csv->filename().string()) : json(nullptr)},
                     {"contours_json", c.contours_json ? json(c.contours_json->filename().string()) : json(nullptr)},
                     {"period_s", c.period},
                     {"segment_cm", c.segment_start ? json({*c.segment_start, *c.segment_end}) : json(nullptr)},
                     {"block_length_cm", c.block_length},
                     {"harmonics", c.harmonics},
                     {"qbar_min_cm3_s", c.inverse.qbar_min},
                     {"qbar_max_cm3_s", c.inverse.qbar_max},
                     {"alpha_initial", c.inverse.alpha_initial},
                     {"grid_intervals", c.inverse.grid_intervals},
                     {"elastic_term", std::string(to_string(c.inverse.convention))},
                     {"fluid", {{"density_g_cm3", c.density}, {"viscosity_pa_s", c.viscosity_pa_s}}},
                     {"integrator",
                      {{"rel_tol", s.rel_tol},
                       {"abs_tol", s.abs_tol},
                       {"max_step_s", std::isfinite(s.max_step) ? json(s.max_step) : json(nullptr)},
                       {"blowup_cap", s.blowup_cap}}},
                     {"flow_fractions", c.flow_fractions}};
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_json(path), path.parent_path());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::infeasible:
    case ErrorCode::no_bracket:
    case ErrorCode::resonant_multiplier:
    case ErrorCode::empty_feasible_interval:
    case ErrorCode::none_admissible:
    case ErrorCode::non_unique:
    case ErrorCode::degenerate_quadratic:
      return 2;
    default:
      return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Pulsatile inlet flow reconstruction from periodic lumen-area data"};
  app.require_subcommand(1);
  Session session;
  app.add_flag("--verbose,-v", session.verbose, "Progress and warnings on stderr");

  std::string config, out, report;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory")->required();
    sub->add_option("--seed", seed, "RNG seed (synthetic data only)");
    sub->add_flag("--verbose,-v", session.verbose, "Progress and warnings on stderr");
  };
  auto* synth = app.add_subcommand("synth", "Generate a synthetic area grid");
  auto* recon = app.add_subcommand("reconstruct", "Estimate alpha and reconstruct the flow");
  auto* sens = app.add_subcommand("sensitivity", "Sensitivity of the flow to alpha at the optimum");
  auto* hemo = app.add_subcommand("hemo", "Reynolds and Womersley profiles");
  for (auto* sub : {synth, recon, sens, hemo}) add_common(sub);
  for (auto* sub : {sens, hemo}) sub->add_option("--report", report, "report.json of a reconstruct run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    session.out_dir = out;
    fs::create_directories(session.out_dir);
    for (auto* sub : {synth, recon, sens, hemo}) {
      if (sub->count("--seed")) session.seed = seed;
    }
    const fs::path report_path = report.empty() ? session.out_dir / "report.json" : fs::path(report);
    if (*synth) return cmd_synth(session, config);
    if (*recon) return cmd_reconstruct(session, config);
    if (*sens) return cmd_sensitivity(session, config, report_path);
    return cmd_hemo(session, config, report_path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "IoError: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "InvalidArgument: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pulseflow
