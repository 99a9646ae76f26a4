#include "pulseflow/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "pulseflow/error.hpp"

namespace pulseflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPulseWeights[] = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
constexpr int kNormGrid = 4096;

double station(const SynthSpec& s, std::size_t j) {
  if (j + 1 == s.stations) return s.length;
  return s.length * static_cast<double>(j) / static_cast<double>(s.stations - 1);
}

// Pulse phase lag of station x, in radians per harmonic.
double lag(const SynthSpec& s, double x) {
  if (std::isinf(s.wave_speed)) return 0.0;
  return kTwoPi * x / (s.wave_speed * s.period);
}

}  // namespace

void SynthSpec::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
  if (!(period > 0.0) || !std::isfinite(period)) bad("period must be positive");
  if (!(length > 0.0) || !std::isfinite(length)) bad("length must be positive");
  if (stations < 2) bad("need at least two stations");
  if (phases < 2 * static_cast<std::size_t>(std::max(pulse_harmonics, 0)) + 1) {
    throw Error(ErrorCode::too_few_phases, "phases must be at least 2H+1");
  }
  if (!(area_inlet > 0.0) || !(area_outlet > 0.0)) {
    throw Error(ErrorCode::non_positive_area, "taper end areas must be positive");
  }
  if (!(amplitude >= 0.0) || !(amplitude < 0.2)) bad("amplitude must lie in [0, 0.2)");
  if (!(wave_speed > 0.0)) bad("wave speed must be positive");
  if (pulse_harmonics < 1 || pulse_harmonics > static_cast<int>(std::size(kPulseWeights))) {
    bad("pulse harmonics must lie in [1, 6]");
  }
  if (!(alpha_true > 0.0)) bad("alpha must be positive");
}

double SynthSpec::base_area(double x) const {
  return area_inlet + (area_outlet - area_inlet) * x / length;
}

void to_json(nlohmann::json& j, const SynthSpec& s) {
  j = nlohmann::json{{"period_s", s.period},
                     {"length_cm", s.length},
                     {"stations", s.stations},
                     {"phases", s.phases},
                     {"area_inlet_cm2", s.area_inlet},
                     {"area_outlet_cm2", s.area_outlet},
                     {"amplitude", s.amplitude},
                     {"pulse_harmonics", s.pulse_harmonics},
                     {"alpha_true", s.alpha_true},
                     {"seed", s.seed}};
  if (std::isinf(s.wave_speed)) {
    j["wave_speed_cm_s"] = nullptr;
  } else {
    j["wave_speed_cm_s"] = s.wave_speed;
  }
}

void from_json(const nlohmann::json& j, SynthSpec& s) {
  SynthSpec d;
  s.period = j.value("period_s", d.period);
  s.length = j.value("length_cm", d.length);
  s.stations = j.value("stations", d.stations);
  s.phases = j.value("phases", d.phases);
  s.area_inlet = j.value("area_inlet_cm2", d.area_inlet);
  s.area_outlet = j.value("area_outlet_cm2", d.area_outlet);
  s.amplitude = j.value("amplitude", d.amplitude);
  s.pulse_harmonics = j.value("pulse_harmonics", d.pulse_harmonics);
  s.alpha_true = j.value("alpha_true", d.alpha_true);
  s.seed = j.value("seed", d.seed);
  if (j.contains("wave_speed_cm_s") && j.at("wave_speed_cm_s").is_null()) {
    s.wave_speed = std::numeric_limits<double>::infinity();
  } else {
    s.wave_speed = j.value("wave_speed_cm_s", d.wave_speed);
  }
}

double Pulse::operator()(double theta) const {
  double v = 0.0;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    v += weights[m] * std::cos(static_cast<double>(m + 1) * theta + phases[m]);
  }
  return v;
}

Pulse make_pulse(const SynthSpec& spec) {
  Pulse p;
  std::mt19937_64 rng(spec.seed);
  for (int m = 0; m < spec.pulse_harmonics; ++m) {
    p.weights.push_back(kPulseWeights[m]);
    // 53 random bits mapped to [0, 2 pi), identical on every platform.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    p.phases.push_back(m == 0 ? 0.0 : kTwoPi * u);
  }
  double peak = 0.0;
  for (int k = 0; k < kNormGrid; ++k) peak = std::max(peak, std::abs(p(kTwoPi * k / kNormGrid)));
  for (double& w : p.weights) w /= peak;
  return p;
}

AreaSamples generate(const SynthSpec& spec) {
  spec.validate();
  const Pulse g = make_pulse(spec);
  AreaSamples out;
  out.period = spec.period;
  out.phase_count = spec.phases;
  for (std::size_t j = 0; j < spec.stations; ++j) out.stations.push_back(station(spec, j));
  out.values.reserve(spec.phases * spec.stations);
  for (std::size_t k = 0; k < spec.phases; ++k) {
    const double theta_t = kTwoPi * static_cast<double>(k) / static_cast<double>(spec.phases);
    for (double x : out.stations) {
      const double v = spec.base_area(x) * (1.0 + spec.amplitude * g(theta_t - lag(spec, x)));
      if (!(v > 0.0)) {
        throw Error(ErrorCode::non_positive_area, "generated area " + std::to_string(v) + " at x=" +
                                                      std::to_string(x));
      }
      out.values.push_back(v);
    }
  }
  return out;
}

TrigSeries exact_series(const SynthSpec& spec, double x) {
  const Pulse g = make_pulse(spec);
  TrigSeries s;
  s.period = spec.period;
  const double s0 = spec.base_area(x);
  s.mean = s0;
  for (std::size_t m = 0; m < g.weights.size(); ++m) {
    const double psi = g.phases[m] - static_cast<double>(m + 1) * lag(spec, x);
    s.cos_coeffs.push_back(s0 * spec.amplitude * g.weights[m] * std::cos(psi));
    s.sin_coeffs.push_back(-s0 * spec.amplitude * g.weights[m] * std::sin(psi));
  }
  return s;
}

}  // namespace pulseflow
