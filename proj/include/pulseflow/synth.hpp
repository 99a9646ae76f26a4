#pragma once

// Synthetic pulsating vessel: a linear taper modulated by a travelling pulse,
// S(t, x) = S0(x) (1 + eps g(2 pi (t/T - x/(c T)))).

#include <cstdint>
#include <limits>
#include <vector>

#include "json.hpp"
#include "pulseflow/area_field.hpp"

namespace pulseflow {

struct SynthSpec {
  double period = 1.0;          // s
  double length = 10.0;         // cm
  std::size_t stations = 11;
  std::size_t phases = 64;
  double area_inlet = 7.0;      // cm^2
  double area_outlet = 5.0;     // cm^2
  double amplitude = 0.02;      // eps
  double wave_speed = 500.0;    // cm/s; infinity gives an in-phase pulse
  int pulse_harmonics = 3;
  double alpha_true = 2500.0;   // cm^3/s^2
  std::uint64_t seed = 1;

  void validate() const;
  double base_area(double x) const;
};

void to_json(nlohmann::json& j, const SynthSpec& s);
void from_json(const nlohmann::json& j, SynthSpec& s);

/// Unit-amplitude pulse g(theta) = sum_m w_m cos(m theta + phi_m) / max|.|.
struct Pulse {
  std::vector<double> weights;
  std::vector<double> phases;

  double operator()(double theta) const;
};

Pulse make_pulse(const SynthSpec& spec);

AreaSamples generate(const SynthSpec& spec);

/// Closed-form Fourier series of the generated field at axial position x.
TrigSeries exact_series(const SynthSpec& spec, double x);

}  // namespace pulseflow
