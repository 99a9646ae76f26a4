#pragma once

#include <numbers>
#include <string_view>
#include <vector>

#include "pulseflow/area_field.hpp"

namespace pulseflow {

struct FluidProperties {
  double density = 1.06;     // g/cm^3
  double viscosity = 0.035;  // dynamic, g/(cm s)
  double angular_frequency = 2.0 * std::numbers::pi;  // rad/s

  static FluidProperties for_period(double period, double density = 1.06, double viscosity = 0.035);
  /// Viscosity given in Pa s.
  static double viscosity_from_pascal_seconds(double pa_s) { return 10.0 * pa_s; }
  void validate() const;
};

/// 2 v r rho / eta with v = q/S, r = sqrt(S/pi).
double reynolds(double flow, double area, const FluidProperties& props);
/// 2 r sqrt(omega rho / eta).
double womersley(double area, const FluidProperties& props);

std::string_view reynolds_regime(double re);    // laminar | transition | turbulent
std::string_view womersley_profile(double wo);  // parabolic | intermediate | flat

struct HemoStation {
  double x = 0.0;  // cm
  double womersley = 0.0;
  double reynolds_mean = 0.0;
  double reynolds_peak = 0.0;
  std::string_view regime;          // from reynolds_peak
  std::string_view velocity_profile;
};

/// One entry per position; flows[i][k] is q(t_k, x_i) on the grid t.
std::vector<HemoStation> profile(const AreaField& field, const std::vector<double>& t,
                                 const std::vector<double>& positions,
                                 const std::vector<std::vector<double>>& flows,
                                 const FluidProperties& props);

}  // namespace pulseflow
