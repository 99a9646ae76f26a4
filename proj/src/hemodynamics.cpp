#include "pulseflow/hemodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pulseflow/error.hpp"
#include "pulseflow/numerics.hpp"

namespace pulseflow {

FluidProperties FluidProperties::for_period(double period, double density, double viscosity) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "period must be positive");
  FluidProperties p{density, viscosity, 2.0 * std::numbers::pi / period};
  p.validate();
  return p;
}

void FluidProperties::validate() const {
  if (!(density > 0.0) || !(viscosity > 0.0) || !(angular_frequency > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "fluid properties must be positive");
  }
}

double reynolds(double flow, double area, const FluidProperties& props) {
  if (!(area > 0.0)) throw Error(ErrorCode::non_positive_area, "area " + std::to_string(area));
  const double v = flow / area;
  const double r = std::sqrt(area / std::numbers::pi);
  return 2.0 * v * r * props.density / props.viscosity;
}

double womersley(double area, const FluidProperties& props) {
  if (!(area > 0.0)) throw Error(ErrorCode::non_positive_area, "area " + std::to_string(area));
  const double r = std::sqrt(area / std::numbers::pi);
  return 2.0 * r * std::sqrt(props.angular_frequency * props.density / props.viscosity);
}

std::string_view reynolds_regime(double re) {
  const double a = std::abs(re);
  if (a < 2100.0) return "laminar";
  if (a > 4000.0) return "turbulent";
  return "transition";
}

std::string_view womersley_profile(double wo) {
  if (wo < 1.0) return "parabolic";
  if (wo > 10.0) return "flat";
  return "intermediate";
}

std::vector<HemoStation> profile(const AreaField& field, const std::vector<double>& t,
                                 const std::vector<double>& positions,
                                 const std::vector<std::vector<double>>& flows,
                                 const FluidProperties& props) {
  props.validate();
  if (flows.size() != positions.size()) {
    throw Error(ErrorCode::invalid_argument, "one flow curve per position required");
  }
  std::vector<HemoStation> out;
  const double span = t.back() - t.front();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto& q = flows[i];
    if (q.size() != t.size()) throw Error(ErrorCode::invalid_argument, "flow curve length mismatch");
    std::vector<double> area(t.size()), abs_q(t.size());
    double peak = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      area[k] = field.area(t[k], positions[i]);
      abs_q[k] = std::abs(q[k]);
      peak = std::max(peak, std::abs(reynolds(q[k], area[k], props)));
    }
    const double mean_area = trapezoid(t, area) / span;
    const double mean_flow = trapezoid(t, abs_q) / span;
    HemoStation s;
    s.x = positions[i];
    s.womersley = womersley(mean_area, props);
    s.reynolds_mean = reynolds(mean_flow, mean_area, props);
    s.reynolds_peak = peak;
    s.regime = reynolds_regime(s.reynolds_peak);
    s.velocity_profile = womersley_profile(s.womersley);
    out.push_back(s);
  }
  return out;
}

}  // namespace pulseflow
