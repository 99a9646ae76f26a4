#include "pulseflow/area_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pulseflow/error.hpp"

namespace pulseflow {

namespace {

double wrap_phase(double t, double period) {
  double w = std::fmod(t, period);
  if (w < 0.0) w += period;
  return w;
}

TrigSeries::Derivatives lerp(const TrigSeries::Derivatives& a, const TrigSeries::Derivatives& b,
                             double w) {
  return {a.value + w * (b.value - a.value), a.d1 + w * (b.d1 - a.d1), a.d2 + w * (b.d2 - a.d2)};
}

}  // namespace

double polygon_area(const ContourRing& ring) {
  const auto& p = ring.points;
  if (p.size() < 3) {
    throw Error(ErrorCode::fewer_than_three_points,
                "contour has " + std::to_string(p.size()) + " points");
  }
  // Shoelace about the first vertex keeps the sum well conditioned for rings
  // far from the origin.
  const Point2 o = p.front();
  double twice = 0.0;
  double scale = 0.0;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double ax = p[i].x - o.x, ay = p[i].y - o.y;
    const double bx = p[i + 1].x - o.x, by = p[i + 1].y - o.y;
    twice += ax * by - bx * ay;
    scale += std::abs(ax * by) + std::abs(bx * ay);
  }
  if (!(std::abs(twice) > 1e-14 * scale)) {
    throw Error(ErrorCode::zero_area, "contour encloses no area");
  }
  return 0.5 * std::abs(twice);
}

void AreaSamples::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw Error(ErrorCode::invalid_argument, "period must be positive");
  }
  if (stations.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "need at least two stations");
  }
  for (std::size_t j = 1; j < stations.size(); ++j) {
    if (!(stations[j] > stations[j - 1])) {
      throw Error(ErrorCode::invalid_argument, "stations must be strictly increasing");
    }
  }
  if (values.size() != phase_count * stations.size()) {
    throw Error(ErrorCode::invalid_argument, "sample grid has wrong size");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::non_positive_area,
                  "sample " + std::to_string(i / stations.size()) + "," +
                      std::to_string(i % stations.size()) + " is " + std::to_string(values[i]));
    }
  }
}

TrigSeries::Derivatives TrigSeries::eval(double t) const {
  const double w = 2.0 * std::numbers::pi / period;
  const double phase = w * wrap_phase(t, period);
  const double c1 = std::cos(phase);
  const double s1 = std::sin(phase);
  Derivatives out{mean, 0.0, 0.0};
  double cm = c1, sm = s1;
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m) {
    const double mw = static_cast<double>(m + 1) * w;
    const double v = cos_coeffs[m] * cm + sin_coeffs[m] * sm;
    out.value += v;
    out.d1 += mw * (sin_coeffs[m] * cm - cos_coeffs[m] * sm);
    out.d2 -= mw * mw * v;
    const double cn = cm * c1 - sm * s1;
    sm = sm * c1 + cm * s1;
    cm = cn;
  }
  return out;
}

TrigSeries project_trig_series(std::span<const double> samples, double period, int harmonics) {
  const std::size_t m_count = samples.size();
  if (harmonics < 0 || m_count < static_cast<std::size_t>(2 * harmonics + 1)) {
    throw Error(ErrorCode::too_few_phases, std::to_string(m_count) + " phases cannot carry " +
                                               std::to_string(harmonics) + " harmonics");
  }
  TrigSeries s;
  s.period = period;
  s.cos_coeffs.assign(static_cast<std::size_t>(harmonics), 0.0);
  s.sin_coeffs.assign(static_cast<std::size_t>(harmonics), 0.0);
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(m_count);
  for (int m = 1; m <= harmonics; ++m) {
    double ac = 0.0, as = 0.0;
    for (std::size_t k = 0; k < m_count; ++k) {
      // Reduce m*k mod M first so the angle stays exact for large k.
      const auto idx = (static_cast<std::size_t>(m) * k) % m_count;
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(m_count);
      ac += samples[k] * std::cos(ang);
      as += samples[k] * std::sin(ang);
    }
    s.cos_coeffs[static_cast<std::size_t>(m - 1)] = 2.0 * ac / static_cast<double>(m_count);
    s.sin_coeffs[static_cast<std::size_t>(m - 1)] = 2.0 * as / static_cast<double>(m_count);
  }
  // Harmonics at rounding level are zeroed so that a constant signal yields
  // an exactly constant series.
  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * peak;
  for (auto* c : {&s.cos_coeffs, &s.sin_coeffs}) {
    for (double& v : *c) {
      if (std::abs(v) <= floor) v = 0.0;
    }
  }
  return s;
}

AreaField::AreaField(double period, std::vector<double> stations, std::vector<TrigSeries> series,
                     std::vector<double> fit_residuals)
    : period_(period),
      stations_(std::move(stations)),
      series_(std::move(series)),
      residuals_(std::move(fit_residuals)) {
  if (!(period_ > 0.0)) throw Error(ErrorCode::invalid_argument, "period must be positive");
  if (stations_.size() < 2 || stations_.size() != series_.size()) {
    throw Error(ErrorCode::invalid_argument, "need one series per station and at least two stations");
  }
  for (std::size_t j = 1; j < stations_.size(); ++j) {
    if (!(stations_[j] > stations_[j - 1])) {
      throw Error(ErrorCode::invalid_argument, "stations must be strictly increasing");
    }
  }
  // Linear interpolation in x: positivity at the stations is positivity everywhere.
  for (std::size_t j = 0; j < series_.size(); ++j) {
    series_[j].period = period_;
    for (int k = 0; k < kPositivityGrid; ++k) {
      const double t = period_ * k / kPositivityGrid;
      const double v = series_[j].value(t);
      if (!(v > 0.0)) {
        throw Error(ErrorCode::non_positive_reconstruction,
                    "fitted area at station " + std::to_string(stations_[j]) + " cm, t=" +
                        std::to_string(t) + " s is " + std::to_string(v));
      }
    }
  }
}

double AreaField::clamp_x(double x) const {
  const double tol = 1e-9 * std::max(1.0, x_max() - x_min());
  if (!(x >= x_min() - tol && x <= x_max() + tol)) {
    throw Error(ErrorCode::x_out_of_range,
                "x=" + std::to_string(x) + " outside [" + std::to_string(x_min()) + ", " +
                    std::to_string(x_max()) + "]");
  }
  return std::clamp(x, x_min(), x_max());
}

std::size_t AreaField::locate(double x) const {
  // Index j of the interval [x_j, x_{j+1}] holding x.
  auto it = std::upper_bound(stations_.begin(), stations_.end(), x);
  std::size_t j = it == stations_.begin() ? 0 : static_cast<std::size_t>(it - stations_.begin()) - 1;
  return std::min(j, stations_.size() - 2);
}

TrigSeries::Derivatives AreaField::at_x(double t, double x) const {
  x = clamp_x(x);
  const std::size_t j = locate(x);
  const double w = (x - stations_[j]) / (stations_[j + 1] - stations_[j]);
  if (w == 0.0) return series_[j].eval(t);
  if (w == 1.0) return series_[j + 1].eval(t);
  return lerp(series_[j].eval(t), series_[j + 1].eval(t), w);
}

double AreaField::area(double t, double x) const { return at_x(t, x).value; }
double AreaField::area_dt(double t, double x) const { return at_x(t, x).d1; }
double AreaField::area_dt2(double t, double x) const { return at_x(t, x).d2; }

std::vector<AreaField::Node> AreaField::nodes(double t, double x0, double x1) const {
  x0 = clamp_x(x0);
  x1 = clamp_x(x1);
  if (x1 < x0) {
    throw Error(ErrorCode::reversed_interval,
                "x0=" + std::to_string(x0) + " > x=" + std::to_string(x1));
  }
  std::vector<Node> out;
  out.push_back({x0, at_x(t, x0)});
  for (std::size_t j = 0; j < stations_.size(); ++j) {
    if (stations_[j] > x0 && stations_[j] < x1) out.push_back({stations_[j], series_[j].eval(t)});
  }
  if (x1 > x0) out.push_back({x1, at_x(t, x1)});
  return out;
}

SectionSample AreaField::section(double t, double x0, double x1) const {
  const auto n = nodes(t, x0, x1);
  SectionSample s;
  s.area_start = n.front().d.value;
  s.area_end = n.back().d.value;
  const double end = n.back().x;
  for (std::size_t i = 0; i + 1 < n.size(); ++i) {
    const double h = n[i + 1].x - n[i].x;
    const auto& a = n[i].d;
    const auto& b = n[i + 1].d;
    s.flux_end -= 0.5 * h * (a.d1 + b.d1);
    // int over [a,b] of (end - y) * d2S/dt2(y), exact for linear d2S/dt2.
    s.flux_rate_integral -=
        (end - n[i + 1].x) * 0.5 * h * (a.d2 + b.d2) + h * h * (a.d2 / 3.0 + b.d2 / 6.0);
  }
  return s;
}

double AreaField::wall_flux(double t, double x0, double x) const {
  return section(t, x0, x).flux_end;
}

double AreaField::wall_flux_dt(double t, double x0, double x) const {
  const auto n = nodes(t, x0, x);
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < n.size(); ++i) {
    v -= 0.5 * (n[i + 1].x - n[i].x) * (n[i].d.d2 + n[i + 1].d.d2);
  }
  return v;
}

double AreaField::wall_flux_dt_integral(double t, double x0, double x1) const {
  return section(t, x0, x1).flux_rate_integral;
}

AreaField fit_fourier(const AreaSamples& samples, int harmonics) {
  if (harmonics < 0) throw Error(ErrorCode::invalid_argument, "harmonic count must be >= 0");
  if (samples.phase_count < static_cast<std::size_t>(2 * harmonics + 1)) {
    throw Error(ErrorCode::too_few_phases,
                std::to_string(samples.phase_count) + " phases < 2H+1 = " +
                    std::to_string(2 * harmonics + 1));
  }
  samples.validate();
  const std::size_t n = samples.station_count();
  const std::size_t m = samples.phase_count;
  std::vector<TrigSeries> series;
  std::vector<double> residuals;
  series.reserve(n);
  residuals.reserve(n);
  std::vector<double> column(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < m; ++k) column[k] = samples.at(k, j);
    auto s = project_trig_series(column, samples.period, harmonics);
    double ss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double r = column[k] - s.value(samples.period * static_cast<double>(k) / static_cast<double>(m));
      ss += r * r;
    }
    residuals.push_back(std::sqrt(ss / static_cast<double>(m)));
    series.push_back(std::move(s));
  }
  return AreaField(samples.period, samples.stations, std::move(series), std::move(residuals));
}

}  // namespace pulseflow
