#pragma once

// Periodic, axially sampled lumen area S(t, x) and the wall-motion flux
//   Phi(t; x0, x) = -int_{x0}^{x} dS/dt(t, y) dy
// that links the inlet flow of a section to the flow at any downstream point.
//
// Time dependence is a truncated Fourier series per station (exact derivatives);
// axial dependence is piecewise linear between stations, so every x-integral
// below is evaluated in closed form.

#include <cstddef>
#include <span>
#include <vector>

namespace pulseflow {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Lumen wall of one slice at one cardiac phase (cm). Closed implicitly.
struct ContourRing {
  std::vector<Point2> points;
};

/// Absolute shoelace area of a ring (cm^2), independent of orientation.
double polygon_area(const ContourRing& ring);

/// Raw periodic area grid: values[k * stations.size() + j] = S(t_k, x_j),
/// with t_k = k T / M over exactly one period (t = T is not stored).
struct AreaSamples {
  double period = 1.0;
  std::vector<double> stations;
  std::size_t phase_count = 0;
  std::vector<double> values;

  double at(std::size_t phase, std::size_t station) const {
    return values[phase * stations.size() + station];
  }
  std::size_t station_count() const { return stations.size(); }

  /// Checks shape, station ordering and positivity; throws Error.
  void validate() const;
};

/// a0 + sum_m a_m cos(m w t) + b_m sin(m w t), w = 2 pi / period.
struct TrigSeries {
  double period = 1.0;
  double mean = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  struct Derivatives {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
  };

  int harmonics() const { return static_cast<int>(cos_coeffs.size()); }
  Derivatives eval(double t) const;
  double value(double t) const { return eval(t).value; }
};

/// Discrete Fourier projection of M uniform samples over one period onto the
/// first `harmonics` harmonics. For M >= 2H+1 this is the least-squares fit.
TrigSeries project_trig_series(std::span<const double> samples, double period, int harmonics);

/// Everything a block of [x0, x1] needs at one instant.
struct SectionSample {
  double area_start = 0.0;         // S(t, x0)
  double area_end = 0.0;           // S(t, x1)
  double flux_end = 0.0;           // Phi(t; x0, x1)
  double flux_rate_integral = 0.0; // int_{x0}^{x1} dPhi/dt(t; x0, y) dy
};

class AreaField {
 public:
  /// Validates strictly increasing stations and positivity of every series on
  /// a check grid of `kPositivityGrid` points per period.
  AreaField(double period, std::vector<double> stations, std::vector<TrigSeries> series,
            std::vector<double> fit_residuals = {});

  static constexpr int kPositivityGrid = 64;

  double period() const { return period_; }
  int harmonics() const { return series_.empty() ? 0 : series_.front().harmonics(); }
  std::span<const double> stations() const { return stations_; }
  std::span<const TrigSeries> series() const { return series_; }
  /// RMS residual of the Fourier fit per station (empty if not built by a fit).
  std::span<const double> fit_residuals() const { return residuals_; }
  double x_min() const { return stations_.front(); }
  double x_max() const { return stations_.back(); }

  double area(double t, double x) const;
  double area_dt(double t, double x) const;
  double area_dt2(double t, double x) const;

  /// Phi(t; x0, x). Requires x0 <= x.
  double wall_flux(double t, double x0, double x) const;
  /// dPhi/dt(t; x0, x).
  double wall_flux_dt(double t, double x0, double x) const;
  /// int_{x0}^{x1} dPhi/dt(t; x0, y) dy.
  double wall_flux_dt_integral(double t, double x0, double x1) const;

  SectionSample section(double t, double x0, double x1) const;

 private:
  struct Node {
    double x;
    TrigSeries::Derivatives d;
  };
  std::size_t locate(double x) const;
  double clamp_x(double x) const;
  TrigSeries::Derivatives at_x(double t, double x) const;
  // Station nodes covering [x0, x1], with interpolated end points.
  std::vector<Node> nodes(double t, double x0, double x1) const;

  double period_;
  std::vector<double> stations_;
  std::vector<TrigSeries> series_;
  std::vector<double> residuals_;
};

/// Per-station Fourier fit with `harmonics` harmonics (default 3).
AreaField fit_fourier(const AreaSamples& samples, int harmonics = 3);

}  // namespace pulseflow
