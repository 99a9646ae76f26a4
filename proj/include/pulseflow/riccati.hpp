#pragma once

// Periodic scalar Riccati equation dQ/dt = A(t) Q^2 + B(t) Q + C0(t) + alpha C1(t)
// for the inlet flow Q of one vessel block, and its periodic solutions.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pulseflow/area_field.hpp"
#include "pulseflow/ode.hpp"

namespace pulseflow {

/// Axial block [x_start, x_start + length] of an area field (non-owning).
struct Block {
  const AreaField* field = nullptr;
  double x_start = 0.0;  // cm
  double length = 1.0;   // cm

  double x_end() const { return x_start + length; }
  void validate() const;
};

/// Sign of the elastic term C1.
///  integrated_momentum: C1 = -(2/L) [sqrt S], from integrating the momentum
///                       balance over the block (default).
///  reversed:            C1 = +(2/L) [sqrt S].
enum class ElasticTermConvention { integrated_momentum, reversed };

std::string_view to_string(ElasticTermConvention c) noexcept;
ElasticTermConvention parse_elastic_term(std::string_view name);

struct CoefficientSample {
  double A = 0.0;         // cm^-3
  double B = 0.0;         // s^-1
  double C0 = 0.0;        // cm^3/s^2
  double C1 = 0.0;        // 1
  double flux_end = 0.0;  // Phi(t; x_start, x_end), cm^3/s

  double C(double alpha) const { return C0 + alpha * C1; }
};

class RiccatiCoefficients {
 public:
  static RiccatiCoefficients from_block(const Block& block,
                                        ElasticTermConvention convention =
                                            ElasticTermConvention::integrated_momentum);
  /// Coefficients given directly as periodic series (used for injected data).
  static RiccatiCoefficients from_series(double period, TrigSeries A, TrigSeries B, TrigSeries C0,
                                         TrigSeries C1);
  static RiccatiCoefficients constant(double period, double A, double B, double C0,
                                      double C1 = 0.0);

  CoefficientSample at(double t) const;
  double period() const { return period_; }
  const std::optional<Block>& block() const { return block_; }
  ElasticTermConvention convention() const { return convention_; }

 private:
  RiccatiCoefficients() = default;

  double period_ = 1.0;
  std::optional<Block> block_;
  ElasticTermConvention convention_ = ElasticTermConvention::integrated_momentum;
  std::array<TrigSeries, 4> series_;
};

RiccatiCoefficients assemble_coefficients(const Block& block,
                                          ElasticTermConvention convention =
                                              ElasticTermConvention::integrated_momentum);

inline constexpr std::size_t kDefaultGridIntervals = 512;

struct RiccatiTrajectory {
  std::vector<double> t;
  std::vector<double> q;
  std::optional<double> escape_time;

  bool blowup() const { return escape_time.has_value(); }
};

/// Q on a uniform grid of `intervals` steps over [t0, t1]. On blow-up the
/// samples stop before the escape time.
RiccatiTrajectory integrate_riccati(const RiccatiCoefficients& coeffs, double alpha, double q_init,
                                    double t0, double t1, const IntegratorSettings& settings,
                                    std::size_t intervals = kDefaultGridIntervals);

/// Q, l = int (2AQ + B) and the particular sensitivity P_p (P_p(0) = 0,
/// P_p' = (2AQ + B) P_p + C1) integrated together from Q(0) = q_start.
struct LinearizedOrbit {
  GridPath<3> path;
  double log_multiplier = 0.0;
  double multiplier = 0.0;  // exp(log_multiplier); +inf when the orbit escaped
  bool escaped = false;
};

LinearizedOrbit linearized_orbit(const RiccatiCoefficients& coeffs, double alpha, double q_start,
                                 const IntegratorSettings& settings,
                                 std::size_t intervals = kDefaultGridIntervals);

enum class PeriodicMethod { quadrature, shooting };

struct PeriodicSolution {
  PeriodicMethod method = PeriodicMethod::quadrature;
  std::vector<double> t;
  std::vector<double> q;
  std::optional<double> k_root;
  std::optional<double> discriminant;
  bool admissible = false;
  double mean = 0.0;        // (1/T) int Q dt
  double multiplier = 0.0;  // exp(int (2AQ + B) dt)
  double periodicity_defect = 0.0;

  double period() const { return t.back() - t.front(); }
};

/// Tolerance of the periodicity invariant |Q(T) - Q(0)|.
double periodicity_tolerance(const IntegratorSettings& settings, double max_abs_q);

struct PeriodicOptions {
  IntegratorSettings integrator;
  std::size_t grid_intervals = kDefaultGridIntervals;
  std::size_t scan_points = 64;
  std::optional<std::pair<double, double>> scan_range;
};

/// Periodicity quadratic a K^2 + b K + c = 0, divided through by W_h(T).
struct PeriodicityQuadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double discriminant() const { return b * b - 4.0 * a * c; }
};

struct QuadratureResult {
  std::vector<PeriodicSolution> solutions;
  PeriodicityQuadratic quadratic;
  double discriminant = 0.0;
  std::vector<double> k_roots;
  std::vector<std::string> log;
};

/// Periodic solutions from Q = Q0 - 1/W. Throws ParticularSolutionBlowup when
/// Q0 escapes on [0, T] and DegenerateQuadratic when every constant-order
/// coefficient vanishes.
QuadratureResult quadrature_periodic(const RiccatiCoefficients& coeffs, double alpha,
                                     const PeriodicOptions& options = {});

struct ScanPoint {
  double q = 0.0;
  double residual = 0.0;  // Q(T) - q; +-inf when the trajectory escaped
  bool escaped = false;
};

struct ShootingResult {
  std::vector<PeriodicSolution> solutions;
  std::vector<ScanPoint> scan;
  std::pair<double, double> range{0.0, 0.0};
  bool non_unique = false;
  std::vector<std::string> log;
};

/// Fixed points of the period map located by scan and bisection. Without an
/// explicit range the scan covers the nullcline envelope plus padding.
ShootingResult shooting_periodic(const RiccatiCoefficients& coeffs, double alpha,
                                 const PeriodicOptions& options = {});

/// Quadrature with fallback to shooting when Q0 escapes or no root survives.
struct PeriodicSet {
  std::vector<PeriodicSolution> solutions;
  std::optional<double> discriminant;
  bool fell_back = false;
  std::vector<std::string> log;
};

PeriodicSet solve_periodic(const RiccatiCoefficients& coeffs, double alpha,
                           const PeriodicOptions& options = {});

struct KotinResult {
  bool holds = false;
  double witness_t = 0.0;
  double witness_value = 0.0;  // min over t of -A C
};

KotinResult kotin_check(const RiccatiCoefficients& coeffs, double alpha, std::size_t grid = 512);

struct Selection {
  PeriodicSolution solution;
  bool ambiguous = false;
};

/// The positive-mean solution; the larger mean (flagged ambiguous) when two
/// qualify. Throws NoneAdmissible.
Selection select_admissible(const std::vector<PeriodicSolution>& solutions);

/// Real roots of A Q^2 + B Q + C at t, ascending.
std::vector<double> nullcline(const RiccatiCoefficients& coeffs, double alpha, double t);
std::vector<double> quadratic_roots(double a, double b, double c, double linear_tol = 1e-14);

}  // namespace pulseflow
