#include "pulseflow/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pulseflow/error.hpp"
#include "pulseflow/numerics.hpp"

namespace pulseflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

TrigSeries constant_series(double period, double v) {
  TrigSeries s;
  s.period = period;
  s.mean = v;
  return s;
}

std::vector<double> uniform_grid(double period, std::size_t intervals) {
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    t[i] = i == intervals ? period : period * static_cast<double>(i) / static_cast<double>(intervals);
  }
  return t;
}

double mean_over_period(const std::vector<double>& t, const std::vector<double>& q) {
  return trapezoid(t, q) / (t.back() - t.front());
}

// Q(T; Q(0) = q) - q, or a signed infinity in the direction of escape.
ScanPoint period_map(const RiccatiCoefficients& coeffs, double alpha, double q,
                     const IntegratorSettings& settings) {
  auto rhs = [&](double t, const Vec<1>& y) {
    const auto c = coeffs.at(t);
    return Vec<1>{(c.A * y[0] + c.B) * y[0] + c.C(alpha)};
  };
  const auto out = integrate<1>(rhs, 0.0, coeffs.period(), Vec<1>{q}, settings,
                                [](const DenseStep<1>&) {}, std::size_t{0});
  if (out.escape_time) return {q, out.y_end[0] > 0.0 ? kInf : -kInf, true};
  return {q, out.y_end[0] - q, false};
}

}  // namespace

void Block::validate() const {
  if (field == nullptr) throw Error(ErrorCode::invalid_argument, "block has no area field");
  if (!(length > 0.0)) throw Error(ErrorCode::invalid_argument, "block length must be positive");
  const double tol = 1e-9 * std::max(1.0, field->x_max() - field->x_min());
  if (x_start < field->x_min() - tol || x_end() > field->x_max() + tol) {
    throw Error(ErrorCode::x_out_of_range, "block [" + fmt(x_start) + ", " + fmt(x_end()) +
                                               "] outside station range");
  }
}

std::string_view to_string(ElasticTermConvention c) noexcept {
  return c == ElasticTermConvention::reversed ? "reversed" : "integrated_momentum";
}

ElasticTermConvention parse_elastic_term(std::string_view name) {
  if (name == "integrated_momentum") return ElasticTermConvention::integrated_momentum;
  if (name == "reversed") return ElasticTermConvention::reversed;
  throw Error(ErrorCode::invalid_argument, "unknown elastic term convention '" + std::string(name) + "'");
}

RiccatiCoefficients RiccatiCoefficients::from_block(const Block& block,
                                                    ElasticTermConvention convention) {
  block.validate();
  RiccatiCoefficients c;
  c.period_ = block.field->period();
  c.block_ = block;
  c.convention_ = convention;
  return c;
}

RiccatiCoefficients RiccatiCoefficients::from_series(double period, TrigSeries A, TrigSeries B,
                                                     TrigSeries C0, TrigSeries C1) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "period must be positive");
  RiccatiCoefficients c;
  c.period_ = period;
  c.series_ = {std::move(A), std::move(B), std::move(C0), std::move(C1)};
  for (auto& s : c.series_) s.period = period;
  return c;
}

RiccatiCoefficients RiccatiCoefficients::constant(double period, double A, double B, double C0,
                                                  double C1) {
  return from_series(period, constant_series(period, A), constant_series(period, B),
                     constant_series(period, C0), constant_series(period, C1));
}

CoefficientSample RiccatiCoefficients::at(double t) const {
  CoefficientSample s;
  if (!block_) {
    s.A = series_[0].value(t);
    s.B = series_[1].value(t);
    s.C0 = series_[2].value(t);
    s.C1 = series_[3].value(t);
    return s;
  }
  const Block& b = *block_;
  const SectionSample sec = b.field->section(t, b.x_start, b.x_end());
  const double inv_l = 1.0 / b.length;
  s.A = -inv_l * (1.0 / sec.area_end - 1.0 / sec.area_start);
  s.B = -2.0 * inv_l * sec.flux_end / sec.area_end;
  s.C0 = -inv_l * (sec.flux_end * sec.flux_end / sec.area_end + sec.flux_rate_integral);
  const double root_jump = std::sqrt(sec.area_end) - std::sqrt(sec.area_start);
  const double sign = convention_ == ElasticTermConvention::reversed ? 1.0 : -1.0;
  s.C1 = sign * 2.0 * inv_l * root_jump;
  s.flux_end = sec.flux_end;
  return s;
}

RiccatiCoefficients assemble_coefficients(const Block& block, ElasticTermConvention convention) {
  return RiccatiCoefficients::from_block(block, convention);
}

RiccatiTrajectory integrate_riccati(const RiccatiCoefficients& coeffs, double alpha, double q_init,
                                    double t0, double t1, const IntegratorSettings& settings,
                                    std::size_t intervals) {
  if (!std::isfinite(q_init)) throw Error(ErrorCode::invalid_argument, "initial value is not finite");
  auto rhs = [&](double t, const Vec<1>& y) {
    const auto c = coeffs.at(t);
    return Vec<1>{(c.A * y[0] + c.B) * y[0] + c.C(alpha)};
  };
  auto path = integrate_on_grid<1>(rhs, t0, t1, Vec<1>{q_init}, settings, intervals, std::size_t{0});
  RiccatiTrajectory out;
  out.escape_time = path.outcome.escape_time;
  out.q.reserve(path.values.size());
  for (const auto& v : path.values) out.q.push_back(v[0]);
  out.t.assign(path.t.begin(), path.t.begin() + static_cast<std::ptrdiff_t>(out.q.size()));
  return out;
}

LinearizedOrbit linearized_orbit(const RiccatiCoefficients& coeffs, double alpha, double q_start,
                                 const IntegratorSettings& settings, std::size_t intervals) {
  auto rhs = [&](double t, const Vec<3>& y) {
    const auto c = coeffs.at(t);
    const double a = 2.0 * c.A * y[0] + c.B;
    return Vec<3>{(c.A * y[0] + c.B) * y[0] + c.C(alpha), a, a * y[2] + c.C1};
  };
  LinearizedOrbit out;
  out.path = integrate_on_grid<3>(rhs, 0.0, coeffs.period(), Vec<3>{q_start, 0.0, 0.0}, settings,
                                  intervals, std::size_t{0});
  out.escaped = out.path.escaped();
  if (out.escaped) {
    out.log_multiplier = kInf;
    out.multiplier = kInf;
  } else {
    out.log_multiplier = out.path.outcome.y_end[1];
    out.multiplier = std::exp(out.log_multiplier);
  }
  return out;
}

double periodicity_tolerance(const IntegratorSettings& settings, double max_abs_q) {
  return std::max(10.0 * settings.abs_tol, 10.0 * settings.rel_tol * max_abs_q);
}

std::vector<double> quadratic_roots(double a, double b, double c, double linear_tol) {
  std::vector<double> r;
  const double scale = std::max(std::abs(b), std::abs(c));
  if (std::abs(a) <= linear_tol * scale || a == 0.0) {
    if (b != 0.0) r.push_back(-c / b);
    return r;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return r;
  if (disc == 0.0) {
    r.push_back(-b / (2.0 * a));
    return r;
  }
  // Cancellation-free pair.
  const double qq = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  r.push_back(qq / a);
  if (qq != 0.0) r.push_back(c / qq);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

std::vector<double> nullcline(const RiccatiCoefficients& coeffs, double alpha, double t) {
  const auto c = coeffs.at(t);
  return quadratic_roots(c.A, c.B, c.C(alpha));
}

QuadratureResult quadrature_periodic(const RiccatiCoefficients& coeffs, double alpha,
                                     const PeriodicOptions& options) {
  const auto& settings = options.integrator;
  const double period = coeffs.period();
  auto rhs = [&](double t, const Vec<3>& y) {
    const auto c = coeffs.at(t);
    const double a = -(2.0 * c.A * y[0] + c.B);
    return Vec<3>{(c.A * y[0] + c.B) * y[0] + c.C(alpha), a * y[1], a * y[2] + c.A};
  };
  // W must keep one sign on [0, T]; step end points supplement the grid.
  std::vector<std::array<double, 2>> step_ends;
  const auto t = uniform_grid(period, options.grid_intervals);
  std::vector<Vec<3>> values{Vec<3>{0.0, 1.0, 0.0}};
  std::size_t next = 1;
  auto on_step = [&](const DenseStep<3>& st) {
    while (next < t.size() && t[next] <= st.t1()) {
      values.push_back(st.at(t[next]));
      ++next;
    }
    step_ends.push_back({st.y1[1], st.y1[2]});
  };
  const auto outcome =
      integrate<3>(rhs, 0.0, period, Vec<3>{0.0, 1.0, 0.0},
                   grid_settings(settings, period, options.grid_intervals), on_step, std::size_t{0});
  if (outcome.escape_time) {
    throw Error(ErrorCode::particular_solution_blowup,
                "particular solution escapes at t=" + fmt(*outcome.escape_time));
  }
  values.back() = outcome.y_end;

  const double q0_end = outcome.y_end[0];
  const double wh_end = outcome.y_end[1];
  const double wih_end = outcome.y_end[2];
  double q_scale = 1.0;
  for (const auto& v : values) q_scale = std::max(q_scale, std::abs(v[0]));

  QuadratureResult res;
  res.quadratic = {q0_end, q0_end * wih_end / wh_end + 1.0 - 1.0 / wh_end, wih_end / wh_end};
  res.discriminant = res.quadratic.discriminant();
  // Dimensionless form in kappa = K * q_scale.
  const double ka = res.quadratic.a / q_scale;
  const double kb = res.quadratic.b;
  const double kc = res.quadratic.c * q_scale;
  const double degenerate_tol = std::max(1e-9, 100.0 * settings.rel_tol);
  if (std::abs(ka) <= degenerate_tol && std::abs(kb) <= degenerate_tol &&
      std::abs(kc) <= degenerate_tol) {
    throw Error(ErrorCode::degenerate_quadratic,
                "periodicity quadratic vanishes; periodic solutions form a continuum");
  }
  if (res.discriminant < 0.0) {
    res.log.push_back("discriminant " + fmt(res.discriminant) + " < 0: no real K");
    return res;
  }
  for (double kappa : quadratic_roots(ka, kb, kc)) {
    const double k = kappa / q_scale;
    res.k_roots.push_back(k);
    bool pos = false, neg = false;
    auto mark = [&](double w) {
      if (w >= 0.0) pos = true;
      if (w <= 0.0) neg = true;
    };
    for (const auto& v : values) mark(k * v[1] + v[2]);
    for (const auto& w : step_ends) mark(k * w[0] + w[1]);
    if (pos && neg) {
      res.log.push_back("K=" + fmt(k) + " rejected: W vanishes on [0,T] (pole in Q)");
      continue;
    }
    PeriodicSolution sol;
    sol.method = PeriodicMethod::quadrature;
    sol.t = t;
    sol.q.reserve(values.size());
    for (const auto& v : values) sol.q.push_back(v[0] - 1.0 / (k * v[1] + v[2]));
    sol.k_root = k;
    sol.discriminant = res.discriminant;
    sol.mean = mean_over_period(sol.t, sol.q);
    sol.admissible = sol.mean > 0.0;
    sol.periodicity_defect = std::abs(sol.q.back() - sol.q.front());
    if (sol.periodicity_defect > periodicity_tolerance(settings, max_abs(sol.q))) {
      res.log.push_back("K=" + fmt(k) + " rejected: periodicity defect " +
                        fmt(sol.periodicity_defect));
      continue;
    }
    sol.multiplier = linearized_orbit(coeffs, alpha, sol.q.front(), settings, options.grid_intervals).multiplier;
    res.solutions.push_back(std::move(sol));
  }
  std::sort(res.solutions.begin(), res.solutions.end(),
            [](const auto& x, const auto& y) { return x.q.front() < y.q.front(); });
  return res;
}

ShootingResult shooting_periodic(const RiccatiCoefficients& coeffs, double alpha,
                                 const PeriodicOptions& options) {
  const auto& settings = options.integrator;
  const std::size_t n = std::max<std::size_t>(options.scan_points, 2);
  ShootingResult res;
  if (options.scan_range) {
    res.range = *options.scan_range;
  } else {
    // A periodic orbit touches the nullcline at its extrema, so its initial
    // value lies inside the envelope of nullcline roots.
    double lo = kInf, hi = -kInf;
    constexpr std::size_t kEnvelopeGrid = 512;
    for (std::size_t i = 0; i < kEnvelopeGrid; ++i) {
      const double tt = coeffs.period() * static_cast<double>(i) / kEnvelopeGrid;
      for (double r : nullcline(coeffs, alpha, tt)) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    if (lo > hi) {
      res.range = {-1000.0, 1000.0};
    } else {
      const double pad = 0.25 * (hi - lo) + 1e-3 * std::max({1.0, std::abs(lo), std::abs(hi)});
      res.range = {lo - pad, hi + pad};
    }
  }
  const auto [lo, hi] = res.range;
  if (!(hi > lo)) throw Error(ErrorCode::invalid_argument, "empty scan range");

  res.scan.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    res.scan.push_back(period_map(coeffs, alpha, q, settings));
  }
  const bool all_fixed = std::all_of(res.scan.begin(), res.scan.end(), [&](const ScanPoint& p) {
    return !p.escaped &&
           std::abs(p.residual) <= periodicity_tolerance(settings, std::abs(p.q) + std::abs(p.residual));
  });
  if (all_fixed) {
    res.non_unique = true;
    res.log.push_back("every scan point is a fixed point of the period map");
    return res;
  }

  const double f_tol = 10.0 * settings.abs_tol;
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ScanPoint a = res.scan[i];
    ScanPoint b = res.scan[i + 1];
    if (a.residual == 0.0) {
      roots.push_back(a.q);
      continue;
    }
    if (b.residual == 0.0 || std::signbit(a.residual) == std::signbit(b.residual)) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a.q + b.q);
      if (mid <= a.q || mid >= b.q) break;
      const ScanPoint m = period_map(coeffs, alpha, mid, settings);
      if (!m.escaped && std::abs(m.residual) <= f_tol) {
        a = b = m;
        break;
      }
      if (std::signbit(m.residual) == std::signbit(a.residual)) {
        a = m;
      } else {
        b = m;
      }
    }
    const ScanPoint& best = std::abs(a.residual) <= std::abs(b.residual) ? a : b;
    if (best.escaped ||
        std::abs(best.residual) > periodicity_tolerance(settings, std::abs(best.q) + std::abs(best.residual))) {
      res.log.push_back("bracket near q=" + fmt(best.q) + " holds no fixed point (residual " +
                        fmt(best.residual) + ")");
      continue;
    }
    roots.push_back(best.q);
  }
  std::sort(roots.begin(), roots.end());
  double prev = -kInf;
  for (double r : roots) {
    if (r - prev <= 1e-9 * std::max(1.0, std::abs(r))) continue;
    prev = r;
    const auto traj = integrate_riccati(coeffs, alpha, r, 0.0, coeffs.period(), settings,
                                        options.grid_intervals);
    if (traj.blowup()) continue;
    PeriodicSolution sol;
    sol.method = PeriodicMethod::shooting;
    sol.t = traj.t;
    sol.q = traj.q;
    sol.mean = mean_over_period(sol.t, sol.q);
    sol.admissible = sol.mean > 0.0;
    sol.periodicity_defect = std::abs(sol.q.back() - sol.q.front());
    sol.multiplier = linearized_orbit(coeffs, alpha, r, settings, options.grid_intervals).multiplier;
    res.solutions.push_back(std::move(sol));
  }
  if (res.solutions.empty()) res.log.push_back("NoBracketFound");
  return res;
}

PeriodicSet solve_periodic(const RiccatiCoefficients& coeffs, double alpha,
                           const PeriodicOptions& options) {
  PeriodicSet out;
  try {
    auto quad = quadrature_periodic(coeffs, alpha, options);
    out.discriminant = quad.discriminant;
    out.log = std::move(quad.log);
    if (!quad.solutions.empty()) {
      out.solutions = std::move(quad.solutions);
      return out;
    }
    out.log.push_back("quadrature produced no solution; confirming by shooting");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::particular_solution_blowup) throw;
    out.log.push_back(std::string(e.what()) + "; falling back to shooting");
  }
  auto shot = shooting_periodic(coeffs, alpha, options);
  for (auto& l : shot.log) out.log.push_back(std::move(l));
  if (shot.non_unique) throw Error(ErrorCode::non_unique, "period map is the identity");
  out.fell_back = true;
  out.solutions = std::move(shot.solutions);
  return out;
}

KotinResult kotin_check(const RiccatiCoefficients& coeffs, double alpha, std::size_t grid) {
  KotinResult r;
  r.witness_value = kInf;
  grid = std::max<std::size_t>(grid, 512);
  for (std::size_t i = 0; i < grid; ++i) {
    const double t = coeffs.period() * static_cast<double>(i) / static_cast<double>(grid);
    const auto c = coeffs.at(t);
    const double v = -c.A * c.C(alpha);
    if (v < r.witness_value) {
      r.witness_value = v;
      r.witness_t = t;
    }
  }
  r.holds = r.witness_value > 0.0;
  return r;
}

Selection select_admissible(const std::vector<PeriodicSolution>& solutions) {
  const PeriodicSolution* best = nullptr;
  int count = 0;
  for (const auto& s : solutions) {
    if (!(s.mean > 0.0)) continue;
    ++count;
    if (best == nullptr || s.mean > best->mean) best = &s;
  }
  if (best == nullptr) {
    throw Error(ErrorCode::none_admissible,
                std::to_string(solutions.size()) + " periodic solution(s), none with positive mean");
  }
  return {*best, count > 1};
}

}  // namespace pulseflow
