#pragma once

// Dormand-Prince 5(4) with FSAL and the standard fourth-order continuous
// extension. State is a small fixed-size array; every Riccati-derived system
// here has at most three components.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pulseflow/error.hpp"

namespace pulseflow {

struct IntegratorSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();  // s
  double blowup_cap = 1e6;                                      // cm^3/s

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "integrator tolerances must be positive");
    }
    if (!(max_step > 0.0)) throw Error(ErrorCode::invalid_argument, "max_step must be positive");
    if (!(blowup_cap > 0.0)) throw Error(ErrorCode::invalid_argument, "blowup_cap must be positive");
  }
};

template <std::size_t N>
using Vec = std::array<double, N>;

namespace dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr std::array<double, 7> e = {71.0 / 57600,     0.0,         -71.0 / 16695,
                                            71.0 / 1920,      -17253.0 / 339200,
                                            22.0 / 525,       -1.0 / 40};
// Continuous extension: y(t0 + th h) = y0 + h sum_i k_i (P_i . [th, th^2, th^3, th^4]).
inline constexpr std::array<std::array<double, 4>, 7> P = {{
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408,
     701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423},
}};

}  // namespace dopri

/// One accepted step together with its interpolant.
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vec<N> y0{};
  Vec<N> y1{};
  std::array<Vec<N>, 7> k{};

  double t1() const { return t0 + h; }

  Vec<N> at(double t) const {
    if (t == t0) return y0;
    if (t == t0 + h) return y1;
    const double th = (t - t0) / h;
    const std::array<double, 4> pw = {th, th * th, th * th * th, th * th * th * th};
    Vec<N> y = y0;
    for (std::size_t i = 0; i < 7; ++i) {
      const auto& p = dopri::P[i];
      const double w = h * (p[0] * pw[0] + p[1] * pw[1] + p[2] * pw[2] + p[3] * pw[3]);
      if (w == 0.0) continue;
      for (std::size_t c = 0; c < N; ++c) y[c] += w * k[i][c];
    }
    return y;
  }
};

template <std::size_t N>
struct IntegrationOutcome {
  double t_end = 0.0;
  Vec<N> y_end{};
  std::optional<double> escape_time;  // set when |y[watch]| crossed the blow-up cap
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

namespace detail {

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& ya, const Vec<N>& yb,
                  const IntegratorSettings& s) {
  double acc = 0.0;
  for (std::size_t c = 0; c < N; ++c) {
    const double sc = s.abs_tol + s.rel_tol * std::max(std::abs(ya[c]), std::abs(yb[c]));
    const double r = err[c] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(N));
}

template <std::size_t N>
bool finite(const Vec<N>& y) {
  for (double v : y) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace detail

/// Integrates y' = rhs(t, y) on [t0, t1], t1 > t0. `on_step` receives every
/// accepted DenseStep. When `watch` names a component, integration stops as
/// soon as |y[watch]| exceeds settings.blowup_cap and the escape time (located
/// on the interpolant) is reported.
template <std::size_t N, class Rhs, class OnStep>
IntegrationOutcome<N> integrate(Rhs&& rhs, double t0, double t1, Vec<N> y0,
                                const IntegratorSettings& s, OnStep&& on_step,
                                std::optional<std::size_t> watch = std::nullopt) {
  using namespace dopri;
  s.validate();
  IntegrationOutcome<N> out;
  out.t_end = t0;
  out.y_end = y0;
  const double span = t1 - t0;
  if (!(span > 0.0)) return out;

  Vec<N> f0 = rhs(t0, y0);
  // Initial step estimate (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      const double sc = s.abs_tol + s.rel_tol * std::abs(y0[c]);
      d0 += (y0[c] / sc) * (y0[c] / sc);
      d1 += (f0[c] / sc) * (f0[c] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec<N> y1;
    for (std::size_t c = 0; c < N; ++c) y1[c] = y0[c] + h0 * f0[c];
    const Vec<N> f1 = rhs(t0 + h0, y1);
    double d2 = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      const double sc = s.abs_tol + s.rel_tol * std::abs(y0[c]);
      d2 += ((f1[c] - f0[c]) / sc) * ((f1[c] - f0[c]) / sc);
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span, s.max_step});
    if (!std::isfinite(h) || h <= 0.0) h = std::min(span, s.max_step) * 1e-3;
  }

  double t = t0;
  Vec<N> y = y0;
  bool last_rejected = false;
  DenseStep<N> step;
  while (t < t1) {
    const double min_h = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < min_h) {
      throw Error(ErrorCode::step_size_underflow, "step size underflow at t=" + std::to_string(t));
    }
    bool final_step = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      final_step = true;
    }
    auto& k = step.k;
    k[0] = f0;
    Vec<N> tmp;
    auto stage = [&](std::size_t idx, double c, std::initializer_list<double> a) {
      for (std::size_t comp = 0; comp < N; ++comp) {
        double acc = y[comp];
        std::size_t j = 0;
        for (double aij : a) acc += h * aij * k[j++][comp];
        tmp[comp] = acc;
      }
      k[idx] = rhs(t + c * h, tmp);
    };
    stage(1, c2, {a21});
    stage(2, c3, {a31, a32});
    stage(3, c4, {a41, a42, a43});
    stage(4, c5, {a51, a52, a53, a54});
    stage(5, 1.0, {a61, a62, a63, a64, a65});
    Vec<N> ynew;
    for (std::size_t comp = 0; comp < N; ++comp) {
      ynew[comp] = y[comp] + h * (b1 * k[0][comp] + b3 * k[2][comp] + b4 * k[3][comp] +
                                  b5 * k[4][comp] + b6 * k[5][comp]);
    }
    const double tnew = final_step ? t1 : t + h;
    k[6] = rhs(tnew, ynew);
    Vec<N> err;
    for (std::size_t comp = 0; comp < N; ++comp) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 7; ++i) acc += e[i] * k[i][comp];
      err[comp] = h * acc;
    }
    const bool ok_values = detail::finite(ynew) && detail::finite(k[6]);
    const double en = ok_values ? detail::error_norm(err, y, ynew, s)
                                : std::numeric_limits<double>::infinity();
    if (!(en <= 1.0)) {
      const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
      h *= fac;
      last_rejected = true;
      ++out.rejected_steps;
      continue;
    }
    step.t0 = t;
    step.h = tnew - t;
    step.y0 = y;
    step.y1 = ynew;
    ++out.accepted_steps;

    if (watch && std::abs(ynew[*watch]) > s.blowup_cap) {
      // Locate |y| = cap on the interpolant by bisection.
      double lo = t, hi = tnew;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::abs(step.at(mid)[*watch]) > s.blowup_cap) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      on_step(step);
      out.t_end = hi;
      out.y_end = step.at(hi);
      out.escape_time = hi;
      return out;
    }
    on_step(step);

    t = tnew;
    y = ynew;
    f0 = k[6];
    double fac = en == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    last_rejected = false;
    h = std::min(h * fac, s.max_step);
    if (final_step) break;
  }
  out.t_end = t1;
  out.y_end = y;
  return out;
}

/// Values of the solution on the uniform grid t0 + i (t1 - t0) / intervals,
/// i = 0..intervals. On escape, `values` is truncated at the last grid point
/// reached before the escape time.
template <std::size_t N>
struct GridPath {
  std::vector<double> t;
  std::vector<Vec<N>> values;
  IntegrationOutcome<N> outcome;

  bool escaped() const { return outcome.escape_time.has_value(); }
};

/// Settings whose step never spans more than `kGridStepCap` output intervals,
/// so interpolated samples carry the accuracy of the step end points.
inline constexpr double kGridStepCap = 4.0;

inline IntegratorSettings grid_settings(IntegratorSettings s, double span, std::size_t intervals) {
  s.max_step = std::min(s.max_step, kGridStepCap * span / static_cast<double>(intervals));
  return s;
}

template <std::size_t N, class Rhs>
GridPath<N> integrate_on_grid(Rhs&& rhs, double t0, double t1, const Vec<N>& y0,
                              const IntegratorSettings& s, std::size_t intervals,
                              std::optional<std::size_t> watch = std::nullopt) {
  if (intervals == 0) throw Error(ErrorCode::invalid_argument, "grid needs at least one interval");
  GridPath<N> path;
  path.t.resize(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    path.t[i] = i == intervals ? t1
                               : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(intervals);
  }
  path.values.reserve(intervals + 1);
  path.values.push_back(y0);
  std::size_t next = 1;
  auto sampler = [&](const DenseStep<N>& st) {
    while (next <= intervals && path.t[next] <= st.t1()) {
      path.values.push_back(st.at(path.t[next]));
      ++next;
    }
  };
  path.outcome = integrate<N>(rhs, t0, t1, y0, grid_settings(s, t1 - t0, intervals), sampler, watch);
  if (path.escaped()) {
    // Drop samples interpolated past the escape time.
    while (path.values.size() > 1 && path.t[path.values.size() - 1] > *path.outcome.escape_time) {
      path.values.pop_back();
    }
  } else if (path.values.size() == intervals + 1) {
    path.values.back() = path.outcome.y_end;
  }
  return path;
}

}  // namespace pulseflow
