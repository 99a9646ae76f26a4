#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace pulseflow {

/// Trapezoid rule over samples y(t_i).
inline double trapezoid(std::span<const double> t, std::span<const double> y) {
  double acc = 0.0;
  const std::size_t n = std::min(t.size(), y.size());
  for (std::size_t i = 1; i < n; ++i) acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

inline double max_abs(std::span<const double> y) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace pulseflow
