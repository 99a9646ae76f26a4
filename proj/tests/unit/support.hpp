#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "pulseflow/error.hpp"

namespace testing {

inline pulseflow::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const pulseflow::Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return pulseflow::ErrorCode::invalid_argument;
}

inline double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double sup_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace testing
