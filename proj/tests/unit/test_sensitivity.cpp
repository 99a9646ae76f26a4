#include <cmath>

#include "doctest.h"
#include "pulseflow/optimizer.hpp"
#include "pulseflow/sensitivity.hpp"
#include "pulseflow/synth.hpp"
#include "support.hpp"

using namespace pulseflow;
using testing::code_of;
using testing::sup_abs;
using testing::sup_abs_diff;

namespace {

PeriodicSolution positive_solution(const RiccatiCoefficients& c, double alpha) {
  return select_admissible(solve_periodic(c, alpha).solutions).solution;
}

}  // namespace

TEST_CASE("no elastic term gives zero sensitivity") {
  const auto c = RiccatiCoefficients::constant(1.0, -1.0, 0.0, 1.0, 0.0);
  const auto q = positive_solution(c, 3.0);
  const auto p = sensitivity_P(c, 3.0, q, IntegratorSettings{});
  CHECK(sup_abs(p.p) == 0.0);
  CHECK(p.multiplier == doctest::Approx(std::exp(-2.0)).epsilon(1e-8));
}

TEST_CASE("constant decay rate: P is the fixed point c/2") {
  for (double cval : {0.5, -0.25, 2.0}) {
    // A = -1 and C0 + C1 = 1 at alpha = 1, so the admissible orbit is Q = 1.
    const auto c = RiccatiCoefficients::constant(1.0, -1.0, 0.0, 1.0 - cval, cval);
    const auto q = positive_solution(c, 1.0);
    const auto p = sensitivity_P(c, 1.0, q, IntegratorSettings{});
    CHECK(sup_abs_diff(p.p, std::vector<double>(p.p.size(), cval / 2.0)) < 1e-9);
    CHECK(std::abs(p.p.back() - p.p.front()) < 1e-9);
  }
}

TEST_CASE("resonant multiplier is reported") {
  const auto c = RiccatiCoefficients::constant(1.0, 0.0, 0.0, 0.0, 1.0);
  PeriodicSolution flat;
  for (int k = 0; k <= 64; ++k) {
    flat.t.push_back(k / 64.0);
    flat.q.push_back(5.0);
  }
  CHECK(code_of([&] { sensitivity_P(c, 1.0, flat, IntegratorSettings{}); }) ==
        ErrorCode::resonant_multiplier);
}

TEST_CASE("synthetic block: finite differences and multiplier agreement") {
  SynthSpec spec;
  const auto field = fit_fourier(generate(spec), 3);
  const auto pair = BlockPair::downstream(field);
  const auto coeffs = assemble_coefficients(pair.first);
  const double alpha = 600.0;
  const IntegratorSettings settings;
  const auto q = positive_solution(coeffs, alpha);
  const auto p = sensitivity_P(coeffs, alpha, q, settings);
  CHECK(p.multiplier == q.multiplier);
  CHECK(std::abs(p.p.back() - p.p.front()) <= 1e-8 * sup_abs(p.p));

  auto mismatch = [&](double delta) {
    const auto qd = positive_solution(coeffs, alpha * (1.0 + delta));
    std::vector<double> fd(q.q.size());
    for (std::size_t k = 0; k < fd.size(); ++k) fd[k] = (qd.q[k] - q.q[k]) / (alpha * delta);
    return sup_abs_diff(fd, p.p) / sup_abs(p.p);
  };
  const double m1 = mismatch(1e-3);
  const double m2 = mismatch(5e-4);
  CHECK(m1 < 0.01);
  CHECK(m2 < m1);
  CHECK(m2 / m1 == doctest::Approx(0.5).epsilon(0.05));
}
