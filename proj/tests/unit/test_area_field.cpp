#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pulseflow/area_field.hpp"
#include "pulseflow/error.hpp"

using namespace pulseflow;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::invalid_argument;
}

AreaSamples sample(double period, std::vector<double> stations, std::size_t m,
                   const std::function<double(double, double)>& s) {
  AreaSamples a;
  a.period = period;
  a.stations = std::move(stations);
  a.phase_count = m;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = period * static_cast<double>(k) / static_cast<double>(m);
    for (double x : a.stations) a.values.push_back(s(t, x));
  }
  return a;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int depth = 40) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double l = 0.5 * (lo + mid), r = 0.5 * (mid + hi);
        const double fl = f(l), fr = f(r);
        const double left = (mid - lo) / 6.0 * (flo + 4 * fl + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4 * fr + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) {
          return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, flo, fl, fmid, left, d - 1) + rec(mid, hi, fmid, fr, fhi, right, d - 1);
      };
  return rec(a, b, fa, fc, fb, (b - a) / 6.0 * (fa + 4 * fc + fb), depth);
}

}  // namespace

TEST_CASE("polygon_area") {
  CHECK(polygon_area({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}) == doctest::Approx(1.0).epsilon(1e-15));
  ContourRing ngon;
  for (int i = 0; i < 360; ++i) {
    ngon.points.push_back({std::cos(2 * kPi * i / 360), std::sin(2 * kPi * i / 360)});
  }
  const double a = polygon_area(ngon);
  CHECK(a == doctest::Approx(180.0 * std::sin(2 * kPi / 360)).epsilon(1e-13));
  CHECK(std::abs(a - kPi) < 1.7e-4);
  CHECK(code_of([] { polygon_area({{{0, 0}, {1, 1}}}); }) == ErrorCode::fewer_than_three_points);
  CHECK(code_of([] { polygon_area({{{0, 0}, {1, 1}, {2, 2}}}); }) == ErrorCode::zero_area);

  SUBCASE("orientation, rotation and translation invariance") {
    ContourRing r{{{0.3, 0.1}, {2.0, -0.4}, {2.5, 1.7}, {1.1, 2.2}, {-0.2, 1.0}}};
    const double base = polygon_area(r);
    ContourRing rev{{r.points.rbegin(), r.points.rend()}};
    CHECK(polygon_area(rev) == doctest::Approx(base).epsilon(1e-14));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double th = u(rng), dx = u(rng), dy = u(rng);
      ContourRing m;
      for (auto p : r.points) {
        m.points.push_back({std::cos(th) * p.x - std::sin(th) * p.y + dx,
                            std::sin(th) * p.x + std::cos(th) * p.y + dy});
      }
      CHECK(std::abs(polygon_area(m) - base) <= 1e-12 * base);
    }
  }
}

TEST_CASE("fit_fourier reproduces constants and pure tones") {
  auto flat = sample(1.0, {0, 1, 2}, 12, [](double, double) { return 5.0; });
  const auto f = fit_fourier(flat);
  for (const auto& s : f.series()) {
    CHECK(s.mean == doctest::Approx(5.0).epsilon(1e-15));
    for (int m = 0; m < 3; ++m) {
      CHECK(std::abs(s.cos_coeffs[m]) < 1e-14);
      CHECK(std::abs(s.sin_coeffs[m]) < 1e-14);
    }
  }
  CHECK(f.area_dt(0.3, 1.5) == 0.0);

  auto tone = sample(0.8, {0, 1}, 20, [](double t, double) { return 6 + std::cos(2 * kPi * t / 0.8); });
  const auto g = fit_fourier(tone);
  CHECK(std::abs(g.series()[0].mean - 6.0) < 1e-12);
  CHECK(std::abs(g.series()[0].cos_coeffs[0] - 1.0) < 1e-12);
  CHECK(std::abs(g.series()[0].sin_coeffs[0]) < 1e-12);
  CHECK(std::abs(g.fit_residuals()[0]) < 1e-12);
}

TEST_CASE("fit_fourier matches a normal-equations least-squares solve") {
  const double period = 0.9;
  const std::size_t m = 16;
  auto fn = [&](double t, double x) {
    const double w = 2 * kPi * t / period;
    return 6 + 0.3 * x + 0.4 * std::cos(w) - 0.2 * std::sin(2 * w) + 0.1 * std::cos(3 * w + 0.4) +
           0.15 * std::sin(4 * w + 0.3);
  };
  auto samples = sample(period, {0, 0.5, 2.0}, m, fn);
  const auto field = fit_fourier(samples, 3);
  for (std::size_t j = 0; j < samples.stations.size(); ++j) {
    Eigen::MatrixXd X(m, 7);
    Eigen::VectorXd y(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double t = period * k / m;
      X(k, 0) = 1;
      for (int h = 1; h <= 3; ++h) {
        X(k, 2 * h - 1) = std::cos(2 * kPi * h * t / period);
        X(k, 2 * h) = std::sin(2 * kPi * h * t / period);
      }
      y(k) = samples.at(k, j);
    }
    const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    const auto& s = field.series()[j];
    CHECK(std::abs(s.mean - beta(0)) < 1e-12);
    for (int h = 1; h <= 3; ++h) {
      CHECK(std::abs(s.cos_coeffs[h - 1] - beta(2 * h - 1)) < 1e-12);
      CHECK(std::abs(s.sin_coeffs[h - 1] - beta(2 * h)) < 1e-12);
    }
    CHECK(field.fit_residuals()[j] > 0.05);
  }
}

TEST_CASE("fit_fourier is linear in the samples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  AreaSamples a, b, c;
  a.period = b.period = c.period = 1.0;
  a.stations = b.stations = c.stations = {0, 1, 3};
  a.phase_count = b.phase_count = c.phase_count = 9;
  const double c1 = 0.7, c2 = 2.3;
  for (int i = 0; i < 27; ++i) {
    a.values.push_back(u(rng));
    b.values.push_back(u(rng));
    c.values.push_back(c1 * a.values.back() + c2 * b.values.back());
  }
  const auto fa = fit_fourier(a), fb = fit_fourier(b), fc = fit_fourier(c);
  for (std::size_t j = 0; j < 3; ++j) {
    const auto &sa = fa.series()[j], &sb = fb.series()[j], &sc = fc.series()[j];
    CHECK(std::abs(sc.mean - (c1 * sa.mean + c2 * sb.mean)) < 1e-14 * 8);
    for (int h = 0; h < 3; ++h) {
      CHECK(std::abs(sc.cos_coeffs[h] - (c1 * sa.cos_coeffs[h] + c2 * sb.cos_coeffs[h])) < 1e-14 * 8);
      CHECK(std::abs(sc.sin_coeffs[h] - (c1 * sa.sin_coeffs[h] + c2 * sb.sin_coeffs[h])) < 1e-14 * 8);
    }
  }
}

TEST_CASE("fit_fourier input errors") {
  auto few = sample(1.0, {0, 1}, 6, [](double, double) { return 1.0; });
  CHECK(code_of([&] { fit_fourier(few, 3); }) == ErrorCode::too_few_phases);
  auto neg = sample(1.0, {0, 1}, 8, [](double, double) { return 1.0; });
  neg.values[3] = -0.1;
  CHECK(code_of([&] { fit_fourier(neg); }) == ErrorCode::non_positive_area);
  // Positive samples whose 3-harmonic fit dips below zero.
  auto spike = sample(1.0, {0, 1}, 16, [](double, double) { return 0.01; });
  spike.values[0] = spike.values[1] = 10.0;
  CHECK(code_of([&] { fit_fourier(spike); }) == ErrorCode::non_positive_reconstruction);
}

TEST_CASE("evaluation: derivatives, periodicity, interpolation") {
  const double period = 0.8, c = 0.3;
  auto field = fit_fourier(sample(period, {0, 1, 2.5}, 32, [&](double t, double x) {
    return 5 + x + c * std::cos(2 * kPi * t / period);
  }));
  CHECK(std::abs(field.area_dt(0.0, 1.0)) < 1e-13);
  const double expect = -c * (2 * kPi / period) * std::sin(2 * kPi * 0.2 / period);
  CHECK(field.area_dt(period / 4, 1.7) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(field.area_dt2(0.0, 0.5) ==
        doctest::Approx(-c * std::pow(2 * kPi / period, 2)).epsilon(1e-12));
  CHECK(field.area(0.37, 1.75) ==
        doctest::Approx(0.5 * (field.area(0.37, 1.0) + field.area(0.37, 2.5))).epsilon(1e-15));
  for (double t : {0.0, 0.13, 0.5, 0.79}) {
    for (double x : {0.0, 0.4, 2.5}) {
      CHECK(std::abs(field.area(t + period, x) - field.area(t, x)) < 1e-13);
      CHECK(std::abs(field.area_dt(t + period, x) - field.area_dt(t, x)) < 1e-12);
      CHECK(std::abs(field.area_dt2(t - 3 * period, x) - field.area_dt2(t, x)) < 1e-10);
    }
  }
  CHECK(code_of([&] { field.area(0.0, 2.6); }) == ErrorCode::x_out_of_range);
  CHECK(code_of([&] { field.wall_flux(0.0, 2.0, 1.0); }) == ErrorCode::reversed_interval);
}

TEST_CASE("wall flux") {
  const double period = 1.0;
  SUBCASE("rigid wall") {
    auto field = fit_fourier(sample(period, {0, 1, 3}, 16, [](double, double x) { return 7 - x; }));
    CHECK(field.wall_flux(0.3, 0.0, 2.0) == 0.0);
    CHECK(field.wall_flux_dt_integral(0.3, 0.5, 3.0) == 0.0);
  }
  SUBCASE("uniform in x") {
    auto sigma = [&](double t) { return 4 + 0.2 * std::sin(2 * kPi * t) + 0.1 * std::cos(4 * kPi * t); };
    auto dsigma = [&](double t) {
      return 0.4 * kPi * std::cos(2 * kPi * t) - 0.4 * kPi * std::sin(4 * kPi * t);
    };
    auto field = fit_fourier(sample(period, {0, 0.7, 2}, 16, [&](double t, double) { return sigma(t); }));
    for (double t : {0.0, 0.21, 0.66}) {
      for (double x : {0.0, 0.3, 1.3, 2.0}) {
        CHECK(field.wall_flux(t, 0.0, x) == doctest::Approx(-dsigma(t) * x).epsilon(1e-12));
      }
    }
    CHECK(field.wall_flux(0.4, 1.0, 1.0) == 0.0);
  }
  SUBCASE("traveling pulse against adaptive quadrature") {
    const double eps = 0.02, cw = 500.0;
    auto s = [&](double t, double x) {
      const double th = 2 * kPi * (t / period - x / (cw * period));
      return (7 - 0.2 * x) * (1 + eps * (std::cos(th) + 0.5 * std::cos(2 * th + 1.0)) / 1.5);
    };
    std::vector<double> st;
    for (int j = 0; j <= 10; ++j) st.push_back(j);
    auto field = fit_fourier(sample(period, st, 64, s));
    auto integrand = [&](double y) { return -field.area_dt(0.0, y); };
    const double ref = adaptive_simpson(integrand, 0.0, 1.0, 1e-14);
    CHECK(std::abs(field.wall_flux(0.0, 0.0, 1.0) - ref) < 1e-10);
    const double ref2 = adaptive_simpson(integrand, 2.0, 7.3, 1e-14);
    CHECK(std::abs(field.wall_flux(0.0, 2.0, 7.3) - ref2) < 1e-10);
    auto rate = [&](double y) { return field.wall_flux_dt(0.0, 2.0, y); };
    const double ref3 = adaptive_simpson(rate, 2.0, 4.5, 1e-13);
    CHECK(std::abs(field.wall_flux_dt_integral(0.0, 2.0, 4.5) - ref3) < 1e-9);

    SUBCASE("time derivative matches centred differences at second order") {
      double prev = 0.0;
      for (double h : {1e-2, 5e-3, 2.5e-3}) {
        const double fd = (field.wall_flux(0.3 + h, 1.0, 4.2) - field.wall_flux(0.3 - h, 1.0, 4.2)) / (2 * h);
        const double err = std::abs(fd - field.wall_flux_dt(0.3, 1.0, 4.2));
        if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
      }
    }
  }
}
