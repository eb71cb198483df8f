#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>
#include <random>

#include "sbs/sphere.hpp"

using namespace sbs;
using boost::math::quadrature::gauss_kronrod;

TEST(Omega, ValueAtOrigin) {
  const SphereConfig cfg(1, +1);
  EXPECT_DOUBLE_EQ(omega_at(cfg, {Chart::North, 0.0}).c, 1.0 / kPi);
}

TEST(Omega, TotalAreaIsLevel) {
  // Radial integral over the whole chart plane, adaptive Gauss-Kronrod on [0, inf).
  for (int k = 1; k <= 6; ++k) {
    const SphereConfig cfg(k, +1);
    auto f = [&](double r) { return kTwoPi * r * omega_at(cfg, {Chart::North, r}).c; };
    const double area = gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
    EXPECT_NEAR(area, k, 1e-6) << "k=" << k;
  }
}

TEST(Omega, ChartConsistencyOnOverlap) {
  const SphereConfig cfg = SphereConfig::calibrated(3);
  for (cplx z : annulus_grid(0.5, 2.0, 7, 13)) {
    const ChartPoint n{Chart::North, z};
    const ChartPoint s = chart_transition(n);
    // pullback of c dx^dy under w = 1/z scales by |dw/dz|^2 = |z|^-4
    const double pulled = omega_at(cfg, s).c / std::pow(std::abs(z), 4);
    EXPECT_NEAR(pulled, omega_at(cfg, n).c, 1e-9);
  }
}

TEST(Connection, VanishesAtOrigin) {
  const auto a = connection_form_at(SphereConfig::calibrated(4), {Chart::North, 0.0});
  EXPECT_EQ(a.dx, cplx{});
  EXPECT_EQ(a.dy, cplx{});
}

TEST(Connection, LatitudeCirculation) {
  for (int k : {1, 2, 5})
    for (double r : {0.3, 1.0, 2.5}) {
      const SphereConfig cfg = SphereConfig::calibrated(k);
      auto f = [&](double th) {
        const cplx z = std::polar(r, th);
        return connection_form_at(cfg, {Chart::North, z}).apply_im(cplx{0, 1} * z);
      };
      const double circ = gauss_kronrod<double, 31>::integrate(f, 0.0, kTwoPi, 10, 1e-14);
      EXPECT_NEAR(circ, -kTwoPi * k * r * r / (1 + r * r), 1e-8);
    }
}

TEST(Connection, RealPartIsExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  const SphereConfig cfg = SphereConfig::calibrated(3);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx c{u(rng), u(rng)};
    const double a1 = u(rng), a2 = u(rng);
    auto loop = [&](double th) { return c + std::polar(1.0 + a1 * std::cos(2 * th), th) + a2 * std::polar(1.0, 3 * th); };
    auto f = [&](double th) {
      const double h = 1e-6;
      const cplx v = (loop(th + h) - loop(th - h)) / (2 * h);
      return connection_form_at(cfg, {Chart::North, loop(th)}).apply_re(v);
    };
    EXPECT_LE(std::abs(gauss_kronrod<double, 61>::integrate(f, 0.0, kTwoPi, 10, 1e-13)), 1e-8);
  }
}

TEST(Connection, FrameChangeOnOverlap) {
  // e_S = z^k e_N, so A_S = A_N + k dz/z once both are written in z.
  const SphereConfig cfg = SphereConfig::calibrated(2);
  for (cplx z : annulus_grid(0.5, 2.0, 5, 11)) {
    const ChartPoint n{Chart::North, z};
    const Form1Value a_s_in_z = transition_form(connection_form_at(cfg, chart_transition(n)), chart_transition(n));
    const Form1Value expected = connection_form_at(cfg, n) + Form1Value::from_dz(static_cast<double>(cfg.k) / z, 0.0);
    EXPECT_LE((a_s_in_z - expected).norm_inf(), 1e-12);
  }
}

TEST(Calibration, FixesSignForPrequantumCurvature) {
  for (int k = 1; k <= 6; ++k) {
    const SphereConfig cfg = SphereConfig::calibrated(k);
    EXPECT_EQ(cfg.orientation_sign, -1);
    const auto grid = square_grid(-2, 2, -2, 2, 40);
    double rel = 0;
    for (cplx z : grid) {
      auto field = [&](cplx p) { return connection_form_at(cfg, {Chart::North, p}); };
      const cplx dA = fd_exterior_derivative(field, z);
      const cplx target = cplx{0, kTwoPi} * omega_at(cfg, {Chart::North, z}).c;
      rel = std::max(rel, std::abs(dA - target) / std::abs(target));
    }
    EXPECT_LE(rel, 1e-5);
  }
}

TEST(CurvatureResidual, ScalesWithLevelAndDetectsWrongSign) {
  const auto grid = square_grid(-2, 2, -2, 2, 20);
  EXPECT_LE(curvature_residual(SphereConfig::calibrated(1), grid), 1e-5);
  EXPECT_LE(curvature_residual(SphereConfig::calibrated(5), grid), 1e-4);
  const SphereConfig wrong(1, -SphereConfig::calibrated(1).orientation_sign);
  EXPECT_GE(curvature_residual(wrong, grid), 0.5);
}

TEST(ChartTransition, Examples) {
  const ChartPoint p = chart_transition({Chart::North, 2.0});
  EXPECT_EQ(p.chart, Chart::South);
  EXPECT_DOUBLE_EQ(p.z.real(), 0.5);
  const ChartPoint q{Chart::North, cplx{0.3, -1.7}};
  const ChartPoint back = chart_transition(chart_transition(q));
  EXPECT_EQ(back.chart, Chart::North);
  EXPECT_NEAR(std::abs(back.z - q.z), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q.z) * std::abs(chart_transition(q).z), 1.0, 1e-15);
  try {
    chart_transition({Chart::North, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PoleError);
  }
}

TEST(ChartTransition, CanonicalChartKeepsUnitDisc) {
  EXPECT_EQ(canonical_chart({Chart::North, 3.0}).chart, Chart::South);
  EXPECT_EQ(canonical_chart({Chart::North, 0.5}).chart, Chart::North);
}
