#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "sbs/dynamics.hpp"
#include "test_util.hpp"

using namespace sbs;
using sbs::testing::kind_of;
using sbs::testing::random_cubic;

namespace {

// chart gradient of F o to_ambient by central differences
std::array<double, 2> fd_chart_gradient(const HamiltonianFn& F, cplx z, double h = 1e-6) {
  return {(F(z + cplx{h, 0}) - F(z - cplx{h, 0})) / (2 * h), (F(z + cplx{0, h}) - F(z - cplx{0, h})) / (2 * h)};
}

std::vector<cplx> probe_points(unsigned seed, int n, double rmax = 1.8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-rmax, rmax);
  std::vector<cplx> pts;
  while (static_cast<int>(pts.size()) < n) {
    const cplx z{u(rng), u(rng)};
    if (std::abs(z) <= rmax) pts.push_back(z);
  }
  return pts;
}

}  // namespace

TEST(Hamiltonian, DerivativesMatchPolynomial) {
  const HamiltonianFn F(random_cubic(3, 1.0) + AmbientPoly::X() * AmbientPoly::Y() * AmbientPoly::Z() * AmbientPoly::Z());
  const Vec3 p{0.3, -0.5, 0.7};
  Vec3 g;
  Mat3 h;
  F.derivatives(p, g, h);
  const Vec3 g2 = F.poly().gradient(p);
  const Mat3 h2 = F.poly().hessian(p);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(g[i], g2[i], 1e-14);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(h[i][j], h2[i][j], 1e-14);
  }
}

TEST(Hamiltonian, DegreeBound) {
  AmbientPoly p;
  p.add({9, 0, 0}, 1.0);
  EXPECT_EQ(kind_of([&] { HamiltonianFn{p}; }), ErrorKind::DegreeExceeded);
}

TEST(HamiltonianVf, ConstantGivesZeroField) {
  const HamiltonianFn F(AmbientPoly::constant(2.5));
  for (cplx z : probe_points(1, 10)) {
    const auto v = hamiltonian_vf(F, z, SphereConfig::calibrated(2));
    EXPECT_EQ(v[0], 0.0);
    EXPECT_EQ(v[1], 0.0);
  }
}

TEST(HamiltonianVf, InteriorProductIsDifferential) {
  for (int k : {1, 3}) {
    const SphereConfig cfg = SphereConfig::calibrated(k);
    const HamiltonianFn F(random_cubic(k, 1.0));
    for (cplx z : probe_points(7, 20)) {
      const auto x = hamiltonian_vf(F, z, cfg);
      const auto g = fd_chart_gradient(F, z);
      const double c = omega_at(cfg, {Chart::North, z}).c;
      // i_X omega = c (X_x dy - X_y dx)
      EXPECT_NEAR(-c * x[1], g[0], 1e-8);
      EXPECT_NEAR(c * x[0], g[1], 1e-8);
      EXPECT_NEAR(g[0] * x[0] + g[1] * x[1], 0.0, 1e-8);
      const auto ga = F.poly().chart_gradient(z);
      EXPECT_NEAR(ga[0] * x[0] + ga[1] * x[1], 0.0, 1e-10);
    }
  }
}

TEST(HamiltonianVf, HeightGeneratesRotation) {
  const SphereConfig cfg = SphereConfig::calibrated(3);
  const HamiltonianFn F(AmbientPoly::Z());
  const double omega_rate = 4 * std::numbers::pi / (cfg.orientation_sign * cfg.k);
  for (cplx z : probe_points(2, 10)) {
    const auto v = hamiltonian_vf(F, z, cfg);
    EXPECT_NEAR(v[0], -omega_rate * z.imag(), 1e-12);
    EXPECT_NEAR(v[1], omega_rate * z.real(), 1e-12);
    const ChartFlow f = flow_chart_point(F, z, 0.3, 300, cfg);
    EXPECT_NEAR(std::abs(f.z - z * std::polar(1.0, omega_rate * 0.3)), 0.0, 1e-10);
  }
}

TEST(HamiltonianVf, SouthChartIsTransitionOfNorth) {
  const SphereConfig cfg = SphereConfig::calibrated(2);
  const HamiltonianFn F(random_cubic(5, 1.0));
  for (cplx z : probe_points(4, 10)) {
    if (std::abs(z) < 0.1) continue;
    const auto vn = hamiltonian_vf(F, {Chart::North, z}, cfg);
    const auto vs = hamiltonian_vf(F, {Chart::South, 1.0 / z}, cfg);
    const cplx expected = -cplx{vn[0], vn[1]} / (z * z);
    EXPECT_NEAR(std::abs(cplx{vs[0], vs[1]} - expected), 0.0, 1e-10);
  }
  // the South pole is an ordinary point of the South chart
  EXPECT_NO_THROW(hamiltonian_vf(F, {Chart::South, 0.0}, cfg));
}

TEST(Flow, EnergyConservedOverShortStep) {
  const SphereConfig cfg = SphereConfig::calibrated(2);
  const HamiltonianFn F(random_cubic(9, 1.0));
  for (cplx z : probe_points(3, 10)) {
    const ChartFlow f = flow_chart_point(F, z, 1e-4, 1, cfg);
    EXPECT_LE(std::abs(F(f.z) - F(z)) / 1e-4, 1e-8);
  }
}

TEST(Flow, VariationalJacobianMatchesFiniteDifference) {
  const SphereConfig cfg = SphereConfig::calibrated(3);
  const HamiltonianFn F(random_cubic(11, 0.3));
  const double h = 1e-6;
  for (cplx z : probe_points(5, 5, 1.2)) {
    const ChartFlow f = flow_chart_point(F, z, 0.7, 400, cfg);
    const cplx dx = (flow_chart_point(F, z + cplx{h, 0}, 0.7, 400, cfg).z - flow_chart_point(F, z - cplx{h, 0}, 0.7, 400, cfg).z) / (2 * h);
    const cplx dy = (flow_chart_point(F, z + cplx{0, h}, 0.7, 400, cfg).z - flow_chart_point(F, z - cplx{0, h}, 0.7, 400, cfg).z) / (2 * h);
    EXPECT_NEAR(f.jac[0], dx.real(), 1e-7);
    EXPECT_NEAR(f.jac[2], dx.imag(), 1e-7);
    EXPECT_NEAR(f.jac[1], dy.real(), 1e-7);
    EXPECT_NEAR(f.jac[3], dy.imag(), 1e-7);
  }
}

TEST(Flow, AreaPreserving) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const SphereConfig cfg = SphereConfig::calibrated(3);
    const FlowResult r = flow_loop(HamiltonianFn(random_cubic(seed)), Loop::latitude(std::sqrt(0.5)), 1.0, 500, cfg);
    EXPECT_LE(r.max_det_drift, 1e-6);
    EXPECT_LE(r.error_estimate, 1e-8);
    EXPECT_NEAR(enclosed_area(r.loop, cfg), 1.0, 1e-8);
  }
}

TEST(Flow, DeterminantMonitorTrips) {
  const HamiltonianFn F(random_cubic(2, 40.0));
  EXPECT_EQ(kind_of([&] { flow_loop(F, Loop::latitude(0.8), 1.0, 100, SphereConfig::calibrated(2)); }),
            ErrorKind::StepSizeTooLarge);
}

TEST(Transport, ZeroTimeIsIdentity) {
  const SphereConfig cfg = SphereConfig::calibrated(3);
  const SbsPair p = canonical_pair(1, cfg);
  const TransportResult r = transport_pair(HamiltonianFn(random_cubic(1)), p, 0.0, 10, cfg);
  EXPECT_EQ(r.loop, p.loop);
  EXPECT_EQ(r.sbs_residual, p.sbs_residual);
}

TEST(Transport, HeightRotationKeepsLatitude) {
  for (int k = 2; k <= 4; ++k)
    for (int m = 1; m < k; ++m) {
      const SphereConfig cfg = SphereConfig::calibrated(k);
      const TransportResult r = transport_pair(HamiltonianFn(AmbientPoly::Z()), canonical_pair(m, cfg), 1.0, 200, cfg);
      EXPECT_LE(r.sbs_residual, 1e-8);
      for (cplx z : r.loop.sample().z) EXPECT_NEAR(std::norm(z), double(m) / (k - m), 1e-7);
    }
}

TEST(Transport, RandomCubicPreservesSbs) {
  const SphereConfig cfg = SphereConfig::calibrated(3);
  const SbsPair p = canonical_pair(1, cfg);
  for (unsigned seed : {1u, 2u}) {
    const TransportResult r = transport_pair(HamiltonianFn(random_cubic(seed)), p, 0.5, 500, cfg);
    EXPECT_LE(r.sbs_residual, 1e-6);
    EXPECT_LE(std::abs(r.bs_defect - p.bs_defect), 1e-6);
    // the loop really moved
    EXPECT_GT(std::abs(r.loop.coeff(0)), 1e-3);
  }
}

TEST(Transport, Preconditions) {
  const SphereConfig cfg = SphereConfig::calibrated(2);
  const SbsPair p = canonical_pair(1, cfg);
  const HamiltonianFn F(random_cubic(1));
  EXPECT_EQ(kind_of([&] { transport_pair(F, p, 1.0, 50, cfg); }), ErrorKind::PreconditionViolated);
  // the image of the zero set of z is phi^t(0)
  const cplx image = flow_chart_point(F, 0.0, 0.4, 100, cfg).z;
  EXPECT_EQ(kind_of([&] { transported_rho(p.section, F, 0.4, 100, image, cfg); }), ErrorKind::ZeroSetCollision);
}

TEST(Theta, ConstantHamiltonian) {
  const SphereConfig cfg = SphereConfig::calibrated(2);
  const SbsPair p = canonical_pair(1, cfg);
  const ThetaReport r = theta_field(HamiltonianFn(AmbientPoly::constant(0.7)), p, cfg);
  EXPECT_LE(r.loop_component.norm(), 1e-14);
  for (cplx z : r.probes) EXPECT_LE(theta_rho_component(HamiltonianFn(AmbientPoly::constant(0.7)), p.section, z, cfg).norm_inf(), 1e-9);
  EXPECT_LE(r.fd_residual, 1e-9);
}

TEST(Theta, HeightOnLatitudeHasNoLoopComponent) {
  const SphereConfig cfg = SphereConfig::calibrated(4);
  const ThetaReport r = theta_field(HamiltonianFn(AmbientPoly::Z()), canonical_pair(2, cfg), cfg);
  EXPECT_LE(r.loop_component.norm(), 1e-12);
}

TEST(Theta, LieDerivativeMatchesTransportDerivative) {
  for (int k = 2; k <= 4; ++k) {
    const SphereConfig cfg = SphereConfig::calibrated(k);
    for (unsigned seed : {3u, 4u}) {
      const ThetaReport r = theta_field(HamiltonianFn(random_cubic(seed)), canonical_pair(1, cfg), cfg);
      EXPECT_LE(r.fd_residual, 1e-4);
      EXPECT_GT(r.loop_component.norm(), 1e-4);
    }
  }
}

TEST(Theta, TransportDerivativeErrorIsSecondOrder) {
  // with a large Hamiltonian the mismatch is visible and shrinks like h^2
  const SphereConfig cfg = SphereConfig::calibrated(2);
  const HamiltonianFn F(random_cubic(3, 0.5));
  const double e1 = theta_field(F, canonical_pair(1, cfg), cfg, 1e-3).fd_residual;
  const double e2 = theta_field(F, canonical_pair(1, cfg), cfg, 5e-4).fd_residual;
  EXPECT_NEAR(e1 / e2, 4.0, 0.1);
}

TEST(Theta, LinearInHamiltonian) {
  const SphereConfig cfg = SphereConfig::calibrated(3);
  const SbsPair p = canonical_pair(1, cfg);
  const HamiltonianFn f1(random_cubic(5, 0.5)), f2(random_cubic(6, 0.5));
  const double a = 1.7, b = -0.4;
  const ThetaReport r1 = theta_field(f1, p, cfg), r2 = theta_field(f2, p, cfg), r = theta_field(f1 * a + f2 * b, p, cfg);
  EXPECT_LE((r.loop_component - (r1.loop_component * a + r2.loop_component * b)).norm(), 1e-8);
  for (std::size_t i = 0; i < r.potentials.size(); ++i)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(r.potentials[i][c], a * r1.potentials[i][c] + b * r2.potentials[i][c], 1e-8);
}
