#include <gtest/gtest.h>

#include <random>

#include "sbs/sbs_structure.hpp"
#include "test_util.hpp"

using namespace sbs;
using sbs::testing::random_cubic;

namespace {

RealField random_real_field(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ChartPoly c(2);
  for (int a = 0; a <= 2; ++a)
    for (int b = a; b <= 2; ++b) {
      const cplx v = a == b ? cplx{g(rng), 0} : cplx{g(rng), g(rng)};
      c.at(a, b) = v;
      c.at(b, a) = std::conj(v);
    }
  return RealField(c, random_cubic(static_cast<unsigned>(rng()), 1.0));
}

RhoTangent random_delta(std::mt19937_64& rng) { return {random_real_field(rng), random_real_field(rng)}; }

// constant + (Z - c) * Q: its restriction to the latitude Z = c is constant
RealField fiber_flat_field(std::mt19937_64& rng, double c) {
  std::normal_distribution<double> g;
  const AmbientPoly q = random_cubic(static_cast<unsigned>(rng()), 1.0) + AmbientPoly::constant(g(rng));
  return RealField((AmbientPoly::Z() - AmbientPoly::constant(c)) * q + AmbientPoly::constant(g(rng)));
}

double height_of_latitude(double r) { return (1 - r * r) / (1 + r * r); }

}  // namespace

TEST(Lift, Examples) {
  const Loop lat = Loop::latitude(0.7);
  std::mt19937_64 rng(1);
  EXPECT_LE(lift({random_real_field(rng), RealField{}}, lat).loop_component.norm(), 0.0);
  EXPECT_LE(lift({RealField{}, RealField(AmbientPoly::Z())}, lat).loop_component.norm(), 1e-14);
  const BTangent x = lift({RealField{}, RealField(AmbientPoly::X())}, lat).loop_component;
  EXPECT_NEAR(x.cos_coeffs[0], 2 * 0.7 / (1 + 0.49), 1e-14);
  EXPECT_LE((x - [&] {
              BTangent b(x.J());
              b.cos_coeffs[0] = x.cos_coeffs[0];
              return b;
            }()).norm(),
            1e-14);
}

TEST(Lift, ProjectionIsInverse) {
  std::mt19937_64 rng(2);
  const Loop loop = Loop::circle(0.8, {0.1, 0.2});
  for (int i = 0; i < 20; ++i) {
    const RhoTangent d = random_delta(rng);
    EXPECT_EQ(dp_project(lift(d, loop)), d);
    const LiftedVector v = lift(d, loop);
    const LiftedVector back = lift(dp_project(v), loop);
    EXPECT_LE((back.loop_component - v.loop_component).norm(), 1e-10);
    EXPECT_LE(coherence_defect(v, loop), 1e-12);
  }
  const LiftedVector zero = lift(RhoTangent{}, loop);
  EXPECT_EQ(zero.loop_component.norm(), 0.0);
  EXPECT_EQ(dp_project(zero), RhoTangent{});
}

TEST(ComplexStructure, SquaresToMinusIdentity) {
  std::mt19937_64 rng(3);
  const Loop loop = Loop::latitude(1.3);
  for (int i = 0; i < 100; ++i) {
    const LiftedVector v = lift(random_delta(rng), loop);
    const LiftedVector ii = apply_I(apply_I(v, loop), loop);
    EXPECT_EQ(ii, -v);
    EXPECT_EQ(dp_project(apply_I(v, loop)), rho_rotate(dp_project(v)));
    EXPECT_LE(coherence_defect(apply_I(v, loop), loop), 1e-12);
  }
}

TEST(ComplexStructure, CommutesWithLift) {
  std::mt19937_64 rng(4);
  const Loop loop = Loop::circle(0.6, {-0.2, 0.3});
  for (int i = 0; i < 100; ++i) {
    const RhoTangent d = random_delta(rng);
    const LiftedVector a = apply_I(lift(d, loop), loop), b = lift(rho_rotate(d), loop);
    EXPECT_LE((a.loop_component - b.loop_component).norm(), 1e-10);
    EXPECT_EQ(a.delta, b.delta);
  }
  EXPECT_EQ(apply_I(LiftedVector{BTangent(kDefaultModes), RhoTangent{}}, loop).loop_component.norm(), 0.0);
}

TEST(ComplexStructure, RealLinear) {
  std::mt19937_64 rng(5);
  const Loop loop = Loop::latitude(0.9);
  const LiftedVector u = lift(random_delta(rng), loop), v = lift(random_delta(rng), loop);
  const double a = 0.3, b = -2.1;
  const LiftedVector lhs = apply_I(u * a + v * b, loop), rhs = apply_I(u, loop) * a + apply_I(v, loop) * b;
  EXPECT_LE((lhs.loop_component - rhs.loop_component).norm(), 1e-12);
  for (cplx z : {cplx{0.3, 0.1}, cplx{-1.0, 0.5}}) {
    EXPECT_NEAR(lhs.delta.f0(z), rhs.delta.f0(z), 1e-12);
    EXPECT_NEAR(lhs.delta.g0(z), rhs.delta.g0(z), 1e-12);
  }
  const RhoTangent d1 = random_delta(rng), d2 = random_delta(rng);
  EXPECT_LE((lift(d1 * a + d2 * b, loop).loop_component - (lift(d1, loop).loop_component * a + lift(d2, loop).loop_component * b)).norm(), 1e-12);
}

TEST(FiberTangent, Examples) {
  const double r = 0.8, c = height_of_latitude(r);
  const Loop lat = Loop::latitude(r);
  const AmbientPoly zc = AmbientPoly::Z() - AmbientPoly::constant(c);
  const RealField sq(zc * zc);
  EXPECT_TRUE(fiber_tangent_check({sq, sq}, lat).tangent);
  EXPECT_FALSE(fiber_tangent_check({RealField(AmbientPoly::X()), RealField{}}, lat).tangent);
  EXPECT_TRUE(fiber_tangent_check(RhoTangent{}, lat).tangent);
}

TEST(FiberTangent, PreservedByRotation) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const double r = 0.3 + 0.02 * i;
    const Loop lat = Loop::latitude(r);
    const double c = height_of_latitude(r);
    const RhoTangent d{fiber_flat_field(rng, c), fiber_flat_field(rng, c)};
    const auto before = fiber_tangent_check(d, lat), after = fiber_tangent_check(rho_rotate(d), lat);
    EXPECT_TRUE(before.tangent);
    EXPECT_TRUE(after.tangent);
    EXPECT_LE(std::max(after.f0_residual, after.g0_residual), 1e-9);
  }
}

TEST(UfMembership, LogNormAlwaysMembers) {
  for (int k = 2; k <= 5; ++k)
    for (int m = 1; m < k; ++m) {
      const SphereConfig cfg = SphereConfig::calibrated(k);
      const SbsPair p = canonical_pair(m, cfg);
      EXPECT_LE(uf_membership(p, LogNormField{&p.section, cfg}, cfg), 1e-8);
      EXPECT_LE(uf_membership(p, cfg), 1e-9);  // f = 0: |z^m|_h is constant on the latitude
    }
  // a pair whose norm is not constant on the loop
  const SphereConfig cfg = SphereConfig::calibrated(3);
  SbsPair p = canonical_pair(1, cfg);
  const ChartPoly psi = ChartPoly::constant(1.0, 8) + ChartPoly::re_z(8) * 0.4;
  p = make_sbs_pair(p.loop, Section::make_local(ChartPoly::truncated_product(p.section.f, psi, 16, 8), 4.0), cfg);
  EXPECT_LE(uf_membership(p, LogNormField{&p.section, cfg}, cfg), 1e-8);
  EXPECT_GT(uf_membership(p, cfg), 1e-3);
  EXPECT_GT(uf_membership(canonical_pair(1, cfg), HamiltonianFn(AmbientPoly::X()), cfg), 1e-3);
}

TEST(CommutingLevel, Examples) {
  const double r = 0.6;
  const Loop lat = Loop::latitude(r);
  const HamiltonianFn f(random_cubic(8, 1.0));
  EXPECT_EQ(commuting_level_check(lat, f, f), 0.0);
  EXPECT_LE(commuting_level_check(lat, f + HamiltonianFn(AmbientPoly::Z()), f), 1e-12);
  const double amp = 2 * r / (1 + r * r);
  EXPECT_NEAR(commuting_level_check(lat, HamiltonianFn(AmbientPoly::X()), HamiltonianFn{}), amp * amp / 2, 1e-12);
}

TEST(CommutingLevel, MembershipImpliesLevelSet) {
  const double tol = 1e-8;
  for (int k = 2; k <= 6; ++k)
    for (int m = 1; m < k; ++m) {
      const SphereConfig cfg = SphereConfig::calibrated(k);
      const SbsPair p = canonical_pair(m, cfg);
      const std::vector<HamiltonianFn> fs{HamiltonianFn(AmbientPoly::Z() * 0.5),
                                          HamiltonianFn(AmbientPoly::Z() * AmbientPoly::Z() - AmbientPoly::constant(1)),
                                          HamiltonianFn(AmbientPoly::X()), HamiltonianFn{}};
      for (const auto& f1 : fs)
        for (const auto& f2 : fs) {
          const bool members = uf_membership(p, f1, cfg) <= tol && uf_membership(p, f2, cfg) <= tol;
          if (members) EXPECT_LE(commuting_level_check(p.loop, f1, f2), tol);
        }
    }
}
