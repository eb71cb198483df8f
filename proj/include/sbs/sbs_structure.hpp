#pragma once

// Tangent geometry of U_SBS in the rho-representation: the lift inverse to dp,
// the lifted complex structure, fiber tangency of tau, and the subsets U^f.

#include <concepts>

#include "sbs/dynamics.hpp"
#include "sbs/rho_tangent.hpp"

namespace sbs {

/// Tangent vector to U_SBS at (S, rho): the loop part d(g0|_S) and the rho part (f0, g0).
struct LiftedVector {
  BTangent loop_component;
  RhoTangent delta;

  LiftedVector operator+(const LiftedVector& o) const {
    return {loop_component + o.loop_component, delta + o.delta};
  }
  LiftedVector operator*(double s) const { return {loop_component * s, delta * s}; }
  LiftedVector operator-() const { return {-loop_component, -delta}; }
  bool operator==(const LiftedVector&) const = default;
};

/// Mean-removed restriction of a real function to the loop, as Fourier data.
template <class Field>
BTangent restrict_to_loop(const Field& f, const Loop& loop) {
  const LoopSamples s = loop.sample();
  std::vector<double> v(s.z.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(s.z[i]);
  return BTangent::from_samples(v, loop.J());
}

inline LiftedVector lift(const RhoTangent& delta, const Loop& loop) {
  return {restrict_to_loop(delta.g0, loop), delta};
}

inline RhoTangent dp_project(const LiftedVector& v) { return v.delta; }

/// (d(g0|_S), f0, g0) -> (d(f0|_S), -g0, f0).
inline LiftedVector apply_I(const LiftedVector& v, const Loop& loop) {
  return {restrict_to_loop(v.delta.f0, loop), rho_rotate(v.delta)};
}

/// Distance of the loop component from the restriction of g0 (0 for coherent vectors).
inline double coherence_defect(const LiftedVector& v, const Loop& loop) {
  return (v.loop_component - restrict_to_loop(v.delta.g0, loop)).norm();
}

inline double tangential_derivative(const RealField& f, cplx z, cplx v) { return f.derivative(z, v); }
inline double tangential_derivative(const HamiltonianFn& f, cplx z, cplx v) {
  const auto g = f.poly().chart_gradient(z);
  return g[0] * v.real() + g[1] * v.imag();
}
template <class Field>
  requires requires(const Field& f, cplx z, cplx v) {
    { f.derivative(z, v) } -> std::convertible_to<double>;
  }
double tangential_derivative(const Field& f, cplx z, cplx v) {
  return f.derivative(z, v);
}

/// oint |d(f|_S)/d theta|^2 d theta.
template <class Field>
double tangential_energy(const Field& f, const Loop& loop) {
  const LoopSamples s = loop.sample();
  double acc = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) acc += sqr(tangential_derivative(f, s.z[i], s.dz[i]));
  return acc * kTwoPi / static_cast<double>(s.z.size());
}

inline constexpr double kFiberTangentTol = 1e-9;

struct FiberTangentReport {
  bool tangent = false;
  double f0_residual = 0;
  double g0_residual = 0;
};

/// Whether delta is tangent to a fiber of tau: d f0|_S = d g0|_S = 0.
inline FiberTangentReport fiber_tangent_check(const RhoTangent& delta, const Loop& loop,
                                              double tol = kFiberTangentTol) {
  FiberTangentReport r;
  r.f0_residual = tangential_energy(delta.f0, loop);
  r.g0_residual = tangential_energy(delta.g0, loop);
  r.tangent = r.f0_residual <= tol && r.g0_residual <= tol;
  return r;
}

/// ln |alpha|_h as a field, differentiated by central differences.
struct LogNormField {
  const Section* section;
  SphereConfig cfg;
  double h = 1e-5;

  double operator()(cplx z) const { return log_norm(*section, z, cfg); }
  double derivative(cplx z, cplx v) const {
    return ((*this)(z + h * v) - (*this)(z - h * v)) / (2 * h);
  }
};

/// oint |Re rho(z') - d(f|_S)/d theta|^2 d theta; zero iff the pair lies in U^f.
template <class Field>
double uf_membership(const SbsPair& pair, const Field& f, const SphereConfig& cfg) {
  const LoopSamples s = pair.loop.sample();
  double acc = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const double re = rho_at(pair.section, s.z[i], cfg).form.apply_re(s.dz[i]);
    acc += sqr(re - tangential_derivative(f, s.z[i], s.dz[i]));
  }
  return acc * kTwoPi / static_cast<double>(s.z.size());
}
inline double uf_membership(const SbsPair& pair, const SphereConfig& cfg) {
  return uf_membership(pair, HamiltonianFn(AmbientPoly{}), cfg);
}

/// Population variance of f1 - f2 over the loop samples.
inline double commuting_level_check(const Loop& loop, const HamiltonianFn& f1, const HamiltonianFn& f2) {
  const LoopSamples s = loop.sample();
  const auto n = static_cast<double>(s.z.size());
  double mean = 0;
  std::vector<double> d(s.z.size());
  for (std::size_t i = 0; i < d.size(); ++i) mean += (d[i] = f1(s.z[i]) - f2(s.z[i]));
  mean /= n;
  double var = 0;
  for (double x : d) var += sqr(x - mean);
  return var / n;
}

}  // namespace sbs
