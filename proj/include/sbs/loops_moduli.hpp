#pragma once

// Bohr-Sommerfeld and special Bohr-Sommerfeld conditions for loops, the map
// tau to T B_S, and Hamiltonian-normal deformations of loops.

#include <cmath>
#include <optional>

#include "sbs/loop.hpp"
#include "sbs/section.hpp"

namespace sbs {

struct Tolerances {
  double bs = 1e-6;   // radians of holonomy
  double sbs = 1e-6;  // sbs_residual
};

/// oint_loop Im A, trapezoid on the loop's sample grid.
inline double connection_circulation(const Loop& loop, const SphereConfig& cfg) {
  const LoopSamples s = loop.sample();
  double acc = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) acc += connection_form_at(cfg, {Chart::North, s.z[i]}).apply_im(s.dz[i]);
  return acc * kTwoPi / static_cast<double>(s.z.size());
}

/// Reduce an angle to (-pi, pi].
inline double reduce_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Holonomy angle of (L, a) along the loop, reduced to (-pi, pi].
inline double holonomy_defect(const Loop& loop, const SphereConfig& cfg) {
  return reduce_angle(connection_circulation(loop, cfg));
}

inline bool is_bohr_sommerfeld(const Loop& loop, const SphereConfig& cfg, const Tolerances& tol = {}) {
  return std::abs(holonomy_defect(loop, cfg)) <= tol.bs;
}

/// Winding number of the loop around its sample centroid.
inline double winding_about_centroid(const Loop& loop) {
  const LoopSamples s = loop.sample();
  cplx c{};
  for (cplx z : s.z) c += z;
  c /= static_cast<double>(s.z.size());
  double acc = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const cplx d = s.z[i] - c;
    if (std::abs(d) == 0.0) return 0.0;
    acc += (s.dz[i] / d).imag();
  }
  return acc / static_cast<double>(s.z.size());
}

/// Symplectic area of the disc bounded by the loop, by Stokes: -(1/2pi) oint Im A.
/// Positive for counterclockwise loops.
inline double enclosed_area(const Loop& loop, const SphereConfig& cfg) {
  const double w = winding_about_centroid(loop);
  if (std::abs(std::abs(w) - 1.0) > 1e-6) throw Error(ErrorKind::NonSimpleLoop, "winding number about centroid is not +-1");
  return -connection_circulation(loop, cfg) / kTwoPi;
}

/// Same area by direct 2-D quadrature of the area density over the region swept
/// by segments from the centroid (valid for loops star-shaped about it).
inline double enclosed_area_by_sweep(const Loop& loop, const SphereConfig& cfg, int radial_nodes = 48) {
  const LoopSamples s = loop.sample();
  cplx c{};
  for (cplx z : s.z) c += z;
  c /= static_cast<double>(s.z.size());
  const GaussLegendre gl(radial_nodes);
  double acc = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const cplx d = s.z[i] - c;
    const double jac = (std::conj(d) * s.dz[i]).imag();
    acc += jac * gl.integrate([&](double t) { return t * std::abs(omega_at(cfg, {Chart::North, c + t * d}).c); }, 0.0, 1.0);
  }
  return acc * kTwoPi / static_cast<double>(s.z.size());
}

/// Integral over the loop of |Im rho(alpha)(z'(theta))|^2 dtheta.
inline double sbs_residual(const Loop& loop, const Section& section, const SphereConfig& cfg) {
  const LoopSamples s = loop.sample();
  double acc = 0;
  for (std::size_t i = 0; i < s.z.size(); ++i) acc += sqr(rho_at(section, s.z[i], cfg).form.apply_im(s.dz[i]));
  return acc * kTwoPi / static_cast<double>(s.z.size());
}

/// A point of U_SBS with its certificates.
struct SbsPair {
  Loop loop;
  Section section;
  double bs_defect = 0.0;
  double sbs_residual = 0.0;
};

/// Builds a pair and checks every SbsPair invariant; throws InvalidPair otherwise.
inline SbsPair make_sbs_pair(const Loop& loop, const Section& section, const SphereConfig& cfg,
                             const Tolerances& tol = {}) {
  SbsPair p{loop, section, holonomy_defect(loop, cfg), 0.0};
  try {
    p.sbs_residual = sbs_residual(loop, section, cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ZeroSetProximity || e.kind() == ErrorKind::OutsideRegion)
      throw Error(ErrorKind::InvalidPair, std::string("loop does not clear the zero set: ") + e.what());
    throw;
  }
  if (std::abs(p.bs_defect) > tol.bs)
    throw Error(ErrorKind::InvalidPair, "loop is not Bohr-Sommerfeld, defect " + std::to_string(p.bs_defect));
  if (p.sbs_residual > tol.sbs)
    throw Error(ErrorKind::InvalidPair, "sbs residual " + std::to_string(p.sbs_residual) + " above tolerance");
  return p;
}

/// The canonical SBS pair (latitude r^2 = m/(k-m), z^m) for 1 <= m <= k-1.
inline SbsPair canonical_pair(int m, const SphereConfig& cfg, int J = kDefaultModes, int samples = kDefaultSamples) {
  if (m < 1 || m >= cfg.k) throw Error(ErrorKind::PreconditionViolated, "need 1 <= m <= k-1");
  const double r = std::sqrt(double(m) / (cfg.k - m));
  return make_sbs_pair(Loop::latitude(r, J, samples), Section::monomial(m), cfg);
}

/// A point of T B_S: a loop with a mean-zero function on it.
struct TBPoint {
  Loop loop;
  BTangent tangent;
  double closure = 0.0;  // |oint Re rho| along the loop
};

/// tau(S, [alpha]) = rho(alpha)|_S, returned as the mean-zero primitive of Re rho|_S.
inline TBPoint tau(const SbsPair& pair, const SphereConfig& cfg) {
  const LoopSamples s = pair.loop.sample();
  const auto n = static_cast<int>(s.z.size());
  const int J = pair.loop.J();
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = rho_at(pair.section, s.z[i], cfg).form.apply_re(s.dz[i]);
  TBPoint out{pair.loop, BTangent(J), 0.0};
  double mean = 0;
  for (double v : g) mean += v;
  out.closure = std::abs(mean * kTwoPi / n);
  // primitive of sum g_j e^{ij theta} is sum g_j/(ij) e^{ij theta}
  for (int j = 1; j <= J; ++j) {
    cplx gj{};
    for (int i = 0; i < n; ++i) gj += g[i] * std::polar(1.0, -j * s.theta[i]);
    gj /= static_cast<double>(n);
    const cplx pj = gj / cplx{0.0, double(j)};
    out.tangent.cos_coeffs[j - 1] = 2.0 * pj.real();
    out.tangent.sin_coeffs[j - 1] = -2.0 * pj.imag();
  }
  return out;
}

/// q: U_SBS -> B_S and pi: T B_S -> B_S.
inline const Loop& q_projection(const SbsPair& pair) { return pair.loop; }
inline const Loop& base_point(const TBPoint& v) { return v.loop; }

/// Moves the loop along the normal field V with i_V omega|_S = d f, f = tangent,
/// scaled by amplitude, then refits to max(J, out_modes) Fourier modes.
inline Loop deform_loop(const Loop& loop, const BTangent& tangent, double amplitude, const SphereConfig& cfg,
                        int out_modes = 0, const LoopLimits& limits = {}) {
  if (amplitude == 0.0 || tangent.is_zero()) return loop;
  const LoopSamples s = loop.sample();
  std::vector<cplx> moved(s.z.size());
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const double speed = std::abs(s.dz[i]);
    const double c = omega_at(cfg, {Chart::North, s.z[i]}).c;
    const double lambda = -tangent.derivative(s.theta[i]) / (c * speed);
    moved[i] = s.z[i] + amplitude * lambda * cplx{0, 1} * s.dz[i] / speed;
  }
  const Loop out = Loop::fit(moved, std::max(loop.J(), out_modes), loop.samples());
  out.validate(limits, ErrorKind::EmbeddednessLost);
  return out;
}

}  // namespace sbs
