#pragma once

// Hamiltonian vector fields of ambient polynomials, RK4 flows with their
// variational equation, transport of SBS pairs and the infinitesimal field Theta(F).

#include <algorithm>
#include <limits>
#include <thread>
#include <vector>

#include "sbs/loops_moduli.hpp"
#include "sbs/polynomial.hpp"

namespace sbs {

/// A Hamiltonian given by an ambient polynomial, with a flat term table for
/// fast gradient and Hessian evaluation.
class HamiltonianFn {
 public:
  static constexpr int kMaxDegree = 8;

  HamiltonianFn() = default;
  explicit HamiltonianFn(AmbientPoly p) : poly_(std::move(p)) {
    if (poly_.degree() > kMaxDegree) throw Error(ErrorKind::DegreeExceeded, "Hamiltonian degree above 8");
    for (const auto& [e, c] : poly_.terms()) terms_.push_back({e, c});
  }

  const AmbientPoly& poly() const { return poly_; }
  double operator()(const Vec3& p) const { return poly_(p); }
  double operator()(cplx z) const { return poly_(z); }

  /// Gradient and Hessian in R^3 in one pass.
  void derivatives(const Vec3& p, Vec3& g, Mat3& h) const {
    std::array<std::array<double, kMaxDegree + 1>, 3> pw;
    for (int i = 0; i < 3; ++i) {
      pw[i][0] = 1.0;
      for (int n = 1; n <= kMaxDegree; ++n) pw[i][n] = pw[i][n - 1] * p[i];
    }
    g = {0, 0, 0};
    h = {};
    const auto at = [&](int i, int n) { return n < 0 ? 0.0 : pw[i][n]; };
    for (const auto& [e, c] : terms_) {
      for (int i = 0; i < 3; ++i) {
        if (e[i] == 0) continue;
        double t = c * e[i];
        for (int j = 0; j < 3; ++j) t *= at(j, e[j] - (i == j));
        g[i] += t;
        for (int j = 0; j < 3; ++j) {
          const int ej = e[j] - (i == j);
          if (ej <= 0) continue;
          double u = c * e[i] * ej;
          for (int a = 0; a < 3; ++a) u *= at(a, e[a] - (a == i) - (a == j));
          h[i][j] += u;
        }
      }
    }
  }

  HamiltonianFn operator+(const HamiltonianFn& o) const { return HamiltonianFn(poly_ + o.poly_); }
  HamiltonianFn operator*(double s) const { return HamiltonianFn(poly_ * s); }

 private:
  struct Term {
    AmbientPoly::Exponent e;
    double c;
  };
  AmbientPoly poly_;
  std::vector<Term> terms_;
};

/// kappa in the ambient field V = kappa P x grad F, so that i_V omega = dF.
inline double hamiltonian_scale(const SphereConfig& cfg) { return -4.0 * kPi * cfg.orientation_sign / cfg.k; }

inline Vec3 ambient_hamiltonian_vf(const HamiltonianFn& F, const Vec3& p, const SphereConfig& cfg) {
  Vec3 g;
  Mat3 h;
  F.derivatives(p, g, h);
  const Vec3 v = cross(p, g);
  const double s = hamiltonian_scale(cfg);
  return {s * v[0], s * v[1], s * v[2]};
}

/// X_F in the coordinates of the chart containing `pt`: i_{X_F} omega = dF.
inline std::array<double, 2> hamiltonian_vf(const HamiltonianFn& F, const ChartPoint& pt, const SphereConfig& cfg) {
  // the South chart is the North chart composed with (X, Y, Z) -> (X, -Y, -Z)
  const bool south = pt.chart == Chart::South;
  const Vec3 q = to_ambient(pt.z);
  const Vec3 p = south ? Vec3{q[0], -q[1], -q[2]} : q;
  Vec3 v = ambient_hamiltonian_vf(F, p, cfg);
  if (south) v = {v[0], -v[1], -v[2]};
  const auto rows = chart_jacobian(q);
  return {dot(rows[0], v), dot(rows[1], v)};
}
inline std::array<double, 2> hamiltonian_vf(const HamiltonianFn& F, cplx z, const SphereConfig& cfg) {
  return hamiltonian_vf(F, {Chart::North, z}, cfg);
}

/// Endpoint of the flow and its 3x3 derivative.
struct FlowState {
  Vec3 p;
  Mat3 m;
};

/// Fixed-step RK4 for dp/dt = V(p) together with dM/dt = DV(p) M.
inline FlowState flow_point(const HamiltonianFn& F, const Vec3& p0, double t, int steps, const SphereConfig& cfg) {
  const double kappa = hamiltonian_scale(cfg);
  const auto rhs = [&](const FlowState& s) {
    Vec3 g;
    Mat3 h;
    F.derivatives(s.p, g, h);
    FlowState d;
    const Vec3 v = cross(s.p, g);
    for (int i = 0; i < 3; ++i) d.p[i] = kappa * v[i];
    for (int col = 0; col < 3; ++col) {
      const Vec3 dl{s.m[0][col], s.m[1][col], s.m[2][col]};
      const Vec3 hd{dot(h[0], dl), dot(h[1], dl), dot(h[2], dl)};
      const Vec3 a = cross(dl, g), b = cross(s.p, hd);
      for (int i = 0; i < 3; ++i) d.m[i][col] = kappa * (a[i] + b[i]);
    }
    return d;
  };
  const auto axpy = [](const FlowState& s, double a, const FlowState& d) {
    FlowState r = s;
    for (int i = 0; i < 3; ++i) {
      r.p[i] += a * d.p[i];
      for (int j = 0; j < 3; ++j) r.m[i][j] += a * d.m[i][j];
    }
    return r;
  };
  FlowState s{p0, {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}};
  if (steps <= 0 || t == 0.0) return s;
  const double dt = t / steps;
  for (int n = 0; n < steps; ++n) {
    const FlowState k1 = rhs(s);
    const FlowState k2 = rhs(axpy(s, dt / 2, k1));
    const FlowState k3 = rhs(axpy(s, dt / 2, k2));
    const FlowState k4 = rhs(axpy(s, dt, k3));
    for (int i = 0; i < 3; ++i) {
      s.p[i] += dt / 6 * (k1.p[i] + 2 * k2.p[i] + 2 * k3.p[i] + k4.p[i]);
      for (int j = 0; j < 3; ++j) s.m[i][j] += dt / 6 * (k1.m[i][j] + 2 * k2.m[i][j] + 2 * k3.m[i][j] + k4.m[i][j]);
    }
  }
  return s;
}

/// 2x2 North-chart derivative (row-major) of the flow started at z.
inline std::array<double, 4> chart_derivative(const FlowState& s, cplx z) {
  const auto cols = ambient_jacobian(z);
  const auto rows = chart_jacobian(s.p);
  std::array<double, 4> j{};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const Vec3 mc{dot(s.m[0], cols[c]), dot(s.m[1], cols[c]), dot(s.m[2], cols[c])};
      j[2 * r + c] = dot(rows[r], mc);
    }
  return j;
}

/// Flow of z in the North chart: end point and chart derivative.
struct ChartFlow {
  cplx z;
  std::array<double, 4> jac;
};
inline ChartFlow flow_chart_point(const HamiltonianFn& F, cplx z, double t, int steps, const SphereConfig& cfg) {
  const FlowState s = flow_point(F, to_ambient(z), t, steps, cfg);
  return {from_ambient(s.p), chart_derivative(s, z)};
}

/// det(D phi) weighted by the area density ratio; 1 for an exact symplectomorphism.
inline double symplectic_determinant(const ChartFlow& f, cplx z0, const SphereConfig& cfg) {
  const double det = f.jac[0] * f.jac[3] - f.jac[1] * f.jac[2];
  return det * omega_at(cfg, {Chart::North, f.z}).c / omega_at(cfg, {Chart::North, z0}).c;
}

struct FlowOptions {
  int out_modes = 64;           // Fourier modes of the refit transported loop
  double max_det_drift = 1e-6;
  unsigned threads = 1;
};

struct FlowResult {
  Loop loop;
  std::vector<std::array<double, 4>> jacobians;  // chart derivative at each loop sample
  double error_estimate = 0.0;                   // step-doubling estimate of the endpoint error
  double max_det_drift = 0.0;
};

namespace detail {

/// Runs body(i) for i in [0, n), split across `threads` workers.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) body(i);
    });
}

}  // namespace detail

/// phi^t applied to every sample of `loop`, refit as a Fourier loop.
inline FlowResult flow_loop(const HamiltonianFn& F, const Loop& loop, double t, int steps, const SphereConfig& cfg,
                            const FlowOptions& opts = {}) {
  const LoopSamples s = loop.sample();
  const std::size_t n = s.z.size();
  std::vector<cplx> moved(n);
  std::vector<double> drift(n), err(n);
  FlowResult out;
  out.jacobians.resize(n);
  detail::parallel_for(n, opts.threads, [&](std::size_t i) {
    const Vec3 p0 = to_ambient(s.z[i]);
    const FlowState full = flow_point(F, p0, t, steps, cfg);
    const ChartFlow f{from_ambient(full.p), chart_derivative(full, s.z[i])};
    moved[i] = f.z;
    out.jacobians[i] = f.jac;
    drift[i] = std::abs(symplectic_determinant(f, s.z[i], cfg) - 1.0);
    if (steps >= 2) {
      const FlowState half = flow_point(F, p0, t, steps / 2, cfg);
      double e = 0;
      for (int a = 0; a < 3; ++a) e = std::max(e, std::abs(half.p[a] - full.p[a]));
      err[i] = e / 15.0;
    }
  });
  const auto worst = [](const std::vector<double>& v) {
    double w = 0;
    for (double x : v) w = std::isfinite(x) ? std::max(w, x) : std::numeric_limits<double>::infinity();
    return w;
  };
  out.max_det_drift = worst(drift);
  out.error_estimate = worst(err);
  if (!(out.max_det_drift <= opts.max_det_drift))
    throw Error(ErrorKind::StepSizeTooLarge, "flow Jacobian determinant drifted by " + std::to_string(out.max_det_drift));
  const int J = std::max(loop.J(), std::min(opts.out_modes, (static_cast<int>(n) - 1) / 2));
  out.loop = Loop::fit(moved, J, loop.samples());
  return out;
}

/// (phi^t)_* rho(alpha) at x: rho evaluated at phi^{-t}(x), composed with D phi^{-t}.
inline Form1Value transported_rho(const Section& s, const HamiltonianFn& F, double t, int steps, cplx x,
                                  const SphereConfig& cfg) {
  const ChartFlow back = flow_chart_point(F, x, -t, steps, cfg);
  Form1Value r0;
  try {
    r0 = rho_at(s, back.z, cfg).form;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ZeroSetProximity)
      throw Error(ErrorKind::ZeroSetCollision, "transported loop meets the transported zero set");
    throw;
  }
  const auto& j = back.jac;
  return {r0.dx * j[0] + r0.dy * j[2], r0.dx * j[1] + r0.dy * j[3]};
}

/// (phi^t)^* rho(alpha) at x: rho at phi^t(x) composed with D phi^t.
inline Form1Value pulled_back_rho(const Section& s, const HamiltonianFn& F, double t, int steps, cplx x,
                                  const SphereConfig& cfg) {
  return transported_rho(s, F, -t, steps, x, cfg);
}

/// The transported pair. The transported section is not a chart polynomial, so
/// the pair is reported with the residual of the pushed-forward rho instead.
struct TransportResult {
  Loop loop;
  FlowResult flow;
  double sbs_residual = 0.0;
  double bs_defect = 0.0;
  double input_residual = 0.0;
  double input_defect = 0.0;
};

inline TransportResult transport_pair(const HamiltonianFn& F, const SbsPair& pair, double t, int steps,
                                      const SphereConfig& cfg, const FlowOptions& opts = {}) {
  if (steps < 100.0 * std::abs(t)) throw Error(ErrorKind::PreconditionViolated, "need steps >= 100 t");
  TransportResult out;
  out.input_residual = pair.sbs_residual;
  out.input_defect = pair.bs_defect;
  if (t == 0.0) {
    out.loop = pair.loop;
    out.flow.loop = pair.loop;
    out.flow.jacobians.assign(pair.loop.samples(), {1, 0, 0, 1});
    out.sbs_residual = pair.sbs_residual;
    out.bs_defect = pair.bs_defect;
    return out;
  }
  out.flow = flow_loop(F, pair.loop, t, steps, cfg, opts);
  out.loop = out.flow.loop;
  out.loop.validate({}, ErrorKind::EmbeddednessLost);
  const LoopSamples s = out.loop.sample();
  std::vector<double> im(s.z.size());
  detail::parallel_for(s.z.size(), opts.threads, [&](std::size_t i) {
    im[i] = transported_rho(pair.section, F, t, steps, s.z[i], cfg).apply_im(s.dz[i]);
  });
  double acc = 0;
  for (double v : im) acc += v * v;
  out.sbs_residual = acc * kTwoPi / static_cast<double>(s.z.size());
  out.bs_defect = holonomy_defect(out.loop, cfg);
  return out;
}

/// Potentials of L_{X_F} rho: (Re rho(X_F), Im rho(X_F) + 2 pi F).
inline std::array<double, 2> theta_potentials(const HamiltonianFn& F, const Section& s, cplx z,
                                              const SphereConfig& cfg) {
  const auto x = hamiltonian_vf(F, z, cfg);
  const cplx v = rho_at(s, z, cfg).form.apply(cplx{x[0], x[1]});
  return {v.real(), v.imag() + kTwoPi * F(z)};
}

/// L_{X_F} rho(alpha) at z as a complex 1-form, by differencing the potentials.
inline Form1Value theta_rho_component(const HamiltonianFn& F, const Section& s, cplx z, const SphereConfig& cfg,
                                      double h = 1e-5) {
  Form1Value out;
  for (int d = 0; d < 2; ++d) {
    const cplx e = d == 0 ? cplx{h, 0} : cplx{0, h};
    const auto a = theta_potentials(F, s, z + e, cfg), b = theta_potentials(F, s, z - e, cfg);
    const cplx v = cplx{a[0] - b[0], a[1] - b[1]} / (2 * h);
    (d == 0 ? out.dx : out.dy) = v;
  }
  return out;
}

struct ThetaReport {
  BTangent loop_component;                 // mean-removed F on the loop
  std::vector<std::array<double, 2>> potentials;  // at the probe points
  std::vector<cplx> probes;
  double fd_residual = 0.0;  // sup |L_X rho - (pullback at +h - pullback at -h)/2h|
};

/// Theta(F) at a pair, with the finite-difference transport check at `probes`
/// loop samples (evenly spaced).
inline ThetaReport theta_field(const HamiltonianFn& F, const SbsPair& pair, const SphereConfig& cfg, double h = 1e-3,
                               int probes = 32) {
  ThetaReport rep;
  const LoopSamples s = pair.loop.sample();
  std::vector<double> vals(s.z.size());
  for (std::size_t i = 0; i < s.z.size(); ++i) vals[i] = F(s.z[i]);
  rep.loop_component = BTangent::from_samples(vals, pair.loop.J());
  const int steps = std::max(10, static_cast<int>(std::ceil(100 * h)));
  const std::size_t stride = std::max<std::size_t>(1, s.z.size() / std::max(1, probes));
  for (std::size_t i = 0; i < s.z.size(); i += stride) {
    const cplx z = s.z[i];
    rep.probes.push_back(z);
    rep.potentials.push_back(theta_potentials(F, pair.section, z, cfg));
    const Form1Value lie = theta_rho_component(F, pair.section, z, cfg);
    const Form1Value fwd = pulled_back_rho(pair.section, F, h, steps, z, cfg);
    const Form1Value bwd = pulled_back_rho(pair.section, F, -h, steps, z, cfg);
    const Form1Value fd = (fwd - bwd) * (1.0 / (2 * h));
    rep.fd_residual = std::max(rep.fd_residual, (fd - lie).norm_inf());
  }
  return rep;
}

}  // namespace sbs
