#pragma once

// Sections of the prequantum bundle as North-frame coefficient tables and
// their rho-forms rho(alpha) = nabla alpha / alpha = df/f + A.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/polynomial.hpp"
#include "sbs/rho_tangent.hpp"
#include "sbs/sphere.hpp"

namespace sbs {

inline constexpr int kDefaultDegreeBound = 8;
inline constexpr double kDefaultZeroMargin = 1e-6;

/// alpha = f e_N. A global section is a holomorphic f of degree <= k (these
/// extend over the South pole); any other f is only valid for |z| <= region_radius.
struct Section {
  ChartPoly f{kDefaultDegreeBound};
  bool global = false;
  double region_radius = 4.0;
  double eps_z = kDefaultZeroMargin;

  static Section make_global(ChartPoly f) {
    if (!f.is_holomorphic()) throw Error(ErrorKind::NonGlobalSection, "global sections must be holomorphic in z");
    return make(std::move(f), true, std::numeric_limits<double>::infinity());
  }
  static Section make_local(ChartPoly f, double region_radius) {
    if (!(region_radius > 0)) throw Error(ErrorKind::PreconditionViolated, "region radius must be positive");
    return make(std::move(f), false, region_radius);
  }
  /// z^m as a global section.
  static Section monomial(int m) { return make_global(ChartPoly::monomial(m, 0, 1.0, kDefaultDegreeBound)); }
  /// The frame e_N itself (f = 1).
  static Section frame() { return monomial(0); }

  Section scaled(cplx c) const {
    Section s = *this;
    s.f = f * c;
    return s;
  }

 private:
  static Section make(ChartPoly f, bool global, double radius) {
    if (f.is_zero()) throw Error(ErrorKind::PreconditionViolated, "section is identically zero");
    Section s;
    s.f = std::move(f);
    s.global = global;
    s.region_radius = radius;
    return s;
  }
};

/// South-frame coefficients of a global section: f_S(w) = w^k f(1/w).
inline ChartPoly south_coefficients(const Section& s, const SphereConfig& cfg) {
  const int deg = s.f.total_degree();
  if (!s.global || deg > cfg.k)
    throw Error(ErrorKind::NonGlobalSection, "section does not extend over the South chart at this level");
  ChartPoly south(std::max(cfg.k, s.f.degree()));
  for (int a = 0; a <= std::min(cfg.k, s.f.degree()); ++a) south.at(cfg.k - a, 0) = s.f.at(a, 0);
  return south;
}

/// Coefficient jet of the section in the frame of the chart containing pt.
inline ChartPoly::Jet section_jet(const Section& s, const SphereConfig& cfg, const ChartPoint& pt) {
  if (pt.chart == Chart::North) {
    if (!s.global && std::abs(pt.z) > s.region_radius)
      throw Error(ErrorKind::OutsideRegion, "point outside the section's validity region");
    if (s.global && s.f.total_degree() > cfg.k)
      throw Error(ErrorKind::NonGlobalSection, "declared global section has degree above k");
    return s.f.jet(pt.z);
  }
  return south_coefficients(s, cfg).jet(pt.z);
}

struct RhoValue {
  Form1Value form;
  double zero_proximity = 0.0;
};

inline RhoValue rho_at(const Section& s, const ChartPoint& pt, const SphereConfig& cfg) {
  if (pt.chart == Chart::South && !s.global) {
    const ChartPoint north = chart_transition(pt);
    const RhoValue v = rho_at(s, north, cfg);
    return {transition_form(v.form, north), v.zero_proximity};
  }
  const auto j = section_jet(s, cfg, pt);
  const double prox = std::abs(j.value);
  if (!(prox > s.eps_z))
    throw Error(ErrorKind::ZeroSetProximity, "|f| = " + std::to_string(prox) + " at evaluation point");
  const cplx a_z = -static_cast<double>(cfg.k) * std::conj(pt.z) / (1.0 + std::norm(pt.z));
  return {Form1Value::from_dz(j.d_z / j.value + a_z, j.d_zbar / j.value), prox};
}

inline RhoValue rho_at(const Section& s, cplx z, const SphereConfig& cfg) {
  return rho_at(s, ChartPoint{Chart::North, z}, cfg);
}

/// ln |alpha|_h in the North frame.
inline double log_norm(const Section& s, cplx z, const SphereConfig& cfg) {
  const auto j = section_jet(s, cfg, {Chart::North, z});
  return std::log(std::abs(j.value)) - 0.5 * cfg.k * std::log1p(std::norm(z));
}

/// nabla(delta) / alpha0 = (d(delta f) + delta f A) / f0, the linearization of rho.
inline Form1Value covariant_ratio(const Section& delta, const Section& alpha0, cplx z, const SphereConfig& cfg) {
  const auto d = section_jet(delta, cfg, {Chart::North, z});
  const auto a = section_jet(alpha0, cfg, {Chart::North, z});
  if (!(std::abs(a.value) > alpha0.eps_z)) throw Error(ErrorKind::ZeroSetProximity, "alpha0 vanishes here");
  const cplx a_z = -static_cast<double>(cfg.k) * std::conj(z) / (1.0 + std::norm(z));
  return Form1Value::from_dz((d.d_z + d.value * a_z) / a.value, d.d_zbar / a.value);
}

/// Exact derivative of rho along alpha0 + t delta at t = 0: d(delta/alpha0).
/// Differs from covariant_ratio by (delta/alpha0) rho(alpha0).
inline Form1Value linearized_rho(const Section& delta, const Section& alpha0, cplx z, const SphereConfig& cfg) {
  const auto d = section_jet(delta, cfg, {Chart::North, z});
  const auto a = section_jet(alpha0, cfg, {Chart::North, z});
  if (!(std::abs(a.value) > alpha0.eps_z)) throw Error(ErrorKind::ZeroSetProximity, "alpha0 vanishes here");
  const cplx a2 = a.value * a.value;
  return Form1Value::from_dz((d.d_z * a.value - d.value * a.d_z) / a2, (d.d_zbar * a.value - d.value * a.d_zbar) / a2);
}

struct RhoIdentityReport {
  double d_im_residual = 0.0;   // sup |FD(d Im rho) - 2 pi omega|
  double re_exact_residual = 0.0;  // sup |Re rho - FD(d ln|alpha|_h)|
  bool richardson_used = false;
};

inline RhoIdentityReport rho_identity_check(const Section& s, const SphereConfig& cfg, std::span<const cplx> grid,
                                            FdOptions fd = {}, double fallback_tol = 1e-5) {
  auto run = [&](const FdOptions& opt) {
    RhoIdentityReport rep;
    auto im_field = [&](cplx p) {
      const Form1Value r = rho_at(s, p, cfg).form;
      return Form1Value{r.dx.imag(), r.dy.imag()};
    };
    auto ln_norm = [&](cplx p) { return log_norm(s, p, cfg); };
    for (cplx z : grid) {
      const double d_im = fd_exterior_derivative(im_field, z, opt).real();
      rep.d_im_residual = std::max(rep.d_im_residual, std::abs(d_im - kTwoPi * omega_at(cfg, {Chart::North, z}).c));
      const Form1Value r = rho_at(s, z, cfg).form;
      const auto [gx, gy] = gradient_xy(ln_norm, z, opt);
      rep.re_exact_residual = std::max({rep.re_exact_residual, std::abs(r.dx.real() - gx), std::abs(r.dy.real() - gy)});
    }
    rep.richardson_used = opt.richardson;
    return rep;
  };
  RhoIdentityReport rep = run(fd);
  if (!fd.richardson && std::max(rep.d_im_residual, rep.re_exact_residual) > fallback_tol) {
    fd.richardson = true;
    rep = run(fd);
  }
  return rep;
}

struct RatioReport {
  bool constant = false;
  cplx ratio{};       // mean of f2/f1 over the grid
  double variance = 0.0;
  double rho_distance = 0.0;  // sup over grid of |rho(alpha1) - rho(alpha2)|
};

inline constexpr double kRatioVarianceTol = 1e-16;

/// Tests whether alpha2 = c alpha1 by sampling the ratio of their chart data.
inline RatioReport ratio_constancy(const Section& a1, const Section& a2, const SphereConfig& cfg,
                                   std::span<const cplx> grid) {
  if (grid.empty()) throw Error(ErrorKind::PreconditionViolated, "empty grid");
  std::vector<cplx> ratios;
  ratios.reserve(grid.size());
  RatioReport rep;
  for (cplx z : grid) {
    const RhoValue r1 = rho_at(a1, z, cfg);
    const RhoValue r2 = rho_at(a2, z, cfg);
    rep.rho_distance = std::max(rep.rho_distance, (r1.form - r2.form).norm_inf());
    ratios.push_back(a2.f(z) / a1.f(z));
  }
  cplx mean{};
  for (cplx r : ratios) mean += r;
  mean /= static_cast<double>(ratios.size());
  double var = 0.0;
  for (cplx r : ratios) var += std::norm(r - mean);
  rep.variance = var / static_cast<double>(ratios.size());
  rep.ratio = mean;
  rep.constant = rep.variance <= kRatioVarianceTol;
  return rep;
}

struct TrajectoryOptions {
  int degree_bound = kDefaultDegreeBound;
  double working_radius = 2.0;  // used when alpha0 is global
  double tolerance = 1e-8;
};

/// alpha_t = exp(t (f0 + i g0)) alpha0, re-expanded by Taylor series into a
/// coefficient table of total degree <= degree_bound.
inline Section exp_trajectory(const Section& alpha0, const RhoTangent& delta, double t,
                              const TrajectoryOptions& opt = {}) {
  if (t == 0.0) return alpha0;
  if (!delta.f0.is_chart_only() || !delta.g0.is_chart_only())
    throw Error(ErrorKind::PreconditionViolated, "exp_trajectory needs chart-polynomial f0, g0");
  const ChartPoly h = (delta.f0.chart + delta.g0.chart * cplx{0, 1}) * cplx{t};
  const int D = std::max(opt.degree_bound, alpha0.f.degree());

  ChartPoly term = alpha0.f.with_degree(D);
  ChartPoly sum = term;
  for (int n = 1; n <= 200; ++n) {
    term = ChartPoly::truncated_product(term, h, D, D) * cplx{1.0 / n};
    if (term.is_zero()) break;
    sum = sum + term;
    double mag = 0;
    for (cplx c : term.raw()) mag = std::max(mag, std::abs(c));
    if (mag < 1e-300) break;
  }

  const bool stays_global = alpha0.global && h.total_degree() <= 0;
  const double radius = alpha0.global ? opt.working_radius : alpha0.region_radius;

  // Truncation check against the exact product on the working disc.
  double worst = 0.0, scale = 0.0;
  for (cplx z : annulus_grid(0.0, radius, 17, 48)) {
    const cplx exact = std::exp(h(z)) * alpha0.f(z);
    worst = std::max(worst, std::abs(sum(z) - exact));
    scale = std::max(scale, std::abs(exact));
  }
  if (worst > opt.tolerance * std::max(1.0, scale))
    throw Error(ErrorKind::TruncationOverflow,
                "degree bound " + std::to_string(D) + " leaves truncation error " + std::to_string(worst));

  Section out = alpha0;
  out.f = sum;
  out.global = stays_global;
  out.region_radius = stays_global ? alpha0.region_radius : radius;
  return out;
}

/// Delta_t = (rho(alpha_t) - rho(alpha_0)) / t.
inline Form1Value delta_form(const Section& alpha_t, const Section& alpha_0, double t, const ChartPoint& pt,
                             const SphereConfig& cfg) {
  if (t == 0.0) throw Error(ErrorKind::DivisionByZero, "t = 0 in difference form");
  return (rho_at(alpha_t, pt, cfg).form - rho_at(alpha_0, pt, cfg).form) * cplx{1.0 / t};
}

struct QuadratureSpec {
  bool full_sphere = true;
  double radius = 1.0;  // disc radius when !full_sphere
  int radial_nodes = 64;
  int angular_nodes = 96;
};

/// int <alpha1, alpha2>_h |omega|, linear in alpha1 and antilinear in alpha2.
inline cplx hermitian_product(const Section& a1, const Section& a2, const SphereConfig& cfg,
                              const QuadratureSpec& q = {}) {
  if (q.full_sphere) {
    for (const Section* s : {&a1, &a2})
      if (!s->global || s->f.total_degree() > cfg.k)
        throw Error(ErrorKind::NonGlobalSection, "pairing over the full sphere needs global sections");
  } else {
    for (const Section* s : {&a1, &a2})
      if (!s->global && s->region_radius < q.radius)
        throw Error(ErrorKind::OutsideRegion, "quadrature disc exceeds the section's validity region");
  }
  const GaussLegendre gl(q.radial_nodes);
  const auto angles = uniform_angles(q.angular_nodes);
  const double k = cfg.k;
  auto ring = [&](double r) {
    cplx acc{};
    for (double th : angles) {
      const cplx z = std::polar(r, th);
      acc += a1.f(z) * std::conj(a2.f(z));
    }
    const double d = 1.0 + r * r;
    return acc * (kTwoPi / q.angular_nodes) * std::pow(d, -k - 2.0) * (k / kPi) * r;
  };
  if (q.full_sphere) {
    // r = tan(s), dr = sec^2(s) ds
    return gl.integrate([&](double s) { return ring(std::tan(s)) / sqr(std::cos(s)); }, 0.0, kPi / 2);
  }
  return gl.integrate(ring, 0.0, q.radius);
}

struct WindingReport {
  long winding = 0;
  double residual = 0.0;
  double raw = 0.0;  // (1/2pi) oint Im(form)
};

/// Nearest integer to (1/2pi) oint Im(form) over the circle |z - center| = radius.
template <class FormField>
WindingReport winding_integrality(const FormField& form_field, const ChartPoint& center, double radius,
                                  int samples = 1024) {
  if (!(radius > 0)) throw Error(ErrorKind::PreconditionViolated, "radius must be positive");
  const cplx c = north_coordinate(center);
  double acc = 0.0;
  for (double th : uniform_angles(samples)) {
    const cplx e = std::polar(1.0, th);
    const Form1Value f = form_field(c + radius * e);
    acc += f.apply_im(cplx{0, 1} * radius * e);
  }
  WindingReport rep;
  rep.raw = acc / samples;
  rep.winding = std::lround(rep.raw);
  rep.residual = std::abs(rep.raw - static_cast<double>(rep.winding));
  return rep;
}

}  // namespace sbs
