#pragma once

// The prequantized two-sphere CP^1 at level k in two stereographic charts.
//
// North chart z is centered at the north pole (Z = 1), the South chart is
// w = 1/z. In either chart
//   omega = s * (k/pi) (1+|z|^2)^-2 dx^dy,   A = -k conj(z) dz / (1+|z|^2),
// where A is the connection form in the frame with |e|_h^2 = (1+|z|^2)^-k.
// The orientation sign s is not fixed by the prequantum relations alone and
// is set by calibrate(): the one for which d Im A = 2 pi omega.

#include <algorithm>
#include <cmath>
#include <span>

#include "sbs/errors.hpp"
#include "sbs/numerics.hpp"

namespace sbs {

inline constexpr double kChartRadiusMax = 1e6;

struct SphereConfig {
  int k = 1;
  int orientation_sign = -1;

  SphereConfig() = default;
  SphereConfig(int level, int sign) : k(level), orientation_sign(sign) {
    if (level < 1) throw Error(ErrorKind::PreconditionViolated, "level k must be >= 1");
    if (sign != 1 && sign != -1) throw Error(ErrorKind::PreconditionViolated, "orientation sign must be +1 or -1");
  }

  static SphereConfig calibrated(int level);
};

enum class Chart { North, South };

struct ChartPoint {
  Chart chart = Chart::North;
  cplx z{};
};

/// Value of a complex 1-form c_x dx + c_y dy at a point.
struct Form1Value {
  cplx dx{};
  cplx dy{};

  /// Build from the (dz, dzbar) components a dz + b dzbar.
  static Form1Value from_dz(cplx a, cplx b) { return {a + b, cplx{0, 1} * (a - b)}; }
  cplx dz_part() const { return 0.5 * (dx - cplx{0, 1} * dy); }
  cplx dzbar_part() const { return 0.5 * (dx + cplx{0, 1} * dy); }

  /// Pair with the tangent vector v = v_x + i v_y.
  cplx apply(cplx v) const { return dx * v.real() + dy * v.imag(); }
  double apply_re(cplx v) const { return dx.real() * v.real() + dy.real() * v.imag(); }
  double apply_im(cplx v) const { return dx.imag() * v.real() + dy.imag() * v.imag(); }

  Form1Value operator+(const Form1Value& o) const { return {dx + o.dx, dy + o.dy}; }
  Form1Value operator-(const Form1Value& o) const { return {dx - o.dx, dy - o.dy}; }
  Form1Value operator*(cplx s) const { return {dx * s, dy * s}; }
  double norm_inf() const { return std::max(std::abs(dx), std::abs(dy)); }
};

/// Value of a real 2-form c dx^dy.
struct Form2Value {
  double c = 0.0;
};

inline ChartPoint chart_transition(const ChartPoint& pt) {
  if (pt.z == cplx{})
    throw Error(ErrorKind::PoleError, "z = 0 is the center of the other chart");
  return {pt.chart == Chart::North ? Chart::South : Chart::North, 1.0 / pt.z};
}

/// North-chart coordinate of a point given in either chart.
inline cplx north_coordinate(const ChartPoint& pt) {
  return pt.chart == Chart::North ? pt.z : chart_transition(pt).z;
}

/// Re-express a point in the chart where |z| <= 1 (no-op when already there).
inline ChartPoint canonical_chart(const ChartPoint& pt) {
  return std::abs(pt.z) > 1.0 ? chart_transition(pt) : pt;
}

/// Express a form given at `pt` in the coordinates of the other chart.
/// Under w = 1/z: dz = -dw/w^2.
inline Form1Value transition_form(const Form1Value& f, const ChartPoint& pt) {
  const ChartPoint other = chart_transition(pt);
  const cplx w = other.z;
  return Form1Value::from_dz(-f.dz_part() / (w * w), -f.dzbar_part() / std::conj(w * w));
}

inline Form2Value omega_at(const SphereConfig& cfg, const ChartPoint& pt) {
  const double d = 1.0 + std::norm(pt.z);
  return {cfg.orientation_sign * (cfg.k / kPi) / (d * d)};
}

/// Connection 1-form of the hermitian frame of the chart containing `pt`.
inline Form1Value connection_form_at(const SphereConfig& cfg, const ChartPoint& pt) {
  const cplx a = -static_cast<double>(cfg.k) * std::conj(pt.z) / (1.0 + std::norm(pt.z));
  return Form1Value::from_dz(a, 0.0);
}

/// Finite-difference exterior derivative of a 1-form field: d(c_x dx + c_y dy)
/// = (d_x c_y - d_y c_x) dx^dy, returned as a complex coefficient.
template <class FormField>
cplx fd_exterior_derivative(const FormField& field, cplx z, const FdOptions& fd = {}) {
  auto cy = [&](cplx p) { return field(p).dy; };
  auto cx = [&](cplx p) { return field(p).dx; };
  return central_difference(cy, z, {1, 0}, fd) - central_difference(cx, z, {0, 1}, fd);
}

/// sup over the (North-chart) grid of |FD(dA) - 2 pi i omega|.
inline double curvature_residual(const SphereConfig& cfg, std::span<const cplx> grid,
                                 const FdOptions& fd = {}) {
  double worst = 0.0;
  for (cplx z : grid) {
    if (std::abs(z) > kChartRadiusMax)
      throw Error(ErrorKind::PreconditionViolated, "grid point beyond chart validity radius");
    auto field = [&](cplx p) { return connection_form_at(cfg, {Chart::North, p}); };
    const cplx dA = fd_exterior_derivative(field, z, fd);
    const cplx expected = cplx{0, kTwoPi} * omega_at(cfg, {Chart::North, z}).c;
    worst = std::max(worst, std::abs(dA - expected));
  }
  return worst;
}

/// Fix the orientation sign so that d Im rho = +2 pi omega for the reference
/// section (the frame itself, whose rho is A).
inline SphereConfig SphereConfig::calibrated(int level) {
  const SphereConfig probe(level, 1);
  const cplx z0{0.31, -0.17};
  auto field = [&](cplx p) { return connection_form_at(probe, {Chart::North, p}); };
  const double d_im = fd_exterior_derivative(field, z0).imag();
  const double two_pi_omega = kTwoPi * omega_at(probe, {Chart::North, z0}).c;
  return SphereConfig(level, d_im / two_pi_omega > 0 ? 1 : -1);
}

}  // namespace sbs
