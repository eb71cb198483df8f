#pragma once

// Tangent vectors to the space of rho-forms: d f0 + i d g0 with f0, g0 real
// functions on the sphere away from the zero set.

#include <array>

#include "sbs/polynomial.hpp"

namespace sbs {

/// Real scalar function: a real-valued chart polynomial plus an ambient polynomial.
struct RealField {
  ChartPoly chart;
  AmbientPoly ambient;

  RealField() = default;
  RealField(ChartPoly c) : chart(std::move(c)) { check(); }
  RealField(AmbientPoly a) : ambient(std::move(a)) {}
  RealField(ChartPoly c, AmbientPoly a) : chart(std::move(c)), ambient(std::move(a)) { check(); }

  double operator()(cplx z) const {
    return chart(z).real() + (ambient.is_zero() ? 0.0 : ambient(z));
  }

  /// (d/dx, d/dy) in the North chart.
  std::array<double, 2> gradient(cplx z) const {
    const auto j = chart.jet(z);
    std::array<double, 2> g{(j.d_z + j.d_zbar).real(), (cplx{0, 1} * (j.d_z - j.d_zbar)).real()};
    if (!ambient.is_zero()) {
      const auto a = ambient.chart_gradient(z);
      g[0] += a[0];
      g[1] += a[1];
    }
    return g;
  }

  /// Derivative along the tangent vector v at z.
  double derivative(cplx z, cplx v) const {
    const auto g = gradient(z);
    return g[0] * v.real() + g[1] * v.imag();
  }

  bool is_chart_only() const { return ambient.is_zero(); }

  RealField operator-() const { return RealField(-chart, -ambient); }
  RealField operator+(const RealField& o) const { return RealField(chart + o.chart, ambient + o.ambient); }
  RealField operator*(double s) const { return RealField(chart * cplx{s}, ambient * s); }
  bool operator==(const RealField& o) const { return chart == o.chart && ambient == o.ambient; }

 private:
  void check() const {
    if (!chart.is_real(1e-14))
      throw Error(ErrorKind::PreconditionViolated, "chart part of a real field must satisfy c_ab = conj(c_ba)");
  }
};

struct RhoTangent {
  RealField f0;
  RealField g0;

  RhoTangent operator+(const RhoTangent& o) const { return {f0 + o.f0, g0 + o.g0}; }
  RhoTangent operator*(double s) const { return {f0 * s, g0 * s}; }
  RhoTangent operator-() const { return {-f0, -g0}; }
  bool operator==(const RhoTangent& o) const = default;
};

/// Multiplication by i on d f0 + i d g0: i (d f0 + i d g0) = -d g0 + i d f0.
inline RhoTangent rho_rotate(const RhoTangent& delta) { return {-delta.g0, delta.f0}; }

}  // namespace sbs
