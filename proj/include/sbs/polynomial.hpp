#pragma once

// Polynomial data used throughout: chart polynomials in (z, conj z) and
// ambient polynomials in (X, Y, Z) restricted to the unit sphere, plus the
// stereographic maps between the two.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/numerics.hpp"

namespace sbs {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// -- stereographic projection from the south pole: z = 0 is the north pole --

inline Vec3 to_ambient(cplx z) {
  const double d = 1.0 + std::norm(z);
  return {2.0 * z.real() / d, 2.0 * z.imag() / d, (1.0 - std::norm(z)) / d};
}

inline cplx from_ambient(const Vec3& p) { return cplx{p[0], p[1]} / (1.0 + p[2]); }

/// Columns d(X,Y,Z)/dx and d(X,Y,Z)/dy.
inline std::array<Vec3, 2> ambient_jacobian(cplx z) {
  const double x = z.real(), y = z.imag();
  const double d = 1.0 + x * x + y * y, d2 = d * d;
  return {Vec3{2.0 / d - 4.0 * x * x / d2, -4.0 * x * y / d2, -4.0 * x / d2},
          Vec3{-4.0 * x * y / d2, 2.0 / d - 4.0 * y * y / d2, -4.0 * y / d2}};
}

/// Rows d(x)/d(X,Y,Z) and d(y)/d(X,Y,Z) of the inverse projection.
inline std::array<Vec3, 2> chart_jacobian(const Vec3& p) {
  const double s = 1.0 + p[2];
  return {Vec3{1.0 / s, 0.0, -p[0] / (s * s)}, Vec3{0.0, 1.0 / s, -p[1] / (s * s)}};
}

/// f(z, zbar) = sum c_{a,b} z^a zbar^b with 0 <= a, b <= degree.
class ChartPoly {
 public:
  ChartPoly() : ChartPoly(0) {}
  explicit ChartPoly(int degree) : degree_(degree), c_((degree + 1) * (degree + 1)) {
    if (degree < 0) throw Error(ErrorKind::PreconditionViolated, "negative degree bound");
  }

  static ChartPoly constant(cplx value, int degree = 0) {
    ChartPoly p(degree);
    p.at(0, 0) = value;
    return p;
  }
  static ChartPoly monomial(int a, int b, cplx value = 1.0, int degree = -1) {
    ChartPoly p(std::max({a, b, degree}));
    p.at(a, b) = value;
    return p;
  }
  /// Re z = (z + zbar)/2 and Im z = (z - zbar)/2i.
  static ChartPoly re_z(int degree = 1) {
    ChartPoly p(std::max(1, degree));
    p.at(1, 0) = 0.5;
    p.at(0, 1) = 0.5;
    return p;
  }
  static ChartPoly im_z(int degree = 1) {
    ChartPoly p(std::max(1, degree));
    p.at(1, 0) = cplx{0, -0.5};
    p.at(0, 1) = cplx{0, 0.5};
    return p;
  }

  int degree() const { return degree_; }
  cplx& at(int a, int b) { return c_[a * (degree_ + 1) + b]; }
  const cplx& at(int a, int b) const { return c_[a * (degree_ + 1) + b]; }
  cplx coeff(int a, int b) const {
    return (a <= degree_ && b <= degree_ && a >= 0 && b >= 0) ? at(a, b) : cplx{};
  }

  /// Largest a + b with a nonzero coefficient (-1 for the zero polynomial).
  int total_degree() const {
    int t = -1;
    for (int a = 0; a <= degree_; ++a)
      for (int b = 0; b <= degree_; ++b)
        if (at(a, b) != cplx{}) t = std::max(t, a + b);
    return t;
  }
  bool is_zero() const { return total_degree() < 0; }
  bool is_holomorphic() const {
    for (int a = 0; a <= degree_; ++a)
      for (int b = 1; b <= degree_; ++b)
        if (at(a, b) != cplx{}) return false;
    return true;
  }
  /// Real-valued iff c_{a,b} = conj(c_{b,a}).
  bool is_real(double tol = 0.0) const {
    for (int a = 0; a <= degree_; ++a)
      for (int b = 0; b <= degree_; ++b)
        if (std::abs(at(a, b) - std::conj(at(b, a))) > tol) return false;
    return true;
  }

  struct Jet {
    cplx value, d_z, d_zbar;
  };

  Jet jet(cplx z) const {
    const int n = degree_ + 1;
    std::vector<cplx> zp(n + 1, 1.0), wp(n + 1, 1.0);
    const cplx w = std::conj(z);
    for (int i = 1; i <= n; ++i) {
      zp[i] = zp[i - 1] * z;
      wp[i] = wp[i - 1] * w;
    }
    Jet j{};
    for (int a = 0; a <= degree_; ++a)
      for (int b = 0; b <= degree_; ++b) {
        const cplx c = at(a, b);
        if (c == cplx{}) continue;
        j.value += c * zp[a] * wp[b];
        if (a > 0) j.d_z += c * static_cast<double>(a) * zp[a - 1] * wp[b];
        if (b > 0) j.d_zbar += c * static_cast<double>(b) * zp[a] * wp[b - 1];
      }
    return j;
  }
  cplx operator()(cplx z) const { return jet(z).value; }

  /// Copy with degree bound changed; coefficients beyond it must be zero.
  ChartPoly with_degree(int degree) const {
    ChartPoly p(degree);
    for (int a = 0; a <= degree_; ++a)
      for (int b = 0; b <= degree_; ++b) {
        if (at(a, b) == cplx{}) continue;
        if (a > degree || b > degree)
          throw Error(ErrorKind::TruncationOverflow, "coefficient beyond new degree bound");
        p.at(a, b) = at(a, b);
      }
    return p;
  }

  ChartPoly operator+(const ChartPoly& o) const {
    ChartPoly r(std::max(degree_, o.degree_));
    for (int a = 0; a <= r.degree_; ++a)
      for (int b = 0; b <= r.degree_; ++b) r.at(a, b) = coeff(a, b) + o.coeff(a, b);
    return r;
  }
  ChartPoly operator-() const { return *this * cplx{-1.0}; }
  ChartPoly operator-(const ChartPoly& o) const { return *this + (-o); }
  ChartPoly operator*(cplx s) const {
    ChartPoly r = *this;
    for (auto& c : r.c_) c *= s;
    return r;
  }

  /// Product keeping only monomials of total degree <= max_total, in a table
  /// of degree bound `degree`. Returns the dropped part separately so callers
  /// can bound truncation.
  static ChartPoly truncated_product(const ChartPoly& p, const ChartPoly& q, int max_total, int degree) {
    ChartPoly r(degree);
    for (int a = 0; a <= p.degree_; ++a)
      for (int b = 0; b <= p.degree_; ++b) {
        const cplx x = p.at(a, b);
        if (x == cplx{}) continue;
        for (int c = 0; c <= q.degree_; ++c)
          for (int d = 0; d <= q.degree_; ++d) {
            const cplx y = q.at(c, d);
            if (y == cplx{}) continue;
            if (a + b + c + d > max_total || a + c > degree || b + d > degree) continue;
            r.at(a + c, b + d) += x * y;
          }
      }
    return r;
  }

  bool operator==(const ChartPoly& o) const { return degree_ == o.degree_ && c_ == o.c_; }

  const std::vector<cplx>& raw() const { return c_; }

 private:
  int degree_;
  std::vector<cplx> c_;
};

/// Real polynomial in ambient coordinates (X, Y, Z), evaluated on the unit sphere.
class AmbientPoly {
 public:
  using Exponent = std::array<int, 3>;

  AmbientPoly() = default;

  static AmbientPoly constant(double c) {
    AmbientPoly p;
    p.add({0, 0, 0}, c);
    return p;
  }
  static AmbientPoly coordinate(int axis) {
    AmbientPoly p;
    Exponent e{0, 0, 0};
    e[axis] = 1;
    p.add(e, 1.0);
    return p;
  }
  static AmbientPoly X() { return coordinate(0); }
  static AmbientPoly Y() { return coordinate(1); }
  static AmbientPoly Z() { return coordinate(2); }

  void add(const Exponent& e, double c) {
    if (e[0] < 0 || e[1] < 0 || e[2] < 0) throw Error(ErrorKind::PreconditionViolated, "negative exponent");
    if (c == 0.0) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
    } else {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  const std::map<Exponent, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
    return d;
  }

  double operator()(const Vec3& p) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) acc += c * ipow(p[0], e[0]) * ipow(p[1], e[1]) * ipow(p[2], e[2]);
    return acc;
  }
  double operator()(cplx z) const { return (*this)(to_ambient(z)); }

  Vec3 gradient(const Vec3& p) const {
    Vec3 g{0, 0, 0};
    for (const auto& [e, c] : terms_)
      for (int i = 0; i < 3; ++i) {
        if (e[i] == 0) continue;
        double t = c * e[i];
        for (int j = 0; j < 3; ++j) t *= ipow(p[j], e[j] - (i == j ? 1 : 0));
        g[i] += t;
      }
    return g;
  }

  Mat3 hessian(const Vec3& p) const {
    Mat3 h{};
    for (const auto& [e, c] : terms_)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          Exponent r = e;
          double t = c * r[i];
          r[i] -= 1;
          if (t == 0.0) continue;
          t *= r[j];
          r[j] -= 1;
          if (t == 0.0) continue;
          for (int a = 0; a < 3; ++a) t *= ipow(p[a], r[a]);
          h[i][j] += t;
        }
    return h;
  }

  /// (d/dx, d/dy) of the pullback to the North chart.
  std::array<double, 2> chart_gradient(cplx z) const {
    const Vec3 g = gradient(to_ambient(z));
    const auto jac = ambient_jacobian(z);
    return {dot(g, jac[0]), dot(g, jac[1])};
  }

  AmbientPoly operator+(const AmbientPoly& o) const {
    AmbientPoly r = *this;
    for (const auto& [e, c] : o.terms_) r.add(e, c);
    return r;
  }
  AmbientPoly operator*(double s) const {
    AmbientPoly r;
    for (const auto& [e, c] : terms_) r.add(e, c * s);
    return r;
  }
  AmbientPoly operator-() const { return *this * -1.0; }
  AmbientPoly operator-(const AmbientPoly& o) const { return *this + (-o); }
  AmbientPoly operator*(const AmbientPoly& o) const {
    AmbientPoly r;
    for (const auto& [e1, c1] : terms_)
      for (const auto& [e2, c2] : o.terms_) r.add({e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]}, c1 * c2);
    return r;
  }
  bool operator==(const AmbientPoly& o) const { return terms_ == o.terms_; }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  std::map<Exponent, double> terms_;
};

}  // namespace sbs
