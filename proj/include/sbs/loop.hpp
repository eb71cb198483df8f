#pragma once

// Fourier-parametrized loops z(theta) = sum_{|j|<=J} zeta_j e^{i j theta} in the
// North chart, and mean-zero real functions on the parameter circle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/numerics.hpp"
#include "sbs/sphere.hpp"

namespace sbs {

inline constexpr int kDefaultModes = 12;
inline constexpr int kDefaultSamples = 512;

struct LoopLimits {
  double min_embedding = 1e-5;  // min |z(t1) - z(t2)| / |t1 - t2|_circ
  double min_speed = 1e-8;
  double max_radius = kChartRadiusMax;
};

struct LoopSamples {
  std::vector<double> theta;
  std::vector<cplx> z;
  std::vector<cplx> dz;  // dz/dtheta
};

class Loop {
 public:
  Loop() : Loop(std::vector<cplx>(2 * kDefaultModes + 1), kDefaultSamples) {}

  /// `coeffs[j + J]` holds zeta_j.
  Loop(std::vector<cplx> coeffs, int samples) : zeta_(std::move(coeffs)), samples_(samples) {
    if (zeta_.size() % 2 == 0 || zeta_.empty())
      throw Error(ErrorKind::InvalidLoop, "coefficient vector must have odd length 2J+1");
    if (samples_ < 2 * J() + 1) throw Error(ErrorKind::InvalidLoop, "sample count below 2J+1");
    for (cplx c : zeta_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw Error(ErrorKind::InvalidLoop, "non-finite Fourier coefficient");
  }

  /// Counterclockwise circle |z - center| = r.
  static Loop circle(double r, cplx center = 0.0, int J = kDefaultModes, int samples = kDefaultSamples) {
    std::vector<cplx> c(2 * J + 1);
    c[J] = center;
    c[J + 1] = r;
    return Loop(std::move(c), samples);
  }
  /// The latitude |z| = r (a level set of the height Z).
  static Loop latitude(double r, int J = kDefaultModes, int samples = kDefaultSamples) {
    return circle(r, 0.0, J, samples);
  }

  /// Least-squares fit on uniform samples (a truncated DFT).
  static Loop fit(std::span<const cplx> pts, int J, int samples = kDefaultSamples) {
    const auto n = static_cast<int>(pts.size());
    if (n < 2 * J + 1) throw Error(ErrorKind::InvalidLoop, "too few samples to fit");
    std::vector<cplx> c(2 * J + 1);
    for (int i = 0; i < n; ++i) {
      const cplx w = std::polar(1.0, -kTwoPi * i / n);
      cplx wp = 1.0;
      for (int j = 0; j <= J; ++j) {
        c[J + j] += pts[i] * wp;
        if (j > 0) c[J - j] += pts[i] * std::conj(wp);
        wp *= w;
      }
    }
    for (auto& x : c) x /= static_cast<double>(n);
    return Loop(std::move(c), samples);
  }

  int J() const { return static_cast<int>(zeta_.size() / 2); }
  int samples() const { return samples_; }
  cplx coeff(int j) const { return std::abs(j) <= J() ? zeta_[j + J()] : cplx{}; }
  const std::vector<cplx>& coeffs() const { return zeta_; }
  std::vector<cplx>& coeffs() { return zeta_; }

  cplx position(double th) const {
    cplx acc{};
    for (int j = -J(); j <= J(); ++j) acc += zeta_[j + J()] * std::polar(1.0, j * th);
    return acc;
  }
  cplx velocity(double th) const {
    cplx acc{};
    for (int j = -J(); j <= J(); ++j) acc += cplx{0.0, double(j)} * zeta_[j + J()] * std::polar(1.0, j * th);
    return acc;
  }

  LoopSamples sample() const { return sample(samples_); }
  LoopSamples sample(int n) const {
    LoopSamples s;
    s.theta = uniform_angles(n);
    s.z.resize(n);
    s.dz.resize(n);
    const int J_ = J();
    for (int i = 0; i < n; ++i) {
      const cplx w = std::polar(1.0, s.theta[i]);
      cplx wp = 1.0, pos = zeta_[J_], vel{};
      for (int j = 1; j <= J_; ++j) {
        wp *= w;
        const cplx up = zeta_[J_ + j] * wp, dn = zeta_[J_ - j] * std::conj(wp);
        pos += up + dn;
        vel += cplx{0.0, double(j)} * (up - dn);
      }
      s.z[i] = pos;
      s.dz[i] = vel;
    }
    return s;
  }

  /// theta -> theta + phi.
  Loop reparametrized(double phi) const {
    Loop l = *this;
    for (int j = -J(); j <= J(); ++j) l.zeta_[j + J()] *= std::polar(1.0, j * phi);
    return l;
  }
  Loop resampled(int samples) const { return Loop(zeta_, samples); }
  /// Rigid rotation z -> e^{i phi} z.
  Loop rotated(double phi) const {
    Loop l = *this;
    for (auto& c : l.zeta_) c *= std::polar(1.0, phi);
    return l;
  }
  Loop with_modes(int J) const {
    std::vector<cplx> c(2 * J + 1);
    for (int j = -std::min(J, this->J()); j <= std::min(J, this->J()); ++j) c[j + J] = coeff(j);
    return Loop(std::move(c), std::max(samples_, 2 * J + 1));
  }

  /// min over sampled pairs of chord / circular parameter distance.
  double embedding_ratio() const {
    const LoopSamples s = sample();
    const int n = samples_;
    double worst = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double dt = std::min(b - a, n - (b - a)) * kTwoPi / n;
        worst = std::min(worst, std::abs(s.z[a] - s.z[b]) / dt);
      }
    return worst;
  }

  void validate(const LoopLimits& lim = {}, ErrorKind failure = ErrorKind::InvalidLoop) const {
    const LoopSamples s = sample();
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      if (std::abs(s.dz[i]) < lim.min_speed) throw Error(failure, "loop velocity vanishes");
      if (std::abs(s.z[i]) > lim.max_radius) throw Error(failure, "loop leaves the chart validity region");
    }
    if (embedding_ratio() < lim.min_embedding || polyline_crosses(s.z)) throw Error(failure, "loop is not embedded");
  }

  bool operator==(const Loop&) const = default;

 private:
  static double orient(cplx a, cplx b, cplx c) { return ((b - a) * std::conj(c - a)).imag(); }

  /// True if two non-adjacent edges of the closed sample polygon intersect.
  static bool polyline_crosses(const std::vector<cplx>& z) {
    const auto n = z.size();
    for (std::size_t a = 0; a < n; ++a) {
      const cplx p = z[a], q = z[(a + 1) % n];
      for (std::size_t b = a + 2; b < n; ++b) {
        if (a == 0 && b == n - 1) continue;
        const cplx r = z[b], t = z[(b + 1) % n];
        if (orient(p, q, r) * orient(p, q, t) < 0 && orient(r, t, p) * orient(r, t, q) < 0) return true;
      }
    }
    return false;
  }

  std::vector<cplx> zeta_;
  int samples_;
};

/// Mean-zero real function on the parameter circle:
/// b(theta) = sum_{j=1..J} cos_j cos(j theta) + sin_j sin(j theta).
struct BTangent {
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  BTangent() = default;
  explicit BTangent(int J) : cos_coeffs(J), sin_coeffs(J) {}

  int J() const { return static_cast<int>(cos_coeffs.size()); }

  /// Projection of uniform samples onto modes 1..J; the constant mode is dropped.
  static BTangent from_samples(std::span<const double> values, int J) {
    const auto n = static_cast<int>(values.size());
    BTangent b(J);
    for (int j = 1; j <= J; ++j) {
      double c = 0, s = 0;
      for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        c += values[i] * std::cos(j * th);
        s += values[i] * std::sin(j * th);
      }
      b.cos_coeffs[j - 1] = 2.0 * c / n;
      b.sin_coeffs[j - 1] = 2.0 * s / n;
    }
    return b;
  }

  double operator()(double th) const {
    double acc = 0;
    for (int j = 1; j <= J(); ++j) acc += cos_coeffs[j - 1] * std::cos(j * th) + sin_coeffs[j - 1] * std::sin(j * th);
    return acc;
  }
  double derivative(double th) const {
    double acc = 0;
    for (int j = 1; j <= J(); ++j)
      acc += j * (-cos_coeffs[j - 1] * std::sin(j * th) + sin_coeffs[j - 1] * std::cos(j * th));
    return acc;
  }
  double norm() const {
    double acc = 0;
    for (int j = 0; j < J(); ++j) acc += sqr(cos_coeffs[j]) + sqr(sin_coeffs[j]);
    return std::sqrt(acc);
  }
  bool is_zero() const { return norm() == 0.0; }

  BTangent operator+(const BTangent& o) const {
    BTangent r(std::max(J(), o.J()));
    for (int j = 0; j < r.J(); ++j) {
      r.cos_coeffs[j] = (j < J() ? cos_coeffs[j] : 0.0) + (j < o.J() ? o.cos_coeffs[j] : 0.0);
      r.sin_coeffs[j] = (j < J() ? sin_coeffs[j] : 0.0) + (j < o.J() ? o.sin_coeffs[j] : 0.0);
    }
    return r;
  }
  BTangent operator*(double s) const {
    BTangent r = *this;
    for (auto& c : r.cos_coeffs) c *= s;
    for (auto& c : r.sin_coeffs) c *= s;
    return r;
  }
  BTangent operator-() const { return *this * -1.0; }
  BTangent operator-(const BTangent& o) const { return *this + (-o); }
  bool operator==(const BTangent&) const = default;
};

}  // namespace sbs
