#pragma once

// Small numerical kernels shared by every module: central differences with
// optional Richardson extrapolation, Gauss-Legendre rules, sample grids.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace sbs {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct FdOptions {
  double step = 1e-4;
  bool richardson = false;
};

/// Central difference of `f` along the real direction `dir` at `x`.
/// With Richardson enabled the h and h/2 estimates are combined to O(h^4).
template <class Fn>
auto central_difference(const Fn& f, cplx x, cplx dir, const FdOptions& opt = {}) {
  const double h = opt.step;
  auto d = [&](double s) { return (f(x + s * dir) - f(x - s * dir)) / (2.0 * s); };
  if (!opt.richardson) return d(h);
  const auto coarse = d(h);
  const auto fine = d(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

/// Partial derivatives (d/dx, d/dy) of a chart function of z = x + iy.
template <class Fn>
auto gradient_xy(const Fn& f, cplx z, const FdOptions& opt = {}) {
  return std::pair{central_difference(f, z, cplx{1.0, 0.0}, opt),
                   central_difference(f, z, cplx{0.0, 1.0}, opt)};
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) {
          nodes[i] = x;
          weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
          break;
        }
      }
    }
  }

  /// Integral of f over [a, b].
  template <class Fn>
  auto integrate(const Fn& f, double a, double b) const {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    using R = decltype(f(mid));
    R acc{};
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(mid + half * nodes[i]);
    return acc * half;
  }
};

/// Uniform angles theta_i = 2 pi i / n.
inline std::vector<double> uniform_angles(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

/// n x n tensor grid on the square [x0, x1] x [y0, y1] (cell centers).
inline std::vector<cplx> square_grid(double x0, double x1, double y0, double y1, int n) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pts.emplace_back(x0 + (x1 - x0) * (i + 0.5) / n, y0 + (y1 - y0) * (j + 0.5) / n);
  return pts;
}

/// Polar grid on r_min <= |z| <= r_max, offset in angle so no point sits on an axis.
inline std::vector<cplx> annulus_grid(double r_min, double r_max, int n_r, int n_theta) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(n_r) * n_theta);
  for (int i = 0; i < n_r; ++i) {
    const double r = n_r == 1 ? r_min : r_min + (r_max - r_min) * i / (n_r - 1);
    for (int j = 0; j < n_theta; ++j)
      pts.push_back(std::polar(r, kTwoPi * (j + 0.37) / n_theta));
  }
  return pts;
}

inline double sqr(double x) { return x * x; }

}  // namespace sbs
