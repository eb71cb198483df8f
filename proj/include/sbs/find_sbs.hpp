#pragma once

// Numerical search for special Bohr-Sommerfeld loops of a fixed section.
// Damped Gauss-Newton (Levenberg-Marquardt) on the sampled Im rho residual, with
// the enclosed area pinned to an integer by projecting steps onto the level set.

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <string>
#include <variant>

#include "sbs/loops_moduli.hpp"

namespace sbs {

struct FindSbsOptions {
  double tol = 1e-6;           // target sbs_residual
  double bs_tol = 1e-6;        // holonomy tolerance of the returned pair
  int max_iterations = 80;
  double fd_step = 1e-7;       // Jacobian differencing step on Fourier coefficients
  double initial_damping = 1e-3;
  int max_rejections = 30;     // consecutive rejected steps before giving up
  LoopLimits limits{};
};

struct FailureReport {
  ErrorKind kind = ErrorKind::MaxIterations;
  std::string message;
  double best_residual = 0.0;
  int iterations = 0;
  int zero_set_rejections = 0;
  Loop best_loop;
};

using FindSbsResult = std::variant<SbsPair, FailureReport>;

namespace detail {

inline Eigen::VectorXd loop_to_params(const Loop& l) {
  const auto& c = l.coeffs();
  Eigen::VectorXd x(2 * c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    x[2 * i] = c[i].real();
    x[2 * i + 1] = c[i].imag();
  }
  return x;
}

inline Loop params_to_loop(const Eigen::VectorXd& x, int samples) {
  std::vector<cplx> c(x.size() / 2);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = {x[2 * i], x[2 * i + 1]};
  return Loop(std::move(c), samples);
}

/// Rows sqrt(2 pi / N) Im rho(z'_i); the squared norm is sbs_residual.
inline std::optional<Eigen::VectorXd> sbs_rows(const Loop& l, const Section& s, const SphereConfig& cfg) {
  const LoopSamples smp = l.sample();
  const auto n = static_cast<Eigen::Index>(smp.z.size());
  const double w = std::sqrt(kTwoPi / static_cast<double>(n));
  Eigen::VectorXd r(n);
  try {
    for (Eigen::Index i = 0; i < n; ++i) r[i] = w * rho_at(s, smp.z[i], cfg).form.apply_im(smp.dz[i]);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ZeroSetProximity || e.kind() == ErrorKind::OutsideRegion) return std::nullopt;
    throw;
  }
  return r;
}

inline double area_of(const Eigen::VectorXd& x, int samples, const SphereConfig& cfg) {
  return -connection_circulation(params_to_loop(x, samples), cfg) / kTwoPi;
}

inline Eigen::VectorXd area_gradient(const Eigen::VectorXd& x, int samples, const SphereConfig& cfg, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (area_of(a, samples, cfg) - area_of(b, samples, cfg)) / (2 * h);
  }
  return g;
}

/// Newton iterations along the area gradient until the area equals `target`.
inline void repin_area(Eigen::VectorXd& x, double target, int samples, const SphereConfig& cfg, double h) {
  for (int it = 0; it < 6; ++it) {
    const double gap = target - area_of(x, samples, cfg);
    if (std::abs(gap) < 1e-13) return;
    const Eigen::VectorXd g = area_gradient(x, samples, cfg, h);
    const double gg = g.squaredNorm();
    if (gg == 0.0) return;
    x += (gap / gg) * g;
  }
}

}  // namespace detail

/// Searches for a loop S near `seed` with Im rho(alpha)|_S = 0 and integer area.
/// The area is pinned to the integer nearest the seed's area, clamped to [1, k-1].
inline FindSbsResult find_sbs(const Section& section, const Loop& seed, const SphereConfig& cfg,
                              const FindSbsOptions& opts = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int samples = seed.samples();
  seed.validate(opts.limits);

  FailureReport fail;
  fail.best_loop = seed;

  const auto finish = [&](const Loop& l) -> FindSbsResult {
    try {
      return make_sbs_pair(l, section, cfg, {opts.bs_tol, opts.tol});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InvalidPair) throw;
      fail.kind = ErrorKind::InvalidPair;
      fail.message = e.what();
      fail.best_loop = l;
      return fail;
    }
  };

  auto r0 = detail::sbs_rows(seed, section, cfg);
  if (!r0) throw Error(ErrorKind::ZeroSetProximity, "seed loop meets the zero set of the section");
  if (r0->squaredNorm() <= opts.tol && is_bohr_sommerfeld(seed, cfg, {opts.bs_tol, opts.tol})) return finish(seed);

  const double target = std::clamp(std::round(enclosed_area(seed, cfg)), 1.0, double(cfg.k - 1));
  VectorXd x = detail::loop_to_params(seed);
  detail::repin_area(x, target, samples, cfg, opts.fd_step * 10);
  Loop loop = detail::params_to_loop(x, samples);
  auto r = detail::sbs_rows(loop, section, cfg);
  if (!r) throw Error(ErrorKind::ZeroSetProximity, "area-pinned seed meets the zero set of the section");
  double cost = r->squaredNorm();
  double mu = opts.initial_damping;
  int rejections = 0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    fail.iterations = it;
    if (cost <= opts.tol && is_bohr_sommerfeld(loop, cfg, {opts.bs_tol, opts.tol})) return finish(loop);

    const Eigen::Index m = r->size(), n = x.size();
    MatrixXd jac(m, n);
    bool jac_ok = true;
    for (Eigen::Index i = 0; i < n && jac_ok; ++i) {
      VectorXd a = x, b = x;
      a[i] += opts.fd_step;
      b[i] -= opts.fd_step;
      auto ra = detail::sbs_rows(detail::params_to_loop(a, samples), section, cfg);
      auto rb = detail::sbs_rows(detail::params_to_loop(b, samples), section, cfg);
      if (!ra || !rb) jac_ok = false;
      else jac.col(i) = (*ra - *rb) / (2 * opts.fd_step);
    }
    if (!jac_ok) {
      ++fail.zero_set_rejections;
      fail.kind = ErrorKind::ZeroSetProximity;
      fail.message = "loop touches the zero set of the section";
      break;
    }

    const VectorXd g = detail::area_gradient(x, samples, cfg, opts.fd_step * 10);
    MatrixXd proj = MatrixXd::Identity(n, n);
    if (g.squaredNorm() > 0) proj -= g * g.transpose() / g.squaredNorm();
    const MatrixXd jp = jac * proj;
    const MatrixXd jtj = jp.transpose() * jp;
    const VectorXd rhs = -jp.transpose() * *r;

    bool accepted = false;
    while (!accepted && rejections < opts.max_rejections) {
      MatrixXd lhs = jtj;
      lhs.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      VectorXd step = proj * lhs.ldlt().solve(rhs);
      VectorXd xn = x + step;
      detail::repin_area(xn, target, samples, cfg, opts.fd_step * 10);
      Loop cand = detail::params_to_loop(xn, samples);
      std::optional<VectorXd> rn;
      try {
        cand.validate(opts.limits);
        rn = detail::sbs_rows(cand, section, cfg);
        if (!rn) ++fail.zero_set_rejections;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InvalidLoop) throw;
      }
      if (rn && rn->squaredNorm() < cost) {
        x = std::move(xn);
        loop = std::move(cand);
        r = std::move(rn);
        cost = r->squaredNorm();
        mu = std::max(mu / 3, 1e-12);
        rejections = 0;
        accepted = true;
      } else {
        mu *= 4;
        ++rejections;
      }
    }
    if (!accepted) {
      fail.message = "no descent step found";
      break;
    }
  }

  if (fail.message.empty()) fail.message = "iteration limit reached";
  fail.best_residual = cost;
  fail.best_loop = loop;
  if (fail.kind == ErrorKind::MaxIterations && cost <= opts.tol) return finish(loop);
  return fail;
}

}  // namespace sbs
