#pragma once

// The Darboux-Weinstein model T*T^n (n = 1, 2) near the zero section: the
// canonical action form rho_can = sum p_i dq_i, the Euler-operator equation
// and its coefficientwise solution, and the normalization of a nearby form.

#include <algorithm>
#include <limits>
#include <optional>
#include <span>

#include "sbs/qp_series.hpp"

namespace sbs {

struct ModelConfig {
  int n = 1;
  int Np = QPSeries::kDefaultNp;
  int Nq = QPSeries::kDefaultNq;
  double p_max = 0.5;
  // i_{X_F} omega = dF with omega = orientation * dp ^ dq
  int orientation = -1;
};

struct AnnulusPoint {
  std::array<double, 2> p{0, 0};
  std::array<double, 2> q{0, 0};
};

/// A 1-form sum_i a_i dp_i + b_i dq_i on the model annulus.
struct ModelForm {
  std::vector<QPSeries> dp;
  std::vector<QPSeries> dq;

  static ModelForm zero(const ModelConfig& m) {
    return {std::vector<QPSeries>(m.n, QPSeries(m.n, m.Np, m.Nq)), std::vector<QPSeries>(m.n, QPSeries(m.n, m.Np, m.Nq))};
  }
  /// rho_can = sum p_i dq_i.
  static ModelForm canonical(const ModelConfig& m) {
    ModelForm f = zero(m);
    for (int i = 0; i < m.n; ++i) {
      Index2 e{0, 0};
      e[i] = 1;
      f.dq[i].add_term({e, {0, 0}, {TrigKind::Cos, TrigKind::Cos}, 1.0});
    }
    return f;
  }
  /// dF from the exact series derivatives.
  static ModelForm exact(const QPSeries& F) {
    ModelForm f;
    for (int i = 0; i < F.n(); ++i) {
      f.dp.push_back(F.d_dp(i));
      f.dq.push_back(F.d_dq(i));
    }
    return f;
  }
  ModelForm operator+(const ModelForm& o) const {
    ModelForm r = *this;
    for (std::size_t i = 0; i < dp.size(); ++i) {
      r.dp[i] = dp[i] + o.dp[i];
      r.dq[i] = dq[i] + o.dq[i];
    }
    return r;
  }
  ModelForm operator*(double s) const {
    ModelForm r = *this;
    for (auto& x : r.dp) x = x * s;
    for (auto& x : r.dq) x = x * s;
    return r;
  }
  ModelForm operator-(const ModelForm& o) const { return *this + o * -1.0; }
};

/// (sum p_i d/dp_i + sigma) F: diagonal on monomials, p^m -> (|m| + sigma) p^m.
inline QPSeries apply_euler(const QPSeries& F, int sigma = 1) {
  if (sigma != 1 && sigma != -1) throw Error(ErrorKind::PreconditionViolated, "sigma must be +1 or -1");
  QPSeries r(F.n(), F.Np(), F.Nq());
  F.for_each_nonzero([&](int s, const Index2& j, cplx c) {
    r.coeff_ref(s, j) = c * static_cast<double>(QPSeries::order(F.p_indices()[s]) + sigma);
  });
  return r;
}

inline constexpr double kResonanceTol = 1e-14;

/// Solves (sum p_i d/dp_i + sigma) F = Psi coefficientwise: F_m = Psi_m / (|m| + sigma).
inline QPSeries euler_solve(const QPSeries& psi, int sigma = 1) {
  if (sigma != 1 && sigma != -1) throw Error(ErrorKind::PreconditionViolated, "sigma must be +1 or -1");
  if (sigma == -1 && psi.max_abs_coeff_of_order(1) > kResonanceTol)
    throw Error(ErrorKind::Resonance, "linear-in-p term with divisor |m| - 1 = 0");
  QPSeries r(psi.n(), psi.Np(), psi.Nq());
  psi.for_each_nonzero([&](int s, const Index2& j, cplx c) {
    const int d = QPSeries::order(psi.p_indices()[s]) + sigma;
    if (d != 0) r.coeff_ref(s, j) = c / static_cast<double>(d);
  });
  return r;
}

namespace detail {

/// Central difference with one Richardson step.
template <class Fn>
double richardson_partial(Fn&& f, AnnulusPoint x, bool in_p, int i, double h) {
  auto shifted = [&](double s) {
    AnnulusPoint y = x;
    (in_p ? y.p : y.q)[i] += s;
    return f(y);
  };
  const double coarse = (shifted(h) - shifted(-h)) / (2 * h);
  const double fine = (shifted(h / 2) - shifted(-h / 2)) / h;
  return (4 * fine - coarse) / 3;
}

inline double eval(const QPSeries& s, const AnnulusPoint& x) { return s(x.p, x.q); }

}  // namespace detail

/// Hamiltonian field of F in the model: i_X omega = dF.
inline std::array<double, 4> model_vf(const QPSeries& F, const AnnulusPoint& x, int orientation) {
  // omega = s dp^dq: X_p = s F_q, X_q = -s F_p
  std::array<double, 4> v{};  // (X_p1, X_p2, X_q1, X_q2)
  for (int i = 0; i < F.n(); ++i) {
    v[i] = orientation * F.d_dq(i)(x.p, x.q);
    v[2 + i] = -orientation * F.d_dp(i)(x.p, x.q);
  }
  return v;
}

/// sup over the grid of |L_{X_F} rho_can - d Psi|, by finite differences of the
/// potentials in Cartan's formula L_X rho_can = d(rho_can(X)) + i_X d rho_can.
inline double lie_derivative_residual(const QPSeries& F, const QPSeries& psi, std::span<const AnnulusPoint> grid,
                                      int orientation = -1, double h = 1e-3) {
  const int n = F.n();
  std::vector<QPSeries> Fp, Fq;
  for (int i = 0; i < n; ++i) {
    Fp.push_back(F.d_dp(i));
    Fq.push_back(F.d_dq(i));
  }
  // rho_can(X) = sum p_i X_{q_i} = -s sum p_i F_{p_i}
  const auto contraction = [&](const AnnulusPoint& y) {
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += y.p[i] * -orientation * Fp[i](y.p, y.q);
    return acc;
  };
  // i_X (dp ^ dq) = s dF, since i_X omega = dF
  const auto F_at = [&](const AnnulusPoint& y) { return detail::eval(F, y); };
  const auto psi_at = [&](const AnnulusPoint& y) { return detail::eval(psi, y); };
  double worst = 0;
  for (const auto& x : grid)
    for (int i = 0; i < n; ++i)
      for (bool in_p : {true, false}) {
        const double lie = detail::richardson_partial(contraction, x, in_p, i, h) +
                           orientation * detail::richardson_partial(F_at, x, in_p, i, h);
        worst = std::max(worst, std::abs(lie - detail::richardson_partial(psi_at, x, in_p, i, h)));
      }
  return worst;
}

/// Deterministic grid of the annulus |p_i| <= p_max.
inline std::vector<AnnulusPoint> model_grid(const ModelConfig& m, int np = 7, int nq = 9) {
  std::vector<AnnulusPoint> g;
  const auto pv = [&](int a) { return np == 1 ? 0.0 : m.p_max * (2.0 * a / (np - 1) - 1.0) * 0.95; };
  const auto qv = [&](int b) { return kTwoPi * (b + 0.31) / nq; };
  if (m.n == 1) {
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < nq; ++b) g.push_back({{pv(a), 0}, {qv(b), 0}});
  } else {
    const int np2 = std::max(2, np / 2 + 1), nq2 = std::max(2, nq / 2);
    for (int a1 = 0; a1 < np2; ++a1)
      for (int a2 = 0; a2 < np2; ++a2)
        for (int b1 = 0; b1 < nq2; ++b1)
          for (int b2 = 0; b2 < nq2; ++b2) {
            const auto pp = [&](int a) { return m.p_max * (2.0 * a / (np2 - 1) - 1.0) * 0.95; };
            g.push_back({{pp(a1), pp(a2)}, {kTwoPi * (b1 + 0.31) / nq2, kTwoPi * (b2 + 0.17) / nq2}});
          }
  }
  return g;
}

inline constexpr double kClosednessTol = 1e-6;

/// sup over the grid of the FD exterior derivative of the form.
inline double model_curl(const ModelForm& f, std::span<const AnnulusPoint> grid, double h = 1e-3) {
  const int n = static_cast<int>(f.dp.size());
  // coordinates u = (p_1..p_n, q_1..q_n); component c_u
  const auto comp = [&](int u) -> const QPSeries& { return u < n ? f.dp[u] : f.dq[u - n]; };
  double worst = 0;
  for (const auto& x : grid)
    for (int u = 0; u < 2 * n; ++u)
      for (int v = u + 1; v < 2 * n; ++v) {
        const auto cu = [&](const AnnulusPoint& y) { return detail::eval(comp(u), y); };
        const auto cv = [&](const AnnulusPoint& y) { return detail::eval(comp(v), y); };
        const double dv_cu = detail::richardson_partial(cu, x, v < n, v % n, h);
        const double du_cv = detail::richardson_partial(cv, x, u < n, u % n, h);
        worst = std::max(worst, std::abs(du_cv - dv_cu));
      }
  return worst;
}

/// Primitive Psi of a closed form vanishing on p = 0, normalized by Psi|_{p=0} = 0,
/// by radial integration: p^m in the dp_i component integrates to p^{m+e_i}/(|m|+1).
inline QPSeries dw_potential(const ModelForm& form, const ModelConfig& m) {
  for (int i = 0; i < m.n; ++i) {
    const int s0 = form.dp[i].p_slot({0, 0});
    for (const auto* c : {&form.dp[i], &form.dq[i]}) {
      double mx = 0;
      c->for_each_nonzero([&](int s, const Index2&, cplx v) {
        if (s == s0) mx = std::max(mx, std::abs(v));
      });
      if (mx > kResonanceTol) throw Error(ErrorKind::PreconditionViolated, "form does not vanish on p = 0");
    }
  }
  const auto grid = model_grid(m, 5, 7);
  if (model_curl(form, grid) > kClosednessTol) throw Error(ErrorKind::NotClosed, "form is not closed");
  QPSeries psi(m.n, m.Np, m.Nq);
  for (int i = 0; i < m.n; ++i) {
    const QPSeries& a = form.dp[i];
    a.for_each_nonzero([&](int s, const Index2& j, cplx c) {
      Index2 mm = a.p_indices()[s];
      const double d = QPSeries::order(mm) + 1;
      mm[i] += 1;
      const int t = psi.p_slot(mm);
      if (t >= 0) psi.coeff_ref(t, j) += c / d;
    });
  }
  return psi;
}

/// Flow of X_F for time t (RK4) in the model coordinates.
inline AnnulusPoint model_flow(const QPSeries& F, AnnulusPoint x, double t, int steps, int orientation) {
  const double dt = t / steps;
  const auto add = [](AnnulusPoint y, const std::array<double, 4>& v, double a) {
    for (int i = 0; i < 2; ++i) {
      y.p[i] += a * v[i];
      y.q[i] += a * v[2 + i];
    }
    return y;
  };
  for (int s = 0; s < steps; ++s) {
    const auto k1 = model_vf(F, x, orientation);
    const auto k2 = model_vf(F, add(x, k1, dt / 2), orientation);
    const auto k3 = model_vf(F, add(x, k2, dt / 2), orientation);
    const auto k4 = model_vf(F, add(x, k3, dt), orientation);
    std::array<double, 4> v{};
    for (int i = 0; i < 4; ++i) v[i] = (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6;
    x = add(x, v, dt);
  }
  return x;
}

/// sup over the grid of |(phi^1)^* rho_can - rho_can - d Psi| on coordinate vectors.
inline double finite_flow_mismatch(const QPSeries& F, const QPSeries& psi, std::span<const AnnulusPoint> grid,
                                   int orientation, int steps = 40, double h = 1e-5) {
  const int n = F.n();
  double worst = 0;
  for (const auto& x : grid) {
    const AnnulusPoint y = model_flow(F, x, 1.0, steps, orientation);
    for (int u = 0; u < 2 * n; ++u) {
      AnnulusPoint a = x, b = x;
      (u < n ? a.p : a.q)[u % n] += h;
      (u < n ? b.p : b.q)[u % n] -= h;
      const AnnulusPoint ya = model_flow(F, a, 1.0, steps, orientation), yb = model_flow(F, b, 1.0, steps, orientation);
      double pulled = 0;  // rho_can at y applied to D phi e_u
      for (int i = 0; i < n; ++i) pulled += y.p[i] * (ya.q[i] - yb.q[i]) / (2 * h);
      const double base = u < n ? 0.0 : x.p[u - n];
      const auto psi_at = [&](const AnnulusPoint& z) { return detail::eval(psi, z); };
      const double dpsi = detail::richardson_partial(psi_at, x, u < n, u % n, 1e-3);
      worst = std::max(worst, std::abs(pulled - base - dpsi));
    }
  }
  return worst;
}

struct NormalizationReport {
  QPSeries psi;
  QPSeries F;
  int sigma_model = 0;                // Euler sign that closes L_{X_F} rho_can = d Psi
  std::array<double, 2> residual_by_sigma{0, 0};  // for sigma = +1, -1
  double infinitesimal_residual = 0;  // at sigma_model
  double zero_section_value = 0;      // sup |F(0, q)|
  std::optional<double> flow_mismatch;
};

/// Psi = dw_potential(rho_can - Im rho0 / 2pi), F = euler_solve(Psi, sigma) for
/// both signs; sigma_model is the sign with the smaller Lie-derivative residual.
inline NormalizationReport normalize_neighborhood(const ModelForm& im_rho0, const ModelConfig& m,
                                                  bool run_flow_check = false) {
  NormalizationReport rep{QPSeries(m.n, m.Np, m.Nq), QPSeries(m.n, m.Np, m.Nq), 0, {0, 0}, 0, 0, std::nullopt};
  rep.psi = dw_potential(ModelForm::canonical(m) - im_rho0 * (1.0 / kTwoPi), m);
  const auto grid = model_grid(m);
  std::array<std::optional<QPSeries>, 2> sols;
  for (int k = 0; k < 2; ++k) {
    const int sigma = k == 0 ? 1 : -1;
    try {
      sols[k] = euler_solve(rep.psi, sigma);
      rep.residual_by_sigma[k] = lie_derivative_residual(*sols[k], rep.psi, grid, m.orientation);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Resonance) throw;
      rep.residual_by_sigma[k] = std::numeric_limits<double>::infinity();
    }
  }
  const int best = rep.residual_by_sigma[0] <= rep.residual_by_sigma[1] ? 0 : 1;
  rep.sigma_model = best == 0 ? 1 : -1;
  rep.F = *sols[best];
  rep.infinitesimal_residual = rep.residual_by_sigma[best];
  for (int b = 0; b < 64; ++b)
    rep.zero_section_value =
        std::max(rep.zero_section_value, std::abs(rep.F({0, 0}, {kTwoPi * b / 64, kTwoPi * ((b * 7) % 64) / 64})));
  if (run_flow_check) rep.flow_mismatch = finite_flow_mismatch(rep.F, rep.psi, model_grid(m, 3, 5), m.orientation);
  return rep;
}

}  // namespace sbs
