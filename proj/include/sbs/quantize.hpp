#pragma once

// Bohr-Sommerfeld fibers of a moment map mu = phi(Z) on the sphere and the
// basis of the Hilbert space they span.

#include <algorithm>
#include <optional>
#include <string>

#include "sbs/loops_moduli.hpp"

namespace sbs {

/// mu = phi(Z) for a polynomial phi (coefficients in increasing degree).
class MomentMap {
 public:
  MomentMap() : phi_{0.0, 1.0} {}
  explicit MomentMap(std::vector<double> phi) : phi_(std::move(phi)) {
    if (phi_.empty()) throw Error(ErrorKind::PreconditionViolated, "empty reparametrization");
    // strict monotonicity on [-1, 1] by the sampled sign of phi'
    int sign = 0;
    for (int i = 0; i <= 2048; ++i) {
      const double d = derivative(-1.0 + 2.0 * i / 2048);
      const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
      if (s == 0 && i > 0 && i < 2048) throw Error(ErrorKind::PreconditionViolated, "phi' vanishes inside (-1, 1)");
      if (s != 0 && sign != 0 && s != sign) throw Error(ErrorKind::PreconditionViolated, "phi is not monotone");
      if (s != 0) sign = s;
    }
    if (sign == 0) throw Error(ErrorKind::PreconditionViolated, "phi is constant");
    increasing_ = sign > 0;
  }
  static MomentMap height() { return {}; }

  double operator()(double Z) const {
    double acc = 0;
    for (auto it = phi_.rbegin(); it != phi_.rend(); ++it) acc = acc * Z + *it;
    return acc;
  }
  double derivative(double Z) const {
    double acc = 0;
    for (std::size_t i = phi_.size(); i-- > 1;) acc = acc * Z + static_cast<double>(i) * phi_[i];
    return acc;
  }
  double level_min() const { return std::min((*this)(-1.0), (*this)(1.0)); }
  double level_max() const { return std::max((*this)(-1.0), (*this)(1.0)); }
  const std::vector<double>& coefficients() const { return phi_; }

  /// Height Z with phi(Z) = level, by bisection.
  double height_at(double level) const {
    double a = -1.0, b = 1.0;
    for (int i = 0; i < 200 && b - a > 1e-16; ++i) {
      const double m = 0.5 * (a + b);
      if (((*this)(m) < level) == increasing_) a = m;
      else b = m;
    }
    return 0.5 * (a + b);
  }

 private:
  std::vector<double> phi_;
  bool increasing_ = true;
};

struct ScanOptions {
  int levels = 512;
  double level_tol = 1e-10;
  bool include_poles = false;
  double min_radius = 1e-5;  // below this a level is treated as a point
  int J = kDefaultModes;
  int samples = kDefaultSamples;
  Tolerances tol{};
};

struct BsFiber {
  double level = 0;
  double height = 0;
  double r2 = 0;  // squared chart radius of the latitude
  std::optional<Loop> loop;  // empty for a pole point-fiber
  double defect = 0;
  double area = 0;
};

struct BsFiberReport {
  std::vector<BsFiber> fibers;
  std::size_t count() const { return fibers.size(); }
};

namespace detail {

inline double r2_from_height(double Z) { return (1.0 - Z) / (1.0 + Z); }

}  // namespace detail

/// Scans levels of mu, brackets crossings of integer area and bisects them.
inline BsFiberReport enumerate_bs_fibers(const SphereConfig& cfg, const MomentMap& mu = MomentMap::height(),
                                         const ScanOptions& opts = {}) {
  const double lo = mu.level_min(), hi = mu.level_max();
  const auto area_at = [&](double level) {
    const double Z = mu.height_at(level);
    if (Z <= -1.0 || Z >= 1.0) return Z >= 1.0 ? 0.0 : double(cfg.k);
    return enclosed_area(Loop::latitude(std::sqrt(detail::r2_from_height(Z)), 1, 64), cfg);
  };
  // the end levels are the poles (areas 0 and k)
  std::vector<double> lv, ar;
  for (int i = 0; i <= opts.levels; ++i) {
    const double l = lo + (hi - lo) * i / opts.levels;
    lv.push_back(l);
    ar.push_back(area_at(l));
  }
  // adaptive refinement until adjacent areas differ by < 1/2
  for (std::size_t i = 0; i + 1 < lv.size();) {
    if (std::abs(ar[i + 1] - ar[i]) >= 0.5 && lv[i + 1] - lv[i] > opts.level_tol) {
      const double m = 0.5 * (lv[i] + lv[i + 1]);
      lv.insert(lv.begin() + i + 1, m);
      ar.insert(ar.begin() + i + 1, area_at(m));
    } else {
      ++i;
    }
  }
  BsFiberReport rep;
  const auto make_fiber = [&](double level) {
    BsFiber f;
    f.level = level;
    f.height = mu.height_at(level);
    f.r2 = detail::r2_from_height(f.height);
    if (std::sqrt(f.r2) < opts.min_radius || f.r2 > 1.0 / sqr(opts.min_radius))
      throw Error(ErrorKind::DegenerateLevel, "bracketed level collapses to a point");
    f.loop = Loop::latitude(std::sqrt(f.r2), opts.J, opts.samples);
    f.defect = holonomy_defect(*f.loop, cfg);
    f.area = enclosed_area(*f.loop, cfg);
    return f;
  };
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
    const double a0 = ar[i], a1 = ar[i + 1];
    const double lo_a = std::min(a0, a1), hi_a = std::max(a0, a1);
    for (double n = std::ceil(lo_a); n <= hi_a; n += 1.0) {
      if (n <= 0.0 || n >= cfg.k) continue;  // pole point-fibers
      // a crossing exactly on the right node is owned by the next interval
      if (n == a1 && i + 2 < lv.size()) continue;
      double a = lv[i], b = lv[i + 1];
      const bool rising = a1 > a0;
      while (b - a > opts.level_tol) {
        const double m = 0.5 * (a + b);
        if ((area_at(m) < n) == rising) a = m;
        else b = m;
      }
      rep.fibers.push_back(make_fiber(0.5 * (a + b)));
    }
  }
  if (opts.include_poles) {
    for (double Z : {1.0, -1.0}) {
      BsFiber f;
      f.level = mu(Z);
      f.height = Z;
      f.r2 = Z > 0 ? 0.0 : std::numeric_limits<double>::infinity();
      f.area = Z > 0 ? 0.0 : double(cfg.k);
      rep.fibers.push_back(f);
    }
  }
  std::sort(rep.fibers.begin(), rep.fibers.end(), [](const BsFiber& a, const BsFiber& b) { return a.level < b.level; });
  return rep;
}

/// Labels <S_1> ... <S_m> of the basis, ordered by level.
inline std::vector<std::string> hilbert_basis(const BsFiberReport& rep) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < rep.count(); ++i) labels.push_back("<S_" + std::to_string(i + 1) + ">");
  return labels;
}

struct FiberCompatRow {
  int area = 0;
  int power = 0;
  double residual = 0;
  bool pass = false;
};

/// For each fiber of integer area m, sbs_residual against z^{m + offset}.
inline std::vector<FiberCompatRow> sbs_fiber_compat(const SphereConfig& cfg, const BsFiberReport& rep, int offset = 0,
                                                    double tol = 1e-8) {
  std::vector<FiberCompatRow> rows;
  for (const auto& f : rep.fibers) {
    if (!f.loop) continue;
    FiberCompatRow r;
    r.area = static_cast<int>(std::lround(f.area));
    r.power = r.area + offset;
    r.residual = sbs_residual(*f.loop, Section::monomial(r.power), cfg);
    r.pass = r.residual <= tol;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sbs
