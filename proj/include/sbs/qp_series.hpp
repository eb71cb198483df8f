#pragma once

// Truncated power series in p = (p_1..p_n) with Fourier-series coefficients in
// q = (q_1..q_n), n in {1, 2}. Stored as complex exponential coefficients
// c_{m,j} p^m e^{i j.q}; the represented function is real (c_{m,-j} = conj c_{m,j}).

#include <array>
#include <cmath>
#include <vector>

#include "sbs/errors.hpp"
#include "sbs/numerics.hpp"

namespace sbs {

enum class TrigKind { Cos, Sin };

using Index2 = std::array<int, 2>;

/// One real term value * p^m * prod_a trig_a(j_a q_a); unused slots are zero.
struct RealTerm {
  Index2 m{0, 0};
  Index2 j{0, 0};
  std::array<TrigKind, 2> kind{TrigKind::Cos, TrigKind::Cos};
  double value = 0.0;
};

class QPSeries {
 public:
  static constexpr int kDefaultNp = 6;
  static constexpr int kDefaultNq = 16;

  explicit QPSeries(int n = 1, int Np = kDefaultNp, int Nq = kDefaultNq) : n_(n), Np_(Np), Nq_(Nq) {
    if (n != 1 && n != 2) throw Error(ErrorKind::PreconditionViolated, "series dimension must be 1 or 2");
    if (Np < 0 || Nq < 0) throw Error(ErrorKind::PreconditionViolated, "negative truncation order");
    for (int a = 0; a <= Np; ++a)
      for (int b = 0; a + b <= Np; ++b) {
        if (n == 1 && b > 0) break;
        ms_.push_back({a, b});
      }
    width_ = 2 * Nq + 1;
    jsize_ = n == 1 ? width_ : width_ * width_;
    c_.assign(ms_.size() * jsize_, cplx{});
  }

  int n() const { return n_; }
  int Np() const { return Np_; }
  int Nq() const { return Nq_; }
  const std::vector<Index2>& p_indices() const { return ms_; }
  static int order(const Index2& m) { return m[0] + m[1]; }

  /// Position of m in p_indices(), or -1 if truncated away.
  int p_slot(const Index2& m) const {
    if (m[0] < 0 || m[1] < 0 || order(m) > Np_ || (n_ == 1 && m[1] != 0)) return -1;
    for (std::size_t i = 0; i < ms_.size(); ++i)
      if (ms_[i] == m) return static_cast<int>(i);
    return -1;
  }
  bool j_in_range(const Index2& j) const {
    return std::abs(j[0]) <= Nq_ && (n_ == 1 ? j[1] == 0 : std::abs(j[1]) <= Nq_);
  }

  cplx coeff(const Index2& m, const Index2& j) const {
    const int s = p_slot(m);
    return s < 0 || !j_in_range(j) ? cplx{} : c_[s * jsize_ + flat(j)];
  }
  cplx& coeff_ref(int slot, const Index2& j) { return c_[slot * jsize_ + flat(j)]; }
  cplx coeff_at(int slot, const Index2& j) const { return c_[slot * jsize_ + flat(j)]; }

  /// Calls fn(slot, j, c) for every nonzero stored coefficient.
  template <class Fn>
  void for_each_nonzero(Fn&& fn) const {
    for (std::size_t s = 0; s < ms_.size(); ++s)
      for (int f = 0; f < jsize_; ++f) {
        const cplx c = c_[s * jsize_ + f];
        if (c != cplx{}) fn(static_cast<int>(s), unflat(f), c);
      }
  }

  /// Adds a real trigonometric term; terms outside the truncation are rejected.
  void add_term(const RealTerm& t) {
    const int s = p_slot(t.m);
    if (s < 0) throw Error(ErrorKind::TruncationOverflow, "p-degree outside the truncation");
    if (!j_in_range(t.j)) throw Error(ErrorKind::TruncationOverflow, "angle mode outside the truncation");
    // cos(jq) = (e^{ijq} + e^{-ijq})/2, sin(jq) = (e^{ijq} - e^{-ijq})/2i; j = 0 contributes 1 (cos) or 0 (sin)
    struct Part {
      int j;
      cplx w;
    };
    auto parts = [](int j, TrigKind k) {
      std::vector<Part> v;
      if (j == 0) {
        if (k == TrigKind::Cos) v.push_back({0, 1.0});
        return v;
      }
      if (k == TrigKind::Cos) return std::vector<Part>{{j, 0.5}, {-j, 0.5}};
      return std::vector<Part>{{j, cplx{0, -0.5}}, {-j, cplx{0, 0.5}}};
    };
    const auto a = parts(t.j[0], t.kind[0]);
    const auto b = n_ == 2 ? parts(t.j[1], t.kind[1]) : std::vector<Part>{{0, 1.0}};
    for (const auto& x : a)
      for (const auto& y : b) coeff_ref(s, {x.j, y.j}) += t.value * x.w * y.w;
  }

  /// Real terms with j in the canonical half (first nonzero component positive).
  std::vector<RealTerm> real_terms(double tol = 0.0) const {
    std::vector<RealTerm> out;
    const auto kinds = [](int j) {
      return j == 0 ? std::vector<TrigKind>{TrigKind::Cos} : std::vector<TrigKind>{TrigKind::Cos, TrigKind::Sin};
    };
    for (std::size_t s = 0; s < ms_.size(); ++s)
      for (int j1 = 0; j1 <= Nq_; ++j1)
        for (int j2 = 0; j2 <= (n_ == 2 ? Nq_ : 0); ++j2)
          for (TrigKind k1 : kinds(j1))
            for (TrigKind k2 : kinds(j2)) {
              // coefficient = Re sum over sign choices of prod w * c_{s.j}
              const std::vector<int> s1 = j1 == 0 ? std::vector<int>{1} : std::vector<int>{1, -1};
              const std::vector<int> s2 = j2 == 0 ? std::vector<int>{1} : std::vector<int>{1, -1};
              cplx acc{};
              for (int a : s1)
                for (int b : s2) {
                  const cplx w1 = k1 == TrigKind::Cos ? cplx{1} : cplx{0, double(a)};
                  const cplx w2 = k2 == TrigKind::Cos ? cplx{1} : cplx{0, double(b)};
                  acc += w1 * w2 * coeff_at(static_cast<int>(s), {a * j1, b * j2});
                }
              if (std::abs(acc.real()) > tol) out.push_back({ms_[s], {j1, j2}, {k1, k2}, acc.real()});
            }
    return out;
  }

  double operator()(const std::array<double, 2>& p, const std::array<double, 2>& q) const {
    double acc = 0.0;
    std::vector<cplx> e1(width_), e2(width_);
    for (int j = -Nq_; j <= Nq_; ++j) {
      e1[j + Nq_] = std::polar(1.0, j * q[0]);
      e2[j + Nq_] = n_ == 2 ? std::polar(1.0, j * q[1]) : cplx{1.0};
    }
    for (std::size_t s = 0; s < ms_.size(); ++s) {
      const double pm = std::pow(p[0], ms_[s][0]) * (n_ == 2 ? std::pow(p[1], ms_[s][1]) : 1.0);
      if (pm == 0.0) continue;
      cplx sum{};
      for (int f = 0; f < jsize_; ++f) {
        const cplx c = c_[s * jsize_ + f];
        if (c == cplx{}) continue;
        const Index2 j = unflat(f);
        sum += c * e1[j[0] + Nq_] * e2[j[1] + Nq_];
      }
      acc += pm * sum.real();
    }
    return acc;
  }

  QPSeries d_dp(int i) const {
    QPSeries r(n_, Np_, Nq_);
    for_each_nonzero([&](int s, const Index2& j, cplx c) {
      Index2 m = ms_[s];
      if (m[i] == 0) return;
      const double f = m[i];
      m[i] -= 1;
      r.coeff_ref(r.p_slot(m), j) += f * c;
    });
    return r;
  }
  QPSeries d_dq(int i) const {
    QPSeries r(n_, Np_, Nq_);
    for_each_nonzero([&](int s, const Index2& j, cplx c) { r.coeff_ref(s, j) += cplx{0, double(j[i])} * c; });
    return r;
  }
  /// Multiplies by p_i, dropping the top degree.
  QPSeries times_p(int i) const {
    QPSeries r(n_, Np_, Nq_);
    for_each_nonzero([&](int s, const Index2& j, cplx c) {
      Index2 m = ms_[s];
      m[i] += 1;
      const int t = r.p_slot(m);
      if (t >= 0) r.coeff_ref(t, j) += c;
    });
    return r;
  }

  QPSeries operator+(const QPSeries& o) const {
    check_compatible(o);
    QPSeries r = *this;
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
    return r;
  }
  QPSeries operator*(double s) const {
    QPSeries r = *this;
    for (auto& c : r.c_) c *= s;
    return r;
  }
  QPSeries operator-() const { return *this * -1.0; }
  QPSeries operator-(const QPSeries& o) const { return *this + (-o); }

  /// Product truncated to p-degree Np and angle modes |j_a| <= Nq.
  QPSeries operator*(const QPSeries& o) const {
    check_compatible(o);
    QPSeries r(n_, Np_, Nq_);
    for_each_nonzero([&](int s1, const Index2& j1, cplx c1) {
      o.for_each_nonzero([&](int s2, const Index2& j2, cplx c2) {
        const Index2 m{ms_[s1][0] + ms_[s2][0], ms_[s1][1] + ms_[s2][1]};
        const Index2 j{j1[0] + j2[0], j1[1] + j2[1]};
        const int t = r.p_slot(m);
        if (t >= 0 && r.j_in_range(j)) r.coeff_ref(t, j) += c1 * c2;
      });
    });
    return r;
  }

  double max_abs_coeff() const {
    double m = 0;
    for (cplx c : c_) m = std::max(m, std::abs(c));
    return m;
  }
  /// Largest coefficient among monomials of order |m| = d.
  double max_abs_coeff_of_order(int d) const {
    double mx = 0;
    for (std::size_t s = 0; s < ms_.size(); ++s)
      if (order(ms_[s]) == d)
        for (int f = 0; f < jsize_; ++f) mx = std::max(mx, std::abs(c_[s * jsize_ + f]));
    return mx;
  }
  bool operator==(const QPSeries& o) const {
    return n_ == o.n_ && Np_ == o.Np_ && Nq_ == o.Nq_ && c_ == o.c_;
  }

  /// Same data with a different truncation (coefficients outside are dropped).
  QPSeries retruncated(int Np, int Nq) const {
    QPSeries r(n_, Np, Nq);
    for_each_nonzero([&](int s, const Index2& j, cplx c) {
      const int t = r.p_slot(ms_[s]);
      if (t >= 0 && r.j_in_range(j)) r.coeff_ref(t, j) = c;
    });
    return r;
  }

 private:
  int flat(const Index2& j) const { return n_ == 1 ? j[0] + Nq_ : (j[0] + Nq_) * width_ + (j[1] + Nq_); }
  Index2 unflat(int f) const { return n_ == 1 ? Index2{f - Nq_, 0} : Index2{f / width_ - Nq_, f % width_ - Nq_}; }
  void check_compatible(const QPSeries& o) const {
    if (n_ != o.n_ || Np_ != o.Np_ || Nq_ != o.Nq_)
      throw Error(ErrorKind::PreconditionViolated, "series with different truncations");
  }

  int n_, Np_, Nq_;
  int width_ = 1, jsize_ = 1;
  std::vector<Index2> ms_;
  std::vector<cplx> c_;
};

}  // namespace sbs
