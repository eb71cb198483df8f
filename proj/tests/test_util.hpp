#pragma once

#include <gtest/gtest.h>

#include <random>

#include "sbs/errors.hpp"
#include "sbs/polynomial.hpp"
#include "sbs/qp_series.hpp"

namespace sbs::testing {

/// Runs `fn` and returns the kind of the sbs::Error it throws.
inline ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an sbs::Error";
  return ErrorKind::InvalidDocument;
}

/// Random polynomial of total degree <= 3 in (X, Y, Z) with coefficients of size `scale`.
inline AmbientPoly random_cubic(unsigned seed, double scale = 0.04) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  AmbientPoly p;
  for (int a = 0; a <= 3; ++a)
    for (int b = 0; a + b <= 3; ++b)
      for (int c = 0; a + b + c <= 3; ++c)
        if (a + b + c > 0) p.add({a, b, c}, u(rng));
  return p;
}

/// Random real series with coefficients on the lattice (420 / 2^10) Z, so that
/// division by |m| +- 1 <= 7 is exact in floating point.
inline QPSeries random_lattice_series(std::mt19937_64& rng, int n, int Np, int Nq, int terms, int min_order = 0) {
  QPSeries s(n, Np, Nq);
  std::uniform_int_distribution<int> coef(-64, 64), jq(0, Nq), pick(0, static_cast<int>(s.p_indices().size()) - 1);
  std::bernoulli_distribution sin_kind(0.5);
  for (int t = 0; t < terms; ++t) {
    const Index2 m = s.p_indices()[pick(rng)];
    if (QPSeries::order(m) < min_order) continue;
    RealTerm term{m, {jq(rng), n == 2 ? jq(rng) : 0}, {TrigKind::Cos, TrigKind::Cos}, 0.0};
    for (int a = 0; a < n; ++a)
      if (term.j[a] != 0 && sin_kind(rng)) term.kind[a] = TrigKind::Sin;
    term.value = coef(rng) * 420.0 / 1024.0;
    s.add_term(term);
  }
  return s;
}

}  // namespace sbs::testing
