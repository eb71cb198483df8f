#pragma once

// JSON documents for sections, loops, pairs, series and lifted vectors, and
// CSV tables for plotting.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sbs/expression.hpp"
#include "sbs/loops_moduli.hpp"
#include "sbs/qp_series.hpp"
#include "sbs/quantize.hpp"
#include "sbs/sbs_structure.hpp"

namespace sbs::io {

using nlohmann::json;

inline constexpr int kSchema = 1;

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) { throw Error(ErrorKind::InvalidDocument, what); }

/// Runs a reader and turns JSON access errors into InvalidDocument.
template <class Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    invalid(std::string(what) + ": " + e.what());
  }
}

inline json chart_table(const ChartPoly& f) {
  json rows = json::array();
  for (int a = 0; a <= f.degree(); ++a)
    for (int b = 0; b <= f.degree(); ++b)
      if (const cplx c = f.at(a, b); c != cplx{}) rows.push_back({a, b, c.real(), c.imag()});
  return rows;
}

inline ChartPoly chart_from_table(const json& rows, int degree) {
  ChartPoly f(degree);
  for (const auto& r : rows) {
    if (!r.is_array() || r.size() != 4) invalid("chart coefficients must be [a, b, re, im]");
    const int a = r[0].get<int>(), b = r[1].get<int>();
    if (a < 0 || b < 0 || a > degree || b > degree) invalid("chart coefficient index outside the degree bound");
    f.at(a, b) += cplx{r[2].get<double>(), r[3].get<double>()};
  }
  return f;
}

inline const char* kind_name(TrigKind k) { return k == TrigKind::Cos ? "cos" : "sin"; }

inline TrigKind kind_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "cos") return TrigKind::Cos;
  if (s == "sin") return TrigKind::Sin;
  invalid("trigonometric kind must be \"cos\" or \"sin\"");
}

}  // namespace detail

// Sections: {"degree", "global", "coeffs": [[a, b, re, im]], "region_radius"}.

inline json to_json(const Section& s) {
  json j{{"degree", s.f.degree()}, {"global", s.global}, {"coeffs", detail::chart_table(s.f)}};
  if (!s.global) j["region_radius"] = s.region_radius;
  return j;
}

inline Section section_from_json(const json& j) {
  return detail::guarded("section", [&] {
    const int degree = j.at("degree").get<int>();
    if (degree < 0 || degree > 64) detail::invalid("section degree out of range");
    ChartPoly f = detail::chart_from_table(j.at("coeffs"), degree);
    if (j.at("global").get<bool>()) return Section::make_global(std::move(f));
    return Section::make_local(std::move(f), j.at("region_radius").get<double>());
  });
}

// Loops: {"J", "coeffs": [[j, re, im]], "samples"}.

inline json to_json(const Loop& l) {
  json rows = json::array();
  for (int j = -l.J(); j <= l.J(); ++j)
    if (const cplx c = l.coeff(j); c != cplx{}) rows.push_back({j, c.real(), c.imag()});
  return {{"J", l.J()}, {"coeffs", rows}, {"samples", l.samples()}};
}

inline Loop loop_from_json(const json& j) {
  return detail::guarded("loop", [&] {
    const int J = j.at("J").get<int>();
    if (J < 1 || J > 4096) detail::invalid("loop mode count out of range");
    std::vector<cplx> c(2 * J + 1);
    for (const auto& r : j.at("coeffs")) {
      if (!r.is_array() || r.size() != 3) detail::invalid("loop coefficients must be [j, re, im]");
      const int m = r[0].get<int>();
      if (std::abs(m) > J) detail::invalid("loop mode outside [-J, J]");
      c[m + J] += cplx{r[1].get<double>(), r[2].get<double>()};
    }
    Loop l(std::move(c), j.value("samples", kDefaultSamples));
    l.validate();
    return l;
  });
}

// Pairs embed a loop and a section document.

inline json to_json(const SbsPair& p) {
  return {{"loop", to_json(p.loop)},
          {"section", to_json(p.section)},
          {"bs_defect", p.bs_defect},
          {"sbs_residual", p.sbs_residual}};
}

inline std::pair<Loop, Section> pair_from_json(const json& j) {
  return detail::guarded("pair", [&] { return std::pair{loop_from_json(j.at("loop")), section_from_json(j.at("section"))}; });
}

// Series: {"n", "Np", "Nq", "terms": [[m..., j, kind, (j2, kind2), value]]}.

inline json to_json(const QPSeries& s, double tol = 0.0) {
  json terms = json::array();
  for (const RealTerm& t : s.real_terms(tol)) {
    json row = json::array();
    for (int i = 0; i < s.n(); ++i) row.push_back(t.m[i]);
    for (int i = 0; i < s.n(); ++i) {
      row.push_back(t.j[i]);
      row.push_back(detail::kind_name(t.kind[i]));
    }
    row.push_back(t.value);
    terms.push_back(std::move(row));
  }
  return {{"n", s.n()}, {"Np", s.Np()}, {"Nq", s.Nq()}, {"terms", terms}};
}

inline QPSeries series_from_json(const json& j) {
  return detail::guarded("series", [&] {
    QPSeries s(j.at("n").get<int>(), j.value("Np", QPSeries::kDefaultNp), j.value("Nq", QPSeries::kDefaultNq));
    const auto n = static_cast<std::size_t>(s.n());
    for (const auto& r : j.at("terms")) {
      if (!r.is_array() || r.size() != 3 * n + 1) detail::invalid("series terms must be [m..., j, kind, ..., value]");
      RealTerm t;
      for (std::size_t i = 0; i < n; ++i) {
        t.m[i] = r[i].get<int>();
        t.j[i] = r[n + 2 * i].get<int>();
        t.kind[i] = detail::kind_from(r[n + 2 * i + 1]);
      }
      t.value = r.back().get<double>();
      s.add_term(t);
    }
    return s;
  });
}

// Real fields: {"degree", "coeffs": [[a, b, re, im]], "ambient": "expression"}.

inline json to_json(const RealField& f) {
  json j{{"degree", f.chart.degree()}, {"coeffs", detail::chart_table(f.chart)}};
  if (!f.ambient.is_zero()) {
    json rows = json::array();
    for (const auto& [e, c] : f.ambient.terms()) rows.push_back({e[0], e[1], e[2], c});
    j["ambient_terms"] = rows;
  }
  return j;
}

inline RealField field_from_json(const json& j) {
  return detail::guarded("field", [&] {
    const int degree = j.value("degree", 0);
    if (degree < 0 || degree > 64) detail::invalid("field degree out of range");
    ChartPoly chart = j.contains("coeffs") ? detail::chart_from_table(j.at("coeffs"), degree) : ChartPoly(degree);
    if (!chart.is_real(1e-14)) detail::invalid("chart table of a real field must satisfy c_ab = conj(c_ba)");
    AmbientPoly amb;
    if (j.contains("ambient")) amb = parse_expression(j.at("ambient").get<std::string>()).compile();
    if (j.contains("ambient_terms"))
      for (const auto& r : j.at("ambient_terms")) {
        if (!r.is_array() || r.size() != 4) detail::invalid("ambient terms must be [ex, ey, ez, value]");
        amb.add({r[0].get<int>(), r[1].get<int>(), r[2].get<int>()}, r[3].get<double>());
      }
    return RealField(std::move(chart), std::move(amb));
  });
}

// Lifted vectors: {"f0": field, "g0": field, "loop": loop, "loop_component": {"cos", "sin"}}.

inline json to_json(const BTangent& t) { return {{"cos", t.cos_coeffs}, {"sin", t.sin_coeffs}}; }

inline json to_json(const LiftedVector& v, const Loop& loop) {
  return {{"schema", kSchema},
          {"f0", to_json(v.delta.f0)},
          {"g0", to_json(v.delta.g0)},
          {"loop", to_json(loop)},
          {"loop_component", to_json(v.loop_component)}};
}

/// Reads a lifted vector; without a stored loop component the coherent lift is used.
inline std::pair<LiftedVector, Loop> lifted_from_json(const json& j) {
  return detail::guarded("lifted vector", [&] {
    const Loop loop = loop_from_json(j.at("loop"));
    const RhoTangent delta{field_from_json(j.at("f0")), field_from_json(j.at("g0"))};
    LiftedVector v = lift(delta, loop);
    if (j.contains("loop_component")) {
      const auto& lc = j.at("loop_component");
      BTangent t(loop.J());
      t.cos_coeffs = lc.at("cos").get<std::vector<double>>();
      t.sin_coeffs = lc.at("sin").get<std::vector<double>>();
      if (t.cos_coeffs.size() != t.sin_coeffs.size()) detail::invalid("loop component cos/sin lengths differ");
      v.loop_component = std::move(t);
    }
    return std::pair{std::move(v), loop};
  });
}

// Files.

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) detail::invalid("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    detail::invalid(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// CSV tables.

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// level, r2, area, defect
inline std::string fibers_csv(const BsFiberReport& rep) {
  std::string s = "level,r2,area,defect\n";
  for (const auto& f : rep.fibers)
    s += format_double(f.level) + "," + format_double(f.r2) + "," + format_double(f.area) + "," +
         format_double(f.defect) + "\n";
  return s;
}

/// theta, x, y, Z over the loop samples.
inline std::string loop_trace_csv(const Loop& loop) {
  std::string s = "theta,x,y,Z\n";
  const LoopSamples smp = loop.sample();
  for (std::size_t i = 0; i < smp.z.size(); ++i) {
    s += format_double(smp.theta[i]) + "," + format_double(smp.z[i].real()) + "," + format_double(smp.z[i].imag()) + "," +
         format_double(to_ambient(smp.z[i])[2]) + "\n";
  }
  return s;
}

/// x, y, value on an n x n grid of the square |x|, |y| <= radius.
template <class Fn>
std::string field_scan_csv(Fn&& value, int n, double radius) {
  std::string s = "x,y,value\n";
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double x = n == 1 ? 0.0 : -radius + 2 * radius * a / (n - 1);
      const double y = n == 1 ? 0.0 : -radius + 2 * radius * b / (n - 1);
      s += format_double(x) + "," + format_double(y) + "," + format_double(value(cplx{x, y})) + "\n";
    }
  return s;
}

}  // namespace sbs::io
