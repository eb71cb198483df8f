#pragma once

// The sbs_workbench command line: each subcommand reads JSON documents, calls
// the library and emits a versioned JSON report plus optional artifacts.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sbs/dw_model.hpp"
#include "sbs/find_sbs.hpp"
#include "sbs/io.hpp"

namespace sbs::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitFailure = 2;

/// A report plus named files to place in the --out directory.
struct Outcome {
  json report;
  int code = kExitOk;
  std::vector<std::pair<std::string, std::string>> artifacts;
};

inline json header(const std::string& command) { return {{"schema", io::kSchema}, {"command", command}}; }

/// Worker threads for library scans: SBS_WORKBENCH_THREADS, capped by the hardware.
inline unsigned worker_threads() {
  const char* env = std::getenv("SBS_WORKBENCH_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return n < 1 ? 1u : std::min(static_cast<unsigned>(n), hw);
}

/// Global section of degree <= k with a dominant constant term, so that no zero
/// lies in the closed unit disc.
inline Section random_section(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ChartPoly f(kDefaultDegreeBound);
  f.at(0, 0) = cplx{5.0 + u(rng), u(rng)};
  for (int a = 1; a <= k; ++a) f.at(a, 0) = cplx{u(rng), u(rng)} * (1.0 / k);
  return Section::make_global(f);
}

// verify-axioms

struct AxiomOptions {
  int level = 1;
  double tol = 1e-5;
  std::uint64_t seed = 1;
  int sections = 20;
};

inline Outcome verify_axioms(const AxiomOptions& o) {
  const SphereConfig cfg = SphereConfig::calibrated(o.level);
  std::mt19937_64 rng(o.seed);
  const auto grid = annulus_grid(0.2, 1.0, 4, 12);

  const double curvature = curvature_residual(cfg, square_grid(-2, 2, -2, 2, 9));
  double d_im = 0, re_exact = 0;
  int richardson = 0, proportional = 0, separated = 0;
  std::uniform_real_distribution<double> mag(0.5, 2.0), arg(0.0, kTwoPi);
  for (int i = 0; i < o.sections; ++i) {
    const Section s = random_section(rng, o.level);
    const auto rep = rho_identity_check(s, cfg, grid);
    d_im = std::max(d_im, rep.d_im_residual);
    re_exact = std::max(re_exact, rep.re_exact_residual);
    richardson += rep.richardson_used;
    const double r = mag(rng), phi = arg(rng);
    if (ratio_constancy(s, s.scaled(std::polar(r, phi)), cfg, grid).constant) ++proportional;
    if (!ratio_constancy(s, random_section(rng, o.level), cfg, grid).constant) ++separated;
  }

  const bool ok = curvature <= o.tol && d_im <= o.tol && re_exact <= o.tol && proportional == o.sections &&
                  separated == o.sections;
  Outcome out{header("verify-axioms"), ok ? kExitOk : kExitFailure, {}};
  out.report.update({{"level", o.level},
                     {"seed", o.seed},
                     {"tol", o.tol},
                     {"sections", o.sections},
                     {"curvature_residual", curvature},
                     {"rho_identity", {{"d_im_residual", d_im}, {"re_exact_residual", re_exact}, {"richardson_used", richardson}}},
                     {"ratio_constancy", {{"proportional_detected", proportional}, {"non_proportional_detected", separated}}},
                     {"passed", ok}});
  return out;
}

// bs-check, sbs-residual

inline Outcome bs_check(int level, const Loop& loop, double tol) {
  const SphereConfig cfg = SphereConfig::calibrated(level);
  const double defect = holonomy_defect(loop, cfg);
  const bool bs = std::abs(defect) <= tol;
  Outcome out{header("bs-check"), bs ? kExitOk : kExitFailure, {}};
  out.report.update({{"level", level},
                     {"tol", tol},
                     {"circulation", connection_circulation(loop, cfg)},
                     {"defect", defect},
                     {"bohr_sommerfeld", bs}});
  try {
    out.report["area"] = enclosed_area(loop, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonSimpleLoop) throw;
    out.report["area"] = nullptr;
  }
  return out;
}

inline Outcome sbs_residual_check(int level, const Loop& loop, const Section& section, double tol) {
  const SphereConfig cfg = SphereConfig::calibrated(level);
  const double defect = holonomy_defect(loop, cfg);
  const double residual = sbs_residual(loop, section, cfg);
  const bool ok = std::abs(defect) <= tol && residual <= tol;
  Outcome out{header("sbs-residual"), ok ? kExitOk : kExitFailure, {}};
  out.report.update({{"level", level}, {"tol", tol}, {"defect", defect}, {"sbs_residual", residual}, {"special", ok}});
  return out;
}

// find-sbs

inline Outcome find_sbs_command(int level, const Section& section, const Loop& seed, const FindSbsOptions& opts) {
  const SphereConfig cfg = SphereConfig::calibrated(level);
  const FindSbsResult res = find_sbs(section, seed, cfg, opts);
  Outcome out{header("find-sbs"), kExitOk, {}};
  out.report.update({{"level", level}, {"tol", opts.tol}});
  if (const auto* pair = std::get_if<SbsPair>(&res)) {
    out.report.update({{"converged", true},
                       {"sbs_residual", pair->sbs_residual},
                       {"bs_defect", pair->bs_defect},
                       {"area", enclosed_area(pair->loop, cfg)},
                       {"pair", io::to_json(*pair)}});
    out.artifacts.emplace_back("pair.json", io::dump(io::to_json(*pair)));
    return out;
  }
  const auto& fail = std::get<FailureReport>(res);
  out.code = kExitFailure;
  out.report.update({{"converged", false},
                     {"error", {{"kind", to_string(fail.kind)}, {"message", fail.message}}},
                     {"best_residual", fail.best_residual},
                     {"iterations", fail.iterations},
                     {"zero_set_rejections", fail.zero_set_rejections},
                     {"best_loop", io::to_json(fail.best_loop)}});
  return out;
}

// flow

struct FlowCommand {
  int level = 1;
  std::string hamiltonian;
  double time = 1.0;
  int steps = 500;
  double tol = 1e-6;
  unsigned threads = 1;
};

inline Outcome flow_command(const FlowCommand& o, const Loop& loop, const Section& section) {
  const SphereConfig cfg = SphereConfig::calibrated(o.level);
  const Expression expr = parse_expression(o.hamiltonian);
  const HamiltonianFn F(expr.compile());
  const SbsPair pair = make_sbs_pair(loop, section, cfg);
  FlowOptions fo;
  fo.threads = o.threads;
  const TransportResult tr = transport_pair(F, pair, o.time, o.steps, cfg, fo);
  const double drift = std::abs(tr.bs_defect - tr.input_defect);
  const bool ok = tr.sbs_residual <= o.tol && drift <= o.tol;
  Outcome out{header("flow"), ok ? kExitOk : kExitFailure, {}};
  out.report.update({{"level", o.level},
                     {"hamiltonian", to_string(expr)},
                     {"time", o.time},
                     {"steps", o.steps},
                     {"tol", o.tol},
                     {"input_sbs_residual", tr.input_residual},
                     {"input_bs_defect", tr.input_defect},
                     {"sbs_residual", tr.sbs_residual},
                     {"bs_defect", tr.bs_defect},
                     {"bs_defect_drift", drift},
                     {"max_det_drift", tr.flow.max_det_drift},
                     {"error_estimate", tr.flow.error_estimate},
                     {"invariant", ok},
                     {"loop", io::to_json(tr.loop)}});
  out.artifacts.emplace_back("transported_pair.json",
                             io::dump({{"loop", io::to_json(tr.loop)}, {"section", io::to_json(section)}}));
  return out;
}

// lift

inline Outcome lift_command(const LiftedVector& v, const Loop& loop) {
  const LiftedVector iv = apply_I(v, loop);
  const LiftedVector iiv = apply_I(iv, loop);
  const FiberTangentReport ft = fiber_tangent_check(v.delta, loop);
  const FiberTangentReport ft_i = fiber_tangent_check(iv.delta, loop);
  Outcome out{header("lift"), kExitOk, {}};
  out.report.update({{"lifted", io::to_json(v, loop)},
                     {"rotated", io::to_json(iv, loop)},
                     {"coherence_defect", coherence_defect(v, loop)},
                     {"rotated_coherence_defect", coherence_defect(iv, loop)},
                     {"square_is_minus_identity", iiv.delta == -v.delta},
                     {"fiber_tangent", {{"tangent", ft.tangent}, {"f0_residual", ft.f0_residual}, {"g0_residual", ft.g0_residual}}},
                     {"rotated_fiber_tangent",
                      {{"tangent", ft_i.tangent}, {"f0_residual", ft_i.f0_residual}, {"g0_residual", ft_i.g0_residual}}}});
  out.artifacts.emplace_back("lifted.json", io::dump(io::to_json(v, loop)));
  out.artifacts.emplace_back("rotated.json", io::dump(io::to_json(iv, loop)));
  return out;
}

// euler-solve

inline Outcome euler_solve_command(const QPSeries& psi, int sigma) {
  const QPSeries F = euler_solve(psi, sigma);
  ModelConfig m;
  m.n = psi.n();
  m.Np = psi.Np();
  m.Nq = psi.Nq();
  const auto grid = model_grid(m, m.n == 1 ? 7 : 5, m.n == 1 ? 9 : 6);
  Outcome out{header("euler-solve"), kExitOk, {}};
  out.report.update({{"sigma", sigma},
                     {"round_trip_exact", apply_euler(F, sigma) == psi},
                     {"lie_derivative_residual", lie_derivative_residual(F, psi, grid, m.orientation)},
                     {"model_orientation", m.orientation},
                     {"F", io::to_json(F)}});
  out.artifacts.emplace_back("F.json", io::dump(io::to_json(F)));
  return out;
}

// enumerate-fibers

inline Outcome enumerate_fibers_command(int level, const ScanOptions& opts) {
  const SphereConfig cfg = SphereConfig::calibrated(level);
  const BsFiberReport rep = enumerate_bs_fibers(cfg, MomentMap::height(), opts);
  json fibers = json::array();
  for (const auto& f : rep.fibers)
    fibers.push_back({{"level", f.level},
                      {"height", f.height},
                      {"r2", std::isfinite(f.r2) ? json(f.r2) : json(nullptr)},
                      {"area", f.area},
                      {"defect", f.defect},
                      {"point", !f.loop.has_value()}});
  json compat = json::array();
  for (const auto& r : sbs_fiber_compat(cfg, rep))
    compat.push_back({{"area", r.area}, {"power", r.power}, {"residual", r.residual}, {"pass", r.pass}});
  Outcome out{header("enumerate-fibers"), kExitOk, {}};
  out.report.update({{"level", level},
                     {"count", rep.count()},
                     {"fibers", fibers},
                     {"basis", hilbert_basis(rep)},
                     {"sbs_compat", compat}});
  out.artifacts.emplace_back("fibers.csv", io::fibers_csv(rep));
  return out;
}

// run_command

namespace detail {

inline void write_artifacts(const Outcome& o, const std::string& command, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_text_file(dir / (command + ".json"), io::dump(o.report));
  for (const auto& [name, text] : o.artifacts) io::write_text_file(dir / name, text);
}

inline json error_report(const std::string& command, const Error& e) {
  json r = header(command);
  r["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  if (e.kind() == ErrorKind::SyntaxError) r["error"]["position"] = e.position();
  return r;
}

}  // namespace detail

/// Runs one subcommand; args excludes the program name. Returns the exit code.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bohr-Sommerfeld loop workbench", "sbs_workbench"};
  app.require_subcommand(1);

  struct Shared {
    int level = 1;
    std::optional<double> tol;
    std::uint64_t seed = 1;
    std::string out_dir;
  } sh;
  std::string loop_file, section_file, pair_file, delta_file, series_file, hamiltonian, f0, g0;
  int m = 0, steps = 500, sigma = 1, max_iter = 80, levels = 512, grid = 41, sections = 20;
  double time = 1.0, radius = 2.0;
  bool include_poles = false;

  const auto shared = [&](CLI::App* sub, bool level_required) {
    auto* lv = sub->add_option("--level", sh.level, "Bundle level k >= 1")->check(CLI::PositiveNumber);
    if (level_required) lv->required();
    sub->add_option("--tol", sh.tol, "Acceptance tolerance");
    sub->add_option("--seed", sh.seed, "Random seed");
    sub->add_option("--out", sh.out_dir, "Directory for the report and artifacts");
  };

  auto* verify = app.add_subcommand("verify-axioms", "Check the prequantum identities on random sections");
  shared(verify, true);
  verify->add_option("--sections", sections, "Number of random sections")->check(CLI::PositiveNumber);

  auto* bs = app.add_subcommand("bs-check", "Holonomy defect and enclosed area of a loop");
  shared(bs, true);
  bs->add_option("--loop", loop_file, "Loop JSON")->required();

  auto* res = app.add_subcommand("sbs-residual", "Residual of Im rho along a loop");
  shared(res, true);
  auto* res_pair = res->add_option("--pair", pair_file, "Pair JSON");
  res->add_option("--loop", loop_file, "Loop JSON")->excludes(res_pair);
  res->add_option("--section", section_file, "Section JSON")->excludes(res_pair);

  auto* find = app.add_subcommand("find-sbs", "Search for an SBS loop from a seed");
  shared(find, true);
  find->add_option("--section", section_file, "Section JSON")->required();
  find->add_option("--loop", loop_file, "Seed loop JSON")->required();
  find->add_option("--max-iter", max_iter, "Iteration cap")->check(CLI::PositiveNumber);

  auto* flow = app.add_subcommand("flow", "Transport a pair along a Hamiltonian flow");
  shared(flow, true);
  flow->add_option("--hamiltonian", hamiltonian, "Polynomial in X, Y, Z")->required();
  auto* flow_pair = flow->add_option("--pair", pair_file, "Pair JSON");
  flow->add_option("--m", m, "Use the canonical pair of index m")->excludes(flow_pair);
  flow->add_option("--time", time, "Flow time");
  flow->add_option("--steps", steps, "RK4 steps")->check(CLI::PositiveNumber);

  auto* lift_cmd = app.add_subcommand("lift", "Lift a rho tangent and apply the complex structure");
  shared(lift_cmd, false);
  auto* lift_delta = lift_cmd->add_option("--delta", delta_file, "Lifted-vector JSON");
  lift_cmd->add_option("--loop", loop_file, "Loop JSON")->excludes(lift_delta);
  lift_cmd->add_option("--f0", f0, "Real part f0 as a polynomial in X, Y, Z")->excludes(lift_delta);
  lift_cmd->add_option("--g0", g0, "Imaginary part g0 as a polynomial in X, Y, Z")->excludes(lift_delta);

  auto* euler = app.add_subcommand("euler-solve", "Solve (Euler + sigma) F = Psi on a series");
  shared(euler, false);
  euler->add_option("--series", series_file, "Series JSON")->required();
  euler->add_option("--sigma", sigma, "Sign in the Euler equation")->check(CLI::IsMember({1, -1}));

  auto* fibers = app.add_subcommand("enumerate-fibers", "Bohr-Sommerfeld fibers of the height map");
  shared(fibers, true);
  fibers->add_option("--levels", levels, "Initial scan resolution")->check(CLI::PositiveNumber);
  fibers->add_flag("--include-poles", include_poles, "Report the two pole point-fibers");

  auto* plot = app.add_subcommand("export-plot", "CSV for a loop trace or a field scan");
  shared(plot, false);
  auto* plot_loop = plot->add_option("--loop", loop_file, "Loop JSON (theta, x, y, Z)");
  auto* plot_h = plot->add_option("--hamiltonian", hamiltonian, "Scan a polynomial (x, y, value)");
  auto* plot_s = plot->add_option("--section", section_file, "Scan ln|alpha| of a section (x, y, value)");
  plot_loop->excludes(plot_h)->excludes(plot_s);
  plot_h->excludes(plot_s);
  plot->add_option("--grid", grid, "Scan points per axis")->check(CLI::PositiveNumber);
  plot->add_option("--radius", radius, "Scan half-width in the chart")->check(CLI::PositiveNumber);

  std::vector<const char*> argv{"sbs_workbench"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const auto tol_or = [&](double d) { return sh.tol.value_or(d); };
  const auto pair_inputs = [&]() -> std::pair<Loop, Section> {
    if (!pair_file.empty()) return io::pair_from_json(io::read_json_file(pair_file));
    if (loop_file.empty() || section_file.empty())
      throw Error(ErrorKind::InvalidDocument, "need --pair or both --loop and --section");
    return {io::loop_from_json(io::read_json_file(loop_file)), io::section_from_json(io::read_json_file(section_file))};
  };

  try {
    Outcome o;
    if (sub == verify) {
      o = verify_axioms({sh.level, tol_or(1e-5), sh.seed, sections});
    } else if (sub == bs) {
      o = bs_check(sh.level, io::loop_from_json(io::read_json_file(loop_file)), tol_or(1e-6));
    } else if (sub == res) {
      const auto [loop, section] = pair_inputs();
      o = sbs_residual_check(sh.level, loop, section, tol_or(1e-6));
    } else if (sub == find) {
      FindSbsOptions fo;
      fo.tol = fo.bs_tol = tol_or(1e-6);
      fo.max_iterations = max_iter;
      o = find_sbs_command(sh.level, io::section_from_json(io::read_json_file(section_file)),
                           io::loop_from_json(io::read_json_file(loop_file)), fo);
    } else if (sub == flow) {
      FlowCommand fc{sh.level, hamiltonian, time, steps, tol_or(1e-6), worker_threads()};
      if (pair_file.empty()) {
        const SbsPair p = canonical_pair(m, SphereConfig::calibrated(sh.level));
        o = flow_command(fc, p.loop, p.section);
      } else {
        const auto [loop, section] = pair_inputs();
        o = flow_command(fc, loop, section);
      }
    } else if (sub == lift_cmd) {
      if (!delta_file.empty()) {
        const auto [v, loop] = io::lifted_from_json(io::read_json_file(delta_file));
        o = lift_command(v, loop);
      } else {
        if (loop_file.empty()) throw Error(ErrorKind::InvalidDocument, "need --delta or --loop with --f0/--g0");
        const Loop loop = io::loop_from_json(io::read_json_file(loop_file));
        const auto field = [](const std::string& e) {
          return e.empty() ? RealField() : RealField(parse_expression(e).compile());
        };
        o = lift_command(lift({field(f0), field(g0)}, loop), loop);
      }
    } else if (sub == euler) {
      o = euler_solve_command(io::series_from_json(io::read_json_file(series_file)), sigma);
    } else if (sub == fibers) {
      ScanOptions so;
      so.levels = levels;
      so.include_poles = include_poles;
      o = enumerate_fibers_command(sh.level, so);
    } else if (sub == plot) {
      o.report = header("export-plot");
      std::string name, csv;
      if (!loop_file.empty()) {
        name = "loop_trace.csv";
        csv = io::loop_trace_csv(io::loop_from_json(io::read_json_file(loop_file)));
      } else if (!hamiltonian.empty()) {
        name = "field_scan.csv";
        const AmbientPoly F = parse_expression(hamiltonian).compile();
        csv = io::field_scan_csv([&](cplx z) { return F(z); }, grid, radius);
      } else if (!section_file.empty()) {
        name = "field_scan.csv";
        const Section s = io::section_from_json(io::read_json_file(section_file));
        const SphereConfig cfg = SphereConfig::calibrated(sh.level);
        csv = io::field_scan_csv(
            [&](cplx z) {
              try {
                return log_norm(s, z, cfg);
              } catch (const Error&) {
                return std::numeric_limits<double>::quiet_NaN();
              }
            },
            grid, radius);
      } else {
        throw Error(ErrorKind::InvalidDocument, "need one of --loop, --hamiltonian, --section");
      }
      if (sh.out_dir.empty()) {
        out << csv;
        return kExitOk;
      }
      o.report["files"] = {name};
      o.artifacts.emplace_back(name, csv);
    }
    if (!sh.out_dir.empty()) detail::write_artifacts(o, command, sh.out_dir);
    out << io::dump(o.report);
    return o.code;
  } catch (const Error& e) {
    const json r = detail::error_report(command, e);
    if (!sh.out_dir.empty()) detail::write_artifacts({r, kExitFailure, {}}, command, sh.out_dir);
    out << io::dump(r);
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace sbs::cli
