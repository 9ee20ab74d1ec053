#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ciw/config.hpp"
#include "ciw/decay.hpp"
#include "ciw/identities.hpp"
#include "ciw/instanton.hpp"
#include "ciw/reeb.hpp"
#include "ciw/rng.hpp"

using namespace ciw;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Globals {
  std::string config_path;
  std::string out = ".";
  std::uint64_t seed = 1;
  int threads = 0;  // advisory; commands choose their own internal widths
};

std::string opath(const Globals& g, const std::string& name) {
  return (std::filesystem::path(g.out) / name).string();
}

Triad load_triad(const Config& cfg, const std::string& cli_id) {
  std::string id = cli_id.empty() ? cfg.str("triad") : cli_id;
  try {
    return Triad::from_id(id);
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad triad id: ") + e.what());
  }
}

CylinderGrid load_grid(const Config& cfg) {
  CylinderGrid g;
  g.L = cfg.num("grid.L", 1.0);
  g.ntau = static_cast<int>(cfg.integer("grid.ntau", 33));
  g.nt = static_cast<int>(cfg.integer("grid.nt", 32));
  if (!(g.L > 0.0) || g.ntau < 3 || g.nt < 4)
    throw UsageError("grid requires L > 0, ntau >= 3, nt >= 4");
  return g;
}

Vec load_point(const Triad& T, const Config& cfg, const std::string& key,
               std::uint64_t seed) {
  if (!cfg.has(key)) {
    CounterRng rng(seed, 5);
    return T.sample_point(rng);
  }
  std::vector<double> xs = cfg.num_list(key);
  if (static_cast<int>(xs.size()) != T.dim())
    throw UsageError("config key '" + key + "': expected " +
                     std::to_string(T.dim()) + " coordinates");
  Vec p(T.dim());
  for (int i = 0; i < T.dim(); ++i) p[i] = xs[i];
  return T.project_point(p);
}

SolveOptions load_solver(const Config& cfg) {
  SolveOptions opt;
  std::string method = cfg.str("solver.method", "gauss-newton");
  if (method == "gauss-newton")
    opt.method = SolveOptions::kGaussNewton;
  else if (method == "gradient-descent")
    opt.method = SolveOptions::kGradientDescent;
  else
    throw UsageError("solver.method must be gauss-newton or gradient-descent");
  opt.max_iter = static_cast<int>(cfg.integer("solver.max_iters", 60));
  if (opt.max_iter < 0) throw UsageError("solver.max_iters must be >= 0");
  opt.tol_grad = cfg.num("solver.tol_grad", 1e-10);
  opt.tol_f = cfg.num("solver.tol_f", 1e-22);
  opt.cg_max_iter = static_cast<int>(cfg.integer("solver.cg_max_iters", 800));
  opt.cg_tol = cfg.num("solver.cg_tol", 1e-10);
  return opt;
}

// initial field: "oracle" (flat model exact solution) or "orbit" (Reeb
// trajectory cylinder flow(p0, -Q tau + T t)), plus an optional seeded
// interior perturbation of amplitude solve.perturb
MapField load_initial(const Triad& T, const Config& cfg, const CylinderGrid& g,
                      std::uint64_t seed) {
  std::string kind = cfg.str("solve.init", T.constrained() ? "orbit" : "oracle");
  MapField f;
  if (kind == "oracle") {
    if (T.constrained())
      throw UsageError("solve.init = oracle requires the flat model triad");
    f = oracle_flat(g, cfg.num("solve.eps", 0.3), cfg.num("solve.kappa", 0.2));
  } else if (kind == "orbit") {
    double Q = cfg.num("solve.Q", 0.0);
    double Tact = cfg.num("solve.T");
    Vec p0 = load_point(T, cfg, "solve.p0", seed);
    f.grid = g;
    f.triad_id = T.id();
    f.w.resize(g.size());
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nt; ++j)
        f.at(i, j) = T.flow(p0, -Q * g.tau(i) + Tact * g.t(j));
  } else {
    throw UsageError("solve.init must be oracle or orbit");
  }
  double amp = cfg.num("solve.perturb", 0.0);
  if (amp != 0.0) {
    CounterRng rng(seed, 9);
    for (int i = 1; i < g.ntau - 1; ++i)
      for (int j = 0; j < g.nt; ++j) {
        Vec p = f.at(i, j);
        for (int d = 0; d < T.dim(); ++d) p[d] += amp * rng.sym();
        f.at(i, j) = T.project_point(p);
      }
  }
  return f;
}

OrbitResult load_orbit(const Triad& T, const Config& cfg, std::uint64_t seed) {
  double period = cfg.num("orbit.period");
  if (!(period > 0.0)) throw UsageError("orbit.period must be > 0");
  Vec guess = load_point(T, cfg, "orbit.p0", seed);
  return find_closed_orbit(T, guess, period);
}

void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "key,value\n";
  char buf[128];
  for (const auto& [k, v] : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g\n", k.c_str(), v);
    os << buf;
  }
}

int cmd_triad_info(const Globals& gl, const Config& cfg,
                   const std::string& cli_id) {
  Triad T = load_triad(cfg, cli_id);
  int npoints = static_cast<int>(cfg.integer("triad.npoints", 40));
  double step = cfg.num("triad.step", 1e-4);
  double tol = cfg.num("triad.tol", 1e-4);
  AxiomReport rep = T.axiom_check(npoints, step, gl.seed);
  write_kv_csv(opath(gl, "triad_info.csv"), rep.entries);
  for (const auto& [name, r] : rep.entries)
    std::printf("%-28s %.3e\n", name.c_str(), r);
  bool ok = rep.max_residual < tol;
  std::printf("triad %s: max residual %.3e (tol %.1e) -> %s\n",
              T.id().c_str(), rep.max_residual, tol, ok ? "pass" : "FAIL");
  return ok ? 0 : 4;
}

int cmd_solve(const Globals& gl, const Config& cfg, const std::string& cli_id) {
  Triad T = load_triad(cfg, cli_id);
  CylinderGrid g = load_grid(cfg);
  SolveOptions opt = load_solver(cfg);
  MapField init = load_initial(T, cfg, g, gl.seed);
  InstantonProblem prob(T, init);
  SolveResult sr = prob.solve(opt);
  write_history_csv(sr.history, opath(gl, "history.csv"));
  save_field(sr.field, opath(gl, "solution.field"));
  EnergyReport en = energies(T, sr.field);
  write_kv_csv(opath(gl, "solve_summary.csv"),
               {{"converged", sr.converged ? 1.0 : 0.0},
                {"iters", static_cast<double>(sr.history.size())},
                {"F", sr.F},
                {"grad_norm", sr.gnorm},
                {"e_total", en.e_total},
                {"e_dbar", en.e_dbar},
                {"T", en.T},
                {"Q", en.Q}});
  std::printf("solve %s %dx%d: %s, F %.6e, |grad| %.3e, %zu iterations\n",
              T.id().c_str(), g.ntau, g.nt, sr.message.c_str(), sr.F, sr.gnorm,
              sr.history.size());
  return sr.converged ? 0 : 3;
}

int cmd_orbits(const Globals& gl, const Config& cfg, const std::string& cli_id) {
  Triad T = load_triad(cfg, cli_id);
  OrbitResult orb = load_orbit(T, cfg, gl.seed);
  if (!orb.found) {
    std::fprintf(stderr, "orbit search did not converge (residual %.3e)\n",
                 orb.residual);
    return 3;
  }
  ReturnMap rm = return_map(T, orb);
  write_kv_csv(opath(gl, "orbit.csv"),
               {{"period", orb.period},
                {"residual", orb.residual},
                {"iters", static_cast<double>(orb.iters)},
                {"det", rm.det},
                {"floquet_margin", rm.floquet_margin},
                {"unit_eigenvalues", static_cast<double>(rm.unit_eigenvalues)}});
  std::printf(
      "orbit on %s: period %.12g, residual %.3e, floquet margin %.6g, "
      "%d unit eigenvalue(s)\n",
      T.id().c_str(), orb.period, orb.residual, rm.floquet_margin,
      rm.unit_eigenvalues);
  return 0;
}

int cmd_spectrum(const Globals& gl, const Config& cfg,
                 const std::string& cli_id) {
  Triad T = load_triad(cfg, cli_id);
  OrbitResult orb = load_orbit(T, cfg, gl.seed);
  if (!orb.found) {
    std::fprintf(stderr, "orbit search did not converge (residual %.3e)\n",
                 orb.residual);
    return 3;
  }
  int nsamples = static_cast<int>(cfg.integer("spectrum.nsamples", 128));
  int substeps = static_cast<int>(cfg.integer("spectrum.substeps", 4));
  if (nsamples < 8) throw UsageError("spectrum.nsamples must be >= 8");
  AzSpectrum sp = assemble_az_spectrum(T, orb, nsamples, substeps);
  {
    std::ofstream os(opath(gl, "spectrum.csv"));
    if (!os) throw std::runtime_error("cannot write spectrum.csv");
    os << "index,eigenvalue\n";
    char buf[64];
    for (size_t k = 0; k < sp.eigs.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", k, sp.eigs[k]);
      os << buf;
    }
  }
  KernelReport kr = kernel_correspondence(T, orb, nsamples);
  write_kv_csv(opath(gl, "spectrum_summary.csv"),
               {{"gap", sp.gap()},
                {"holonomy_angle", sp.holonomy_angle},
                {"sym_defect", sp.sym_defect},
                {"near_kernel", static_cast<double>(kr.near_kernel)},
                {"unit_floquet", static_cast<double>(kr.unit_floquet)},
                {"kernel_consistent", kr.consistent ? 1.0 : 0.0}});
  std::printf(
      "spectrum on %s: gap %.9g, holonomy %.9g, near-kernel %d "
      "(return map agrees: %s)\n",
      T.id().c_str(), sp.gap(), sp.holonomy_angle, kr.near_kernel,
      kr.consistent ? "yes" : "NO");
  return kr.consistent ? 0 : 4;
}

int cmd_decay(const Globals& gl, const Config& cfg, const std::string& cli_id) {
  Triad T = load_triad(cfg, cli_id);
  MapField f;
  if (cfg.has("decay.input")) {
    f = load_field(cfg.str("decay.input"));
    if (f.triad_id != T.id())
      throw UsageError("decay.input was saved for triad " + f.triad_id);
  } else {
    CylinderGrid g = load_grid(cfg);
    double Q = cfg.num("decay.Q", 0.0);
    double Tact = cfg.num("decay.T");
    Vec p0 = load_point(T, cfg, "decay.p0", gl.seed);
    f.grid = g;
    f.triad_id = T.id();
    f.w.resize(g.size());
    for (int i = 0; i < g.ntau; ++i)
      for (int j = 0; j < g.nt; ++j)
        f.at(i, j) = T.flow(p0, -Q * g.tau(i) + Tact * g.t(j));
  }
  double gamma = cfg.num("decay.gamma", 0.4);
  DecayReport rep = analyze_decay(T, f, gamma);
  write_decay_csv(rep, opath(gl, "decay.csv"));
  write_kv_csv(
      opath(gl, "decay_summary.csv"),
      {{"delta_fit", rep.delta_fit},
       {"r2", rep.r2},
       {"Q_limit", rep.Q_limit},
       {"T_limit", rep.T_limit},
       {"gamma", rep.gamma_used},
       {"violations", static_cast<double>(rep.three_interval_violations.size())}});
  std::printf(
      "decay on %s: delta_fit %.6g (r2 %.6f), Q -> %.9g, T -> %.9g, "
      "%zu three-interval violation(s)\n",
      T.id().c_str(), rep.delta_fit, rep.r2, rep.Q_limit, rep.T_limit,
      rep.three_interval_violations.size());
  return 0;
}

int cmd_verify(const Globals& gl, const Config& cfg, const std::string& cli_id) {
  Triad T = load_triad(cfg, cli_id);
  std::vector<int> ns = cfg.int_list("verify.resolutions", {16, 24, 32});
  for (int n : ns)
    if (n < 8) throw UsageError("verify.resolutions entries must be >= 8");
  auto reports = run_identity_suite(T.id(), ns, gl.seed);
  write_identity_csv(reports, ns, opath(gl, "identities.csv"));
  for (const auto& r : reports) {
    std::printf("%-22s order %6.3f (expected %.1f) finest %.3e -> %s  %s\n",
                r.name.c_str(), r.order, r.expected_order,
                r.residuals.empty() ? 0.0 : r.residuals.back(),
                r.pass ? "pass" : "FAIL", r.note.c_str());
  }
  bool ok = suite_pass(reports);
  std::printf("identity suite on %s: %s\n", T.id().c_str(),
              ok ? "all pass" : "FAILURES");
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  Globals gl;
  CLI::App app{"contact-instanton workbench"};
  app.require_subcommand(1);
  app.add_option("--config", gl.config_path, "config file (key = value lines)");
  app.add_option("--out", gl.out, "output directory");
  app.add_option("--seed", gl.seed, "random seed");
  app.add_option("--threads", gl.threads, "advisory worker thread count");

  std::string cli_id;
  std::vector<std::pair<CLI::App*, int (*)(const Globals&, const Config&,
                                           const std::string&)>>
      cmds;
  auto add = [&](const char* name, const char* desc, auto fn) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();  // accept global flags after the subcommand
    sub->add_option("--triad", cli_id, "triad id (overrides config)");
    cmds.emplace_back(sub, fn);
  };
  add("triad-info", "run the axiom suite on a triad", &cmd_triad_info);
  add("solve", "solve the instanton system on a truncated cylinder",
      &cmd_solve);
  add("orbits", "locate a closed Reeb orbit and its return map", &cmd_orbits);
  add("spectrum", "asymptotic operator spectrum of a closed orbit",
      &cmd_spectrum);
  add("decay", "window energies, three-interval check, tail decay fit",
      &cmd_decay);
  add("verify", "run the geometric identity suite over resolutions",
      &cmd_verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Config cfg = gl.config_path.empty() ? Config{}
                                        : Config::from_file(gl.config_path);
    std::filesystem::create_directories(gl.out);
    for (auto& [sub, fn] : cmds)
      if (sub->parsed()) return fn(gl, cfg, cli_id);
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
