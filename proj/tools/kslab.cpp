#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "kslab/config.hpp"
#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/evolution.hpp"
#include "kslab/experiments.hpp"
#include "kslab/gap_constants.hpp"
#include "kslab/linear_spectrum.hpp"
#include "kslab/steady_state.hpp"
#include "kslab/trap_constants.hpp"

namespace {

using namespace kslab;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

std::string num(double v) { return csv::format_number(v); }

void print_kv(const std::string& key, const std::string& value) { fmt::print("{}={}\n", key, value); }
void print_kv(const std::string& key, double value) { print_kv(key, num(value)); }

struct GridFlags {
  double rmax = 12.0;
  long cells = 2000;

  void add(CLI::App* app) {
    app->add_option("--rmax", rmax, "outer radius of the radial grid");
    app->add_option("--cells", cells, "number of radial cells");
  }
  RadialGrid grid() const {
    if (cells <= 0) throw PreconditionError(fmt::format("--cells must be positive, got {}", cells));
    return RadialGrid(rmax, static_cast<std::size_t>(cells));
  }
};

// "lo:hi:n" -> n geometrically spaced values from lo to hi
std::vector<double> parse_range(const std::string& spec) {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    throw PreconditionError(fmt::format("range must look like lo:hi:n, got '{}'", spec));
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw PreconditionError(fmt::format("range needs 0 < lo <= hi and n >= 1: '{}'", spec));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? lo : lo * std::pow(hi / lo, k / (n - 1.0));
  return out;
}

SteadyState steady_for(double mass, const RadialGrid& grid, const SteadyOptions& opts) {
  if (const char* env = std::getenv("KS_LAB_CACHE_DIR"); env && *env)
    return SteadyStateCache(env).get_or_solve(mass, grid, opts);
  return solve_steady_state(mass, grid, opts);
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& ext) {
  auto out = p;
  out.replace_extension(ext);
  return out;
}

// ---------------------------------------------------------------- steady

struct SteadyCmd {
  double mass = 1.0;
  double tol = 1e-10;
  double omega = 0.5;
  GridFlags grid;
  std::string out = "steady.csv";

  void add(CLI::App* app) {
    app->add_option("--mass", mass, "total mass M in (0, 8*pi)")->required()->always_capture_default(false)->default_str("");
    grid.add(app);
    app->add_option("--tol", tol, "fixed-point tolerance relative to M/(2 pi)");
    app->add_option("--omega", omega, "damping of the fixed-point update");
    app->add_option("--out", out, "CSV output (a .meta file is written alongside)");
  }

  int run() const {
    SteadyOptions opts;
    opts.tol = tol;
    opts.omega = omega;
    const auto ss = steady_for(mass, grid.grid(), opts);
    {
      csv::Writer w(out, {"r", "n_inf", "c_inf"});
      for (std::size_t i = 0; i < ss.grid().size(); ++i) w.row({ss.grid().center(i), ss.n_inf[i], ss.c_inf[i]});
    }
    write_manifest({{"mass", num(mass)},
                    {"r_max", num(ss.grid().r_max())},
                    {"n_cells", std::to_string(ss.grid().size())},
                    {"residual", num(ss.residual)},
                    {"iterations", std::to_string(ss.iterations)}},
                   sibling(out, ".meta"));
    print_kv("M", mass);
    print_kv("n_inf_sup", ss.n_inf_sup);
    print_kv("grad_c_inf_sup", ss.grad_c_inf_sup);
    print_kv("residual", ss.residual);
    print_kv("iterations", std::to_string(ss.iterations));
    return 0;
  }
};

// ---------------------------------------------------------------- constants

struct ConstantsCmd {
  std::optional<double> p;
  std::string p_sweep;
  std::optional<double> mass;
  std::string out = "constants.csv";
  std::string profile;
  unsigned jobs = 1;

  void add(CLI::App* app) {
    auto* po = app->add_option("--p", p, "integrability index p > 4 (inf allowed)");
    auto* so = app->add_option("--p-sweep", p_sweep, "geometric sweep lo:hi:n written to --out");
    po->excludes(so);
    app->add_option("--mass", mass, "mass for C0, z0, z1, z2");
    app->add_option("--out", out, "sweep CSV");
    app->add_option("--profile", profile, "write z,H samples of the trap function to this CSV (needs --p and --mass)");
    app->add_option("--jobs", jobs, "worker threads for the sweep");
  }

  int run() const {
    if (!p && p_sweep.empty()) throw PreconditionError("constants needs --p or --p-sweep");
    if (!p_sweep.empty()) {
      const auto rows = trap_sweep(parse_range(p_sweep), mass.value_or(1.0), jobs);
      write_trap_sweep_csv(rows, out);
      for (const auto& r : rows) fmt::print("p={} M0={}\n", num(r.p), num(r.m0));
      return 0;
    }
    const auto e = trap_exponents(*p);
    print_kv("p", *p);
    print_kv("sigma", e.sigma);
    print_kv("theta", e.theta);
    print_kv("kappa", kappa(e.sigma));
    print_kv("M0", mass_threshold(*p));
    print_kv("M1", limit_mass_threshold());
    if (!mass) return 0;
    const auto rep = trap_report(*mass, *p);
    print_kv("M", *mass);
    print_kv("C0", rep.c0);
    print_kv("z0", rep.roots.z0);
    print_kv("H_z0", rep.roots.h_at_z0);
    if (rep.roots.z1) {
      print_kv("z1", *rep.roots.z1);
      print_kv("H_z1", trap_function(*rep.roots.z1, *mass, *p));
      print_kv("z2", *rep.roots.z2);
      print_kv("H_z2", trap_function(*rep.roots.z2, *mass, *p));
    } else {
      print_kv("z1", "none");
    }
    if (!profile.empty()) {
      csv::Writer w(profile, {"z", "H"});
      const double top = 2.0 * (rep.roots.z2 ? *rep.roots.z2 : rep.roots.z0);
      for (int k = 0; k <= 400; ++k) {
        const double z = top * k / 400.0;
        w.row({z, trap_function(z, *mass, *p)});
      }
    }
    return 0;
  }
};

// ---------------------------------------------------------------- gap

struct GapCmd {
  std::vector<double> masses{0.2, 0.1, 0.05, 0.025, 0.0125};
  double p_trap = 10.0;
  GridFlags grid;
  std::string out = "gap.csv";
  bool with_m_star = false;
  double seed = 0.1;
  unsigned jobs = 1;

  void add(CLI::App* app) {
    app->add_option("--mass", masses, "masses to report");
    app->add_option("--p-trap", p_trap, "trap index used for C1 and C2");
    grid.add(app);
    app->add_option("--out", out, "GapReport CSV");
    app->add_flag("--m-star", with_m_star, "also locate M* by bisection");
    app->add_option("--seed", seed, "first mass probed by the M* bisection");
    app->add_option("--jobs", jobs, "worker threads for the mass sweep");
  }

  int run() const {
    const auto g = grid.grid();
    std::vector<GapReport> reports(masses.size());
    {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(masses.size())));
      for (unsigned t = 0; t < n; ++t)
        pool.emplace_back([&] {
          for (std::size_t k = next++; k < masses.size(); k = next++) reports[k] = delta_rate(masses[k], p_trap, g);
        });
    }
    write_gap_csv(reports, out);
    for (const auto& r : reports) {
      fmt::print("M={} C1={} C2={} Lambda={} sigma_opt={} C_star={} gamma={} delta={} valid={}\n", num(r.mass),
                 num(r.c1), num(r.c2), num(r.lambda), num(r.sigma_opt), num(r.c_star), num(r.gamma), num(r.delta),
                 r.valid);
      if (r.error) fmt::print(stderr, "M={}: {}\n", num(r.mass), *r.error);
    }
    if (with_m_star) {
      const auto ms = m_star(p_trap, g, seed);
      print_kv("M_star", ms.m_star);
      print_kv("M_star_saturated", ms.saturated ? "true" : "false");
    }
    return 0;
  }
};

// ---------------------------------------------------------------- spectrum

struct SpectrumCmd {
  double mass = 0.1;
  std::vector<int> ells{0, 1};
  int k = 4;
  GridFlags grid;
  std::string coupling = "full";
  std::string out = "spectrum.csv";
  std::optional<double> oscillator_sigma;

  void add(CLI::App* app) {
    app->add_option("--mass", mass, "mass of the steady state to linearize around");
    app->add_option("--ell", ells, "angular modes");
    app->add_option("--k", k, "eigenvalues kept per mode");
    grid.add(app);
    app->add_option("--coupling", coupling, "full or disabled (drops the Poisson coupling)");
    app->add_option("--out", out, "SpectrumResult CSV");
    app->add_option("--oscillator-sigma", oscillator_sigma, "only report the oscillator eigenvalues for this sigma");
  }

  int run() const {
    const auto g = grid.grid();
    if (oscillator_sigma) {
      const auto ho = harmonic_oscillator_check(*oscillator_sigma, g);
      print_kv("ev1", ho.ev1);
      print_kv("ev2", ho.ev2);
      return 0;
    }
    const bool coupled = parse_coupling(coupling) == Coupling::kFull;
    const auto ss = steady_for(mass, g, {});
    std::vector<SpectrumResult> results;
    for (int ell : ells) {
      results.push_back(spectral_gap(ss, ell, k, coupled));
      fmt::print("ell={} gap={}\n", ell, num(results.back().gap));
    }
    write_spectrum_csv(results, out);
    return 0;
  }
};

// ---------------------------------------------------------------- evolve

struct EvolveCmd {
  double mass = 0.1;
  std::string init = "gaussian:2";
  double dt = 0.0;
  double tau_end = 1.0;
  GridFlags grid;
  std::string coupling = "full";
  int sample_every = 10;
  std::string out = "run.csv";

  void add(CLI::App* app) {
    app->add_option("--mass", mass, "total mass");
    app->add_option("--init", init, "gaussian:VAR, annulus:R0,WIDTH or steady:AMP");
    app->add_option("--dt", dt, "time step (0 picks min(1e-3, half the CFL limit))");
    app->add_option("--tau-end", tau_end, "final rescaled time");
    grid.add(app);
    app->add_option("--coupling", coupling, "full or disabled");
    app->add_option("--sample-every", sample_every, "steps between samples");
    app->add_option("--out", out, "RunRecord CSV (a .manifest is written alongside)");
  }

  int run() const {
    EvolutionConfig cfg;
    cfg.mass = mass;
    cfg.init = InitialProfile::parse(init);
    cfg.dt = dt;
    cfg.tau_end = tau_end;
    cfg.grid = grid.grid();
    cfg.coupling = parse_coupling(coupling);
    cfg.sample_every = sample_every;
    SteadyOptions so;
    so.coupled = cfg.coupling == Coupling::kFull;
    cfg.reference = std::make_shared<const SteadyState>(steady_for(mass, cfg.grid, so));
    const auto rec = kslab::run(cfg);
    write_run_csv(rec, out);
    const bool ok = rec.max_mass_drift <= 1e-12 && rec.max_free_energy_increase <= 1e-9;
    write_manifest({{"mass", num(mass)},
                    {"init", cfg.init.to_string()},
                    {"dt", num(rec.dt)},
                    {"grid", fmt::format("{}:{}", num(cfg.grid.r_max()), cfg.grid.size())},
                    {"coupling", to_string(cfg.coupling)},
                    {"steps", std::to_string(rec.steps)},
                    {"max_mass_drift", num(rec.max_mass_drift)},
                    {"max_free_energy_increase", num(rec.max_free_energy_increase)},
                    {"pass", ok ? "true" : "false"}},
                   sibling(out, ".manifest"));
    print_kv("steps", std::to_string(rec.steps));
    print_kv("dt", rec.dt);
    print_kv("max_mass_drift", rec.max_mass_drift);
    print_kv("max_free_energy_increase", rec.max_free_energy_increase);
    print_kv("final_weighted_error", rec.samples.back().weighted_error);
    print_kv("pass", ok ? "true" : "false");
    return ok ? 0 : kExitAcceptance;
  }
};

// ---------------------------------------------------------------- rates

struct RatesCmd {
  double mass = 0.1;
  std::string init = "gaussian:2";
  double tau_end = 8.0;
  double dt = 0.0;
  double p_trap = 10.0;
  GridFlags grid;
  std::string out = "rates.csv";
  std::string manifest = "rates.manifest";

  void add(CLI::App* app) {
    app->add_option("--mass", mass, "total mass");
    app->add_option("--init", init, "gaussian:VAR, annulus:R0,WIDTH or steady:AMP");
    app->add_option("--tau-end", tau_end, "final rescaled time");
    app->add_option("--dt", dt, "time step (0 picks min(1e-3, half the CFL limit))");
    app->add_option("--p-trap", p_trap, "trap index used for C1 and C2");
    grid.add(app);
    app->add_option("--out", out, "RunRecord CSV");
    app->add_option("--manifest", manifest, "key=value experiment manifest");
  }

  int run() const {
    const bool guaranteed = mass < limit_mass_threshold();
    if (!guaranteed)
      fmt::print(stderr, "warning: M = {} is not below M1 = {}; running in observational mode\n", mass,
                 limit_mass_threshold());
    DecayRateOptions opts;
    opts.p_trap = p_trap;
    opts.tau_end = tau_end;
    opts.dt = dt;
    opts.grid = grid.grid();
    const auto res = decay_rate_experiment(mass, InitialProfile::parse(init), opts);
    write_run_csv(res.run, out);
    write_manifest({{"mass", num(mass)},
                    {"init", InitialProfile::parse(init).to_string()},
                    {"dt", num(res.run.dt)},
                    {"grid", fmt::format("{}:{}", num(opts.grid.r_max()), opts.grid.size())},
                    {"mode", guaranteed ? "guaranteed" : "observational"},
                    {"fit_window", fmt::format("{}:{}", num(res.fit_lo), num(res.fit_hi))},
                    {"fit_skipped", res.fit_skipped ? "true" : "false"},
                    {"fitted_rate", num(res.fit.rate)},
                    {"fit_r2", num(res.fit.r2)},
                    {"window_sensitivity", num(res.window_sensitivity)},
                    {"delta_bound", num(res.gap.delta)},
                    {"Lambda", num(res.gap.lambda)},
                    {"gamma", num(res.gap.gamma)},
                    {"gap_valid", res.gap.valid ? "true" : "false"},
                    {"inequality_holds", res.inequality_holds ? "true" : "false"},
                    {"pass", res.pass ? "true" : "false"}},
                   manifest);
    print_kv("fitted_rate", res.fit.rate);
    print_kv("fit_r2", res.fit.r2);
    print_kv("delta_bound", res.gap.delta);
    print_kv("pass", res.pass ? "true" : "false");
    return guaranteed && !res.pass ? kExitAcceptance : 0;
  }
};

// ---------------------------------------------------------------- bifurcation

struct BifurcationCmd {
  std::string range = "0.05:20:16";
  GridFlags grid;
  std::string out = "bifurcation.csv";
  unsigned jobs = 1;

  void add(CLI::App* app) {
    app->add_option("--mass-range", range, "geometric mass sweep lo:hi:n");
    grid.add(app);
    app->add_option("--out", out, "CSV with M,n_inf_sup,grad_c_inf_sup,n_inf_l2,error");
    app->add_option("--jobs", jobs, "worker threads");
  }

  int run() const {
    const auto entries = bifurcation_sweep(parse_range(range), grid.grid(), {}, jobs);
    csv::Writer w(out, {"M", "n_inf_sup", "grad_c_inf_sup", "n_inf_l2", "error"});
    int failures = 0;
    for (const auto& e : entries) {
      w.raw_row({num(e.mass), num(e.n_inf_sup), num(e.grad_c_inf_sup), num(e.n_inf_l2), e.error.value_or("")});
      fmt::print("M={} n_inf_sup={} grad_c_inf_sup={}{}\n", num(e.mass), num(e.n_inf_sup), num(e.grad_c_inf_sup),
                 e.error ? " error=" + *e.error : "");
      failures += e.error ? 1 : 0;
    }
    return failures ? kExitNumerical : 0;
  }
};

// Inserts `--key=value` for every config-file entry right after the subcommand
// token, so flags given on the command line (parsed later) take precedence.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_pos = args.size();
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (auto* s = app.get_subcommand_no_throw(args[i])) {
      sub_pos = i;
      sub = s;
      break;
    }
  }
  if (!sub) return args;
  std::optional<std::string> path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::vector<std::string> extra;
  for (const auto& e : config::parse_file(*path)) {
    if (e.key == "config" || !sub->get_option_no_throw("--" + e.key))
      throw PreconditionError(fmt::format("{}:{}: unknown key '{}' for '{}'", *path, e.line, e.key, sub->get_name()));
    extra.push_back(fmt::format("--{}={}", e.key, e.value));
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Keller-Segel laboratory: steady states, decay constants, spectra and evolution runs"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  SteadyCmd steady;
  ConstantsCmd constants;
  GapCmd gap;
  SpectrumCmd spectrum;
  EvolveCmd evolve;
  RatesCmd rates;
  BifurcationCmd bifurcation;
  constants.jobs = gap.jobs = bifurcation.jobs = hw;

  std::map<CLI::App*, std::function<int()>> actions;
  std::string config_path;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    auto* sub = app.add_subcommand(name, help);
    cmd.add(sub);
    sub->add_option("--config", config_path, "key=value file; command-line flags override it");
    actions[sub] = [&cmd] { return cmd.run(); };
  };
  add("steady", "solve for the steady state at one mass", steady);
  add("constants", "trap constants and the mass threshold M0(p)", constants);
  add("gap", "spectral-gap bound chain and decay rate delta(M)", gap);
  add("spectrum", "eigenvalues of the linearized operator per angular mode", spectrum);
  add("evolve", "time-step the rescaled equation and write the run record", evolve);
  add("rates", "fit the decay rate of a run and compare with delta(M)", rates);
  add("bifurcation", "steady-state norms along a mass sweep", bifurcation);
  // vector options keep all values given on the command line
  for (auto* sub : {app.get_subcommand("gap"), app.get_subcommand("spectrum")})
    for (auto* opt : sub->get_options())
      if (opt->get_name() == "--mass" || opt->get_name() == "--ell")
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(app, std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  } catch (const PreconditionError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalid;
  }

  try {
    for (auto& [sub, action] : actions)
      if (sub->parsed()) return action();
  } catch (const PreconditionError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalid;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitInvalid;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kExitNumerical;
  }
  return kExitInvalid;
}
