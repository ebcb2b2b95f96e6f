#include "kslab/steady_state.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/potential.hpp"

namespace kslab {

namespace {

void check_mass(double mass) {
  if (!(mass > 0.0) || !(mass < kCriticalMass))
    throw PreconditionError(fmt::format("mass must lie in (0, 8*pi) = (0, {:.6f}), got {}", kCriticalMass, mass));
}

// M exp(phi) / \int exp(phi) dx, evaluated with the max of phi shifted out
std::vector<double> boltzmann(double mass, const RadialGrid& g, const std::vector<double>& phi) {
  const double top = *std::max_element(phi.begin(), phi.end());
  std::vector<double> e(phi.size());
  double z = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    e[i] = std::exp(phi[i] - top);
    z += g.weight(i) * e[i];
  }
  for (auto& v : e) v *= mass / z;
  return e;
}

std::vector<double> confinement(const RadialGrid& g) {
  std::vector<double> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) phi[i] = -0.5 * g.center(i) * g.center(i);
  return phi;
}

}  // namespace

RadialField steady_map(double mass, const RadialField& n) {
  const auto& g = n.grid();
  auto phi = confinement(g);
  const auto pot = solve_potential(n);
  for (std::size_t i = 0; i < g.size(); ++i) phi[i] += pot.c[i];
  return RadialField(g, boltzmann(mass, g, phi));
}

SteadyState make_steady_state(double mass, RadialField n_inf, double residual, int iterations, bool coupled) {
  auto pot = solve_potential(n_inf);
  SteadyState ss{mass, n_inf, coupled ? pot.c : RadialField(n_inf.grid()), 0.0, 0.0, 0.0, residual, iterations,
                 coupled};
  ss.n_inf_sup = lp_norm(n_inf, kInfinity);
  ss.n_inf_l2 = lp_norm(n_inf, 2.0);
  ss.grad_c_inf_sup = coupled ? pot.grad_c_inf : 0.0;
  return ss;
}

SteadyState solve_steady_state(double mass, const RadialGrid& grid, const SteadyOptions& opts) {
  check_mass(mass);
  if (!(opts.tol > 0.0)) throw PreconditionError("steady-state tolerance must be positive");
  if (!(opts.omega > 0.0 && opts.omega <= 1.0)) throw PreconditionError("damping omega must lie in (0, 1]");

  RadialField n(grid, boltzmann(mass, grid, confinement(grid)));
  if (!opts.coupled) return make_steady_state(mass, n, 0.0, 0, false);

  const double target = opts.tol * mass / kTwoPi;
  std::deque<double> trace;
  double residual = kInfinity;
  for (int k = 1; k <= opts.max_iterations; ++k) {
    const auto next = steady_map(mass, n);
    residual = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = (1.0 - opts.omega) * n[i] + opts.omega * next[i];
      residual = std::max(residual, std::abs(v - n[i]));
      n[i] = v;
    }
    trace.push_back(residual);
    if (trace.size() > 8) trace.pop_front();
    if (!std::isfinite(residual)) break;
    if (residual <= target) return make_steady_state(mass, n, residual, k, true);
  }
  std::string tail;
  for (double r : trace) tail += fmt::format(" {:.3e}", r);
  throw NumericalError(fmt::format("steady state at M = {} did not reach tol {:.1e} in {} iterations; last residuals:{}",
                                   mass, opts.tol, opts.max_iterations, tail));
}

std::vector<BifurcationEntry> bifurcation_sweep(const std::vector<double>& masses, const RadialGrid& grid,
                                                const SteadyOptions& opts, unsigned jobs) {
  std::vector<BifurcationEntry> out(masses.size());
  auto solve_one = [&](std::size_t k) {
    out[k].mass = masses[k];
    try {
      const auto ss = solve_steady_state(masses[k], grid, opts);
      out[k].n_inf_sup = ss.n_inf_sup;
      out[k].grad_c_inf_sup = ss.grad_c_inf_sup;
      out[k].n_inf_l2 = ss.n_inf_l2;
    } catch (const std::exception& e) {
      out[k].error = e.what();
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(masses.size())));
  if (jobs == 1) {
    for (std::size_t k = 0; k < masses.size(); ++k) solve_one(k);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < masses.size(); k = next++) solve_one(k);
    });
  pool.clear();
  return out;
}

SteadyStateCache::SteadyStateCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

SteadyStateCache SteadyStateCache::from_environment(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("KS_LAB_CACHE_DIR"); env && *env) return SteadyStateCache(env);
  return SteadyStateCache(fallback);
}

std::filesystem::path SteadyStateCache::csv_path(double mass, const RadialGrid& grid) const {
  return dir_ / fmt::format("steady_M{}_R{}_N{}.csv", mass, grid.r_max(), grid.size());
}

std::filesystem::path SteadyStateCache::meta_path(double mass, const RadialGrid& grid) const {
  auto p = csv_path(mass, grid);
  p.replace_extension(".meta");
  return p;
}

std::optional<SteadyState> SteadyStateCache::load(double mass, const RadialGrid& grid) const {
  const auto csv_file = csv_path(mass, grid);
  const auto meta_file = meta_path(mass, grid);
  if (!std::filesystem::exists(csv_file) || !std::filesystem::exists(meta_file)) return std::nullopt;
  std::map<std::string, std::string> meta;
  std::ifstream in(meta_file);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!meta.contains("residual") || !meta.contains("iterations")) return std::nullopt;
  const auto table = csv::read(csv_file);
  if (table.rows.size() != grid.size()) return std::nullopt;
  std::vector<double> v;
  v.reserve(grid.size());
  const auto col = table.column("n_inf");
  for (const auto& row : table.rows) v.push_back(row[col]);
  return make_steady_state(mass, RadialField(grid, std::move(v)), std::stod(meta["residual"]),
                           std::stoi(meta["iterations"]));
}

void SteadyStateCache::store(const SteadyState& ss) const {
  std::filesystem::create_directories(dir_);
  const auto csv_file = csv_path(ss.mass, ss.grid());
  const auto meta_file = meta_path(ss.mass, ss.grid());
  // unique temporary names per writer; rename is atomic within a directory
  thread_local std::mt19937_64 rng(std::random_device{}());
  const auto tag = fmt::format(".tmp{:016x}", rng());
  auto tmp_csv = csv_file;
  tmp_csv += tag;
  auto tmp_meta = meta_file;
  tmp_meta += tag;
  {
    csv::Writer out(tmp_csv, {"r", "n_inf", "c_inf"});
    for (std::size_t i = 0; i < ss.grid().size(); ++i) out.row({ss.grid().center(i), ss.n_inf[i], ss.c_inf[i]});
  }
  {
    std::ofstream out(tmp_meta);
    out << "mass=" << csv::format_number(ss.mass) << '\n'
        << "residual=" << csv::format_number(ss.residual) << '\n'
        << "iterations=" << ss.iterations << '\n';
  }
  std::filesystem::rename(tmp_csv, csv_file);
  std::filesystem::rename(tmp_meta, meta_file);
}

SteadyState SteadyStateCache::get_or_solve(double mass, const RadialGrid& grid, const SteadyOptions& opts) const {
  if (opts.coupled) {
    if (auto hit = load(mass, grid); hit && hit->residual <= opts.tol * mass / kTwoPi) return *hit;
  }
  auto ss = solve_steady_state(mass, grid, opts);
  if (opts.coupled) store(ss);
  return ss;
}

}  // namespace kslab
