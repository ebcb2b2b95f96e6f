#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kslab/radial_field.hpp"

namespace kslab {

inline constexpr double kCriticalMass = 4.0 * kTwoPi;  // 8 pi

/// Stationary pair (n_inf, c_inf) of the rescaled system at mass M.
struct SteadyState {
  double mass = 0.0;
  RadialField n_inf;
  RadialField c_inf;
  double n_inf_sup = 0.0;       ///< |n_inf|_inf
  double n_inf_l2 = 0.0;        ///< |n_inf|_2
  double grad_c_inf_sup = 0.0;  ///< |grad c_inf|_inf
  double residual = 0.0;        ///< last fixed-point update, sup norm
  int iterations = 0;
  bool coupled = true;          ///< false: the c = 0 (Ornstein-Uhlenbeck) reference

  const RadialGrid& grid() const { return n_inf.grid(); }
};

struct SteadyOptions {
  double omega = 0.5;   ///< damping in (0, 1]
  double tol = 1e-10;   ///< stop when sup|n^{k+1} - n^k| <= tol * M / (2 pi)
  int max_iterations = 200000;
  bool coupled = true;  ///< false returns the normalized discrete Gaussian
};

/// Damped fixed point n <- (1 - omega) n + omega G(n) with
/// G(n) = M exp(c[n] - r^2/2) / \int exp(c[n] - r^2/2) dx, started from the
/// small-mass Gaussian.  Throws PreconditionError unless 0 < M < 8 pi and
/// NumericalError (with the residual trace) on non-convergence.
SteadyState solve_steady_state(double mass, const RadialGrid& grid, const SteadyOptions& opts = {});

/// The fixed-point map G applied once; exposed for residual checks.
RadialField steady_map(double mass, const RadialField& n);

/// Rebuilds the derived norms and c_inf from a density profile.
SteadyState make_steady_state(double mass, RadialField n_inf, double residual, int iterations, bool coupled = true);

struct BifurcationEntry {
  double mass = 0.0;
  double n_inf_sup = 0.0;
  double grad_c_inf_sup = 0.0;
  double n_inf_l2 = 0.0;
  std::optional<std::string> error;  ///< solver failure for this entry
};

/// One record per mass; failures are recorded per entry.  `jobs` > 1 solves
/// entries concurrently.
std::vector<BifurcationEntry> bifurcation_sweep(const std::vector<double>& masses, const RadialGrid& grid,
                                                const SteadyOptions& opts = {}, unsigned jobs = 1);

/// On-disk cache of steady states keyed by (M, r_max, n_cells):
/// `steady_M<mass>_R<rmax>_N<ncells>.csv` (columns r,n_inf,c_inf) plus a `.meta`
/// sidecar with mass=, residual=, iterations= lines.  Files are written to a
/// temporary name and renamed, so concurrent writers of distinct keys are
/// safe and the last writer of a key wins.
class SteadyStateCache {
 public:
  explicit SteadyStateCache(std::filesystem::path dir);
  /// Directory from KS_LAB_CACHE_DIR, or `fallback` when unset.
  static SteadyStateCache from_environment(const std::filesystem::path& fallback = ".kslab_cache");

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path csv_path(double mass, const RadialGrid& grid) const;
  std::filesystem::path meta_path(double mass, const RadialGrid& grid) const;

  std::optional<SteadyState> load(double mass, const RadialGrid& grid) const;
  void store(const SteadyState& ss) const;
  /// Cached state if present and converged to opts.tol, otherwise solve and store.
  SteadyState get_or_solve(double mass, const RadialGrid& grid, const SteadyOptions& opts = {}) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace kslab
