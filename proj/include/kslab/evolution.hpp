#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kslab/radial_field.hpp"
#include "kslab/steady_state.hpp"

namespace kslab {

enum class Coupling { kFull, kDisabled };

Coupling parse_coupling(std::string_view s);
std::string to_string(Coupling c);

/// Named initial data, always normalized to the run's mass on the grid.
struct InitialProfile {
  enum class Kind { kGaussian, kAnnulus, kSteadyPerturbation };

  Kind kind = Kind::kGaussian;
  double a = 2.0;  ///< gaussian: variance sigma^2; annulus: r0; steady: tilt amplitude
  double b = 0.0;  ///< annulus: width

  static InitialProfile gaussian(double variance);
  static InitialProfile annulus(double r0, double width);
  /// n_inf exp(-amplitude r^2/2), renormalized; amplitude 0 is n_inf itself.
  static InitialProfile steady_perturbation(double amplitude);
  /// "gaussian:2", "annulus:3,0.5", "steady:0.1".
  static InitialProfile parse(std::string_view text);
  std::string to_string() const;
};

/// Builds the initial density.  The steady perturbation needs `reference`.
RadialField make_initial(const InitialProfile& init, double mass, const RadialGrid& grid,
                         const SteadyState* reference = nullptr);

struct EvolutionConfig {
  double mass = 1.0;
  InitialProfile init = InitialProfile::gaussian(2.0);
  double dt = 0.0;  ///< 0 selects min(1e-3, 0.5 dt_cfl) from the initial drift
  double tau_end = 1.0;
  RadialGrid grid{12.0, 2000};
  Coupling coupling = Coupling::kFull;
  int sample_every = 10;
  /// When set, samples carry the weighted error \int (n - n_inf)^2 / n_inf dx.
  std::shared_ptr<const SteadyState> reference;
};

struct Diagnostics {
  double mass = 0.0;
  double free_energy = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double grad_c_inf = 0.0;
  double weighted_error = std::numeric_limits<double>::quiet_NaN();
};

struct EvolutionState {
  double tau = 0.0;
  RadialField n;
  Diagnostics diag;
};

struct Sample {
  double tau = 0.0;
  double t_original = 0.0;
  double mass = 0.0;
  double free_energy = 0.0;
  double weighted_error = std::numeric_limits<double>::quiet_NaN();
  double linf_n = 0.0;
  double l2_n = 0.0;
  double l3_n = 0.0;
  double grad_c_inf = 0.0;
  double linf_u_times_t = 0.0;  ///< t |u(t)|_inf in original variables
};

struct RunRecord {
  EvolutionConfig config;
  double dt = 0.0;
  long steps = 0;
  std::vector<Sample> samples;
  double max_mass_drift = 0.0;            ///< max_k |mass_k - M| / M
  double max_free_energy_increase = 0.0;  ///< max_k (F_{k+1} - F_k), 0 if monotone
  double min_value = 0.0;                 ///< smallest cell value seen

  // filled in by the experiments layer
  double fitted_rate = std::numeric_limits<double>::quiet_NaN();
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double fit_r2 = std::numeric_limits<double>::quiet_NaN();
};

/// F[n] = \int n log n + \int (r^2/2) n - (1/2) \int n c  (0 log 0 = 0); the
/// interaction term is dropped when the coupling is disabled.
double free_energy(const RadialField& n, Coupling coupling);

/// Largest stable explicit-drift step h / max|U| for the current state, with
/// face drift U = d_r(c - r^2/2).
double cfl_limit(const RadialField& n, Coupling coupling);

/// One step of length dt: Scharfetter-Gummel face fluxes for
/// d_tau n = (1/r) d_r ( r [d_r n - n U] ), zero flux at r = 0 and r = r_max,
/// potential evaluated at the start of the step and the resulting linear
/// tridiagonal system solved implicitly.  Throws PreconditionError when dt
/// exceeds the CFL limit or n < 0, NumericalError when the new state has
/// values below -1e-14 M/(2 pi).
EvolutionState step(const EvolutionState& state, double dt, Coupling coupling = Coupling::kFull);

Diagnostics diagnose(const RadialField& n, Coupling coupling, const SteadyState* reference = nullptr);

using Observer = std::function<void(const EvolutionState&)>;

/// Integrates to tau_end with a fixed step, sampling every `sample_every`
/// steps (plus the initial and final states).  `observer` sees each sample.
RunRecord run(const EvolutionConfig& config, const Observer& observer = {});

/// Columns tau,t_original,mass,free_energy,weighted_error,linf_n,l2_n,linf_u_times_t.
void write_run_csv(const RunRecord& record, const std::filesystem::path& path);

struct OriginalVariables {
  double t = 0.0;
  double R = 1.0;
  RadialField u;                  ///< u = n / R^2 on the grid stretched by R
  std::map<double, double> lp_u;  ///< p -> |u|_p for p in {1, 2, 3, inf}
};

/// u(x,t) = R^{-2} n(x/R, tau) with R = e^tau, t = (e^{2 tau} - 1)/2.
OriginalVariables to_original_variables(const EvolutionState& state);

double original_time(double tau);
double rescaled_time(double t);

/// Exact relaxation of the decoupled equation from a centered Gaussian of
/// variance s0: M exp(-r^2/(2 s)) / (2 pi s), s = 1 + (s0 - 1) e^{-2 tau}.
RadialField ornstein_uhlenbeck_solution(double mass, double variance0, double tau, const RadialGrid& grid);

}  // namespace kslab
