#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kslab/evolution.hpp"
#include "kslab/gap_constants.hpp"

namespace kslab {

struct FitResult {
  double rate = 0.0;  ///< -slope / 2 of log(error) against tau
  double r2 = 1.0;
  std::size_t points = 0;
};

/// Least-squares fit of log(error) = a - 2 rate tau on samples with tau in [lo, hi].
/// Throws PreconditionError on non-positive errors or fewer than two samples.
FitResult fit_decay_rate(const std::vector<double>& tau, const std::vector<double>& error, double lo, double hi);
FitResult fit_decay_rate(const RunRecord& record, double lo, double hi);

struct DecayRateResult {
  RunRecord run;
  GapReport gap;
  FitResult fit;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double window_sensitivity = 0.0;  ///< max relative rate change when fit_lo moves by +-20% of the window
  bool fit_skipped = false;         ///< the run started (and stayed) at the steady state
  bool inequality_holds = false;    ///< e(tau) <= e(lo) exp(-2 delta (tau - lo)) on the window
  bool guaranteed = false;          ///< the gap report is valid with delta > 0
  bool pass = false;
};

struct DecayRateOptions {
  double p_trap = 10.0;
  double tau_end = 8.0;
  double dt = 0.0;
  RadialGrid grid{12.0, 2000};
  double window_start = 0.4;  ///< fit window is [window_start tau_end, tau_end]
};

/// Runs the full chain at mass M from `init`: steady state, gap report, evolution
/// with the weighted error and a decay-rate fit on the window.
DecayRateResult decay_rate_experiment(double mass, const InitialProfile& init, const DecayRateOptions& opts = {});

struct TrapCheck {
  double sup_t_u_inf = 0.0;
  double z1 = 0.0;
  bool passed = false;  ///< sup_t_u_inf <= z1 (1 + 1e-6)
};

struct LpDecayResult {
  double mass = 0.0;
  double p = 0.0;
  double measured_sup = 0.0;  ///< sup over samples of t^{1-1/p} |u(t)|_p
  double bound = 0.0;         ///< M^{1/p} z1^{1-1/p}
  double final_value = 0.0;   ///< t^{1-1/p} |u(t)|_p at tau_end
  double limit = 0.0;         ///< 2^{-(1-1/p)} |n_inf|_p
  std::vector<std::pair<double, double>> series;  ///< (t, t^{1-1/p} |u(t)|_p)
  TrapCheck trap;
  RunRecord run;
  bool bound_ok = false;
  bool limit_ok = false;  ///< final value within 5% of the limit
};

LpDecayResult lp_decay_experiment(double mass, double p, const InitialProfile& init, const RadialGrid& grid,
                                  double tau_end, double p_trap = 10.0);

/// Sup over sampled tau of the distance sqrt(\int (n_a - n_b)^2 / n_ref dx)
/// between the runs of `config` at time steps dt and dt/2.  n_ref is the
/// steady state of the config's coupling.
double uniqueness_probe(const EvolutionConfig& config, double dt);

/// Writes `key=value` lines in order.
void write_manifest(const std::vector<std::pair<std::string, std::string>>& entries, const std::filesystem::path& path);

}  // namespace kslab
