#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kslab/radial_field.hpp"
#include "kslab/steady_state.hpp"

namespace kslab {

/// Default p-grid for minimizing the gradient bound.
inline const std::vector<double> kGradientPGrid{2.25, 2.5, 3.0, 4.0, 6.0, 10.0, 20.0, 40.0};

/// Bound on |n(tau)|_{p_norm} for original time t >= 1/2 (tau >= log(2)/2):
/// 4^{1 - 1/p} M^{1/p} z1^{1 - 1/p}.  Throws PreconditionError if the trap fails.
double c1_bound(double mass, double p_norm, double p_trap);

struct GradientBound {
  double value = 0.0;   ///< bound on |grad c|_inf
  double p_best = 0.0;  ///< grid point attaining it
};

/// (1/2pi) min_p [M + (2pi (p-1)/(p-2))^{p/(p-1)} C1(M, p)] over `p_grid` (each p > 2).
GradientBound c2_bound(double mass, double p_trap, const std::vector<double>& p_grid = kGradientPGrid);

struct LambdaResult {
  double lambda = 0.0;
  double sigma_opt = 0.0;
};

/// max over sigma in (1, 2) of 2/sigma - 1 - sigma^2 G^2 / (4 (sigma^2 - 1)) - N/2,
/// with G = |grad c_inf|_inf and N = |n_inf|_inf, by golden section.
LambdaResult lambda_gap(double grad_c_sup, double n_sup);
LambdaResult lambda_gap(const SteadyState& ss);

/// (1/sqrt(pi)) M^{1/4} |n_inf|_2^{1/2} |n_inf|_inf^{1/4}.
double c_star(double mass, double n_l2, double n_sup);
double c_star(const SteadyState& ss);

struct GapReport {
  double mass = 0.0;
  double p_trap = 10.0;
  double c1 = kInfinity;
  double c1_p = 0.0;  ///< the norm index C1 refers to
  double c2 = kInfinity;
  double lambda = 0.0;
  double sigma_opt = 0.0;
  double c_star = 0.0;
  double gamma = kInfinity;
  double delta = 0.0;
  bool lambda_positive = false;
  bool valid = false;
  /// C1 and C2 bound the solution only after this rescaled time.
  double tail_from_tau = 0.0;
  std::optional<std::string> error;
};

/// Assembles steady state, Lambda, C*, C1, C2, gamma = (C* + 2 C2)/sqrt(Lambda)
/// and delta = Lambda (1 - gamma).  When Lambda <= 0, gamma is reported as inf
/// and delta as Lambda.  Failures are recorded in `error` with valid = false.
GapReport delta_rate(double mass, double p_trap, const RadialGrid& grid, const SteadyOptions& opts = {});
GapReport delta_rate(const SteadyState& ss, double p_trap);

struct MStarResult {
  double m_star = 0.0;
  bool saturated = false;  ///< delta > 0 up to M1, so M* = M1
  int evaluations = 0;
};

/// Largest M <= M1 with a valid report and delta > 0, by bisection to 1e-4.
/// `seed` is the first mass probed inside the bracket.
MStarResult m_star(double p_trap, const RadialGrid& grid, double seed = 0.1, const SteadyOptions& opts = {});

/// Columns M,C1,C2,Lambda,sigma_opt,C_star,gamma,delta,valid.
void write_gap_csv(const std::vector<GapReport>& reports, const std::filesystem::path& path);

}  // namespace kslab
