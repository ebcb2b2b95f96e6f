#pragma once

#include <filesystem>
#include <optional>
#include <vector>

namespace kslab {

/// Sharp Hardy-Littlewood-Sobolev constant for the pair (4/3, 4) in 2D.
inline constexpr double kHlsConstant = 3.5449077018110318;  // 2 sqrt(pi)

/// Exponents of the trap estimate for the integrability index p > 4
/// (p = inf is the limiting case sigma = 4/3, theta = 5/4).
struct TrapExponents {
  double p = 0.0;
  double sigma = 0.0;  ///< 4p / (3p - 4)
  double theta = 0.0;  ///< 5/4 - 1/p
  double beta = 0.0;   ///< 1/p + 3/4, the power of M in C0
};

TrapExponents trap_exponents(double p);

/// L^sigma norm of a first derivative of the heat kernel at t = 1, sigma in [1, 2].
double kappa(double sigma);

/// C0 = (2 kappa C_HLS / pi) M^beta sigma / (2 - sigma).
double trap_c0(double mass, double p);

/// H(z, M) = z - C0 z^theta - M / (2 pi).
double trap_function(double z, double mass, double p);

struct TrapRoots {
  double z0 = 0.0;       ///< argmax of H, (C0 theta)^{1/(1 - theta)}
  double h_at_z0 = 0.0;  ///< H(z0), from the closed form
  std::optional<double> z1;  ///< smaller positive root
  std::optional<double> z2;  ///< larger root
};

/// z0 in closed form; when H(z0) > 0 both roots by bisection to rounding level.
TrapRoots trap_roots(double mass, double p);

/// Closed-form maximum (theta - 1)/theta (C0 theta)^{1/(1 - theta)} - M / (2 pi).
double trap_maximum(double mass, double p);

/// M0(p): the mass where the trap maximum changes sign, by bisection to 1e-8.
/// Throws NumericalError if the sampled maximum is not strictly decreasing in M.
double mass_threshold(double p);

/// Direct solve of H(z0(M), M) = 0, which is a power law in M.
double mass_threshold_closed_form(double p);

/// M1 = lim_{p -> inf} M0(p), evaluated at sigma = 4/3, theta = 5/4.
double limit_mass_threshold();

/// C(p, M) = M^{1/p_norm} z1^{1 - 1/p_norm}, the constant in |u(t)|_p <= C t^{-(1 - 1/p_norm)}.
/// Throws PreconditionError when the trap has no root at (M, p_trap).
double lp_decay_constant(double p_norm, double mass, double p_trap);

struct TrapReport {
  double p = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
  double kappa_sigma = 0.0;
  double c_hls = kHlsConstant;
  double mass = 0.0;
  double c0 = 0.0;
  TrapRoots roots;
};

TrapReport trap_report(double mass, double p);

struct TrapSweepRow {
  double p = 0.0;
  double sigma = 0.0;
  double theta = 0.0;
  double kappa = 0.0;
  double c0_at_mass = 0.0;
  double m0 = 0.0;
};

std::vector<TrapSweepRow> trap_sweep(const std::vector<double>& ps, double mass, unsigned jobs = 1);

/// Columns p,sigma,theta,kappa,C0_at_M,M0.
void write_trap_sweep_csv(const std::vector<TrapSweepRow>& rows, const std::filesystem::path& path);

}  // namespace kslab
