#pragma once

#include <Eigen/Dense>

#include <vector>

#include "kslab/radial_field.hpp"

namespace kslab {

/// Radial solution of c = -(1/2pi) log|.| * n.
struct PotentialResult {
  RadialField c;               ///< c at cell centers, gauge fixed by the convolution formula
  std::vector<double> dc_dr;   ///< d_r c = -m(r)/(2 pi r) at the n_cells + 1 faces; 0 at r = 0
  double grad_c_inf = 0.0;     ///< max over faces of |d_r c|
  double mass = 0.0;
};

/// Cumulative-mass representation
///   c(r) = -(1/2pi) [ m(r) log r + 2pi \int_r^{r_max} n(s) s log s ds ],
/// midpoint quadrature for whole cells and exact half-cell integrals for the
/// cell containing r.  The induced kernel is symmetric in the cell masses.
/// Rejects negative densities.
PotentialResult solve_potential(const RadialField& n);

double grad_c_inf_norm(const RadialField& n);

/// Right-hand side of the direct estimate
///   |grad c|_inf <= (1/2pi) [ M + (2pi (p-1)/(p-2))^{p/(p-1)} |n|_p ],  p > 2.
double gradient_sup_bound(double mass, double p, double lp_norm_of_n);

/// Finite-volume radial Laplacian of pot.c, compared with n:
/// sum_i w_i | -Delta_h c_i - n_i |.  The outer face uses the exact flux
/// pot.dc_dr at r_max.
double poisson_residual_l1(const RadialField& n, const PotentialResult& pot);

/// Angular-mode Green operator: psi = G_ell rho solves
///   -[(1/r)(r psi')' - ell^2 psi / r^2] = rho,
/// with kernel -(1/2pi) log max(r,s) for ell = 0 and (1/(2 ell)) (r_</r_>)^ell
/// against s ds for ell >= 1.  rho may have any sign.  O(n_cells).
RadialField solve_mode_poisson(const RadialField& rho, int ell);

/// Dense symmetric kernel matrix G with psi_i = sum_j G_ij w_j rho_j, matching
/// solve_mode_poisson (and solve_potential for ell = 0) to rounding.
Eigen::MatrixXd mode_green_kernel(const RadialGrid& grid, int ell);

}  // namespace kslab
