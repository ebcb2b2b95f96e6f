#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

#include "kslab/radial_field.hpp"
#include "kslab/steady_state.hpp"

namespace kslab {

/// Mode-ell linearization around n_inf in symmetric form.  With
/// D = diag(sqrt(n_inf w)), the density perturbation x = w rho evolves as
/// x' = -A H x, where A is the weighted stiffness (face mobility from the
/// Scharfetter-Gummel flux, plus ell^2 n_inf / r^2) and H = D^{-2} - G the
/// Hessian of the free energy.  `schrodinger` = D^{-1} A D^{-1} and
/// `overlap` = I - D G D, so the spectrum is that of schrodinger * overlap.
struct ModeOperator {
  int ell = 0;
  bool coupled = true;
  Eigen::MatrixXd schrodinger;
  Eigen::MatrixXd overlap;
};

/// Throws PreconditionError when n_inf is not strictly positive or ell < 0.
ModeOperator assemble_mode(const SteadyState& ss, int ell, bool coupled = true);

struct SpectrumResult {
  double mass = 0.0;
  int ell = 0;
  bool coupled = true;
  std::vector<double> eigenvalues;  ///< smallest few, ascending; ell = 0 includes the mass mode
  double gap = 0.0;                 ///< smallest nonzero eigenvalue (mass-constrained for ell = 0)
  double r_max = 0.0;
  std::size_t n_cells = 0;
};

/// Dense symmetric eigensolve of the mode operator; `k_eigs` eigenvalues are kept.
SpectrumResult spectral_gap(const SteadyState& ss, int ell, int k_eigs = 4, bool coupled = true);

struct OscillatorEigen {
  double ev1 = 0.0;  ///< ground state, ell = 0
  double ev2 = 0.0;  ///< first excited state, ell = 1
};

/// Lowest two eigenvalues of -Delta + r^2 / (4 sigma^2) in the plane.
OscillatorEigen harmonic_oscillator_check(double sigma, const RadialGrid& grid);

/// Lowest `k` eigenvalues of the mode-ell oscillator block alone.
std::vector<double> oscillator_mode_eigenvalues(double sigma, const RadialGrid& grid, int ell, int k);

/// Columns M,ell,index,eigenvalue.
void write_spectrum_csv(const std::vector<SpectrumResult>& results, const std::filesystem::path& path);

}  // namespace kslab
