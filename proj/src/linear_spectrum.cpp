#include "kslab/linear_spectrum.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/potential.hpp"

namespace kslab {

namespace {

double bernoulli(double x) {
  if (std::abs(x) < 1e-12) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

void check_ell(int ell) {
  if (ell < 0) throw PreconditionError(fmt::format("angular mode must be >= 0, got {}", ell));
}

std::vector<double> lowest(const Eigen::VectorXd& ev, int k) {
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  out.resize(std::min<std::size_t>(out.size(), static_cast<std::size_t>(std::max(k, 0))));
  return out;
}

// Radial -(1/r)(r u')' + (ell^2/r^2 + V) u with zero flux at both ends,
// symmetrized by the cell weights: returns diagonal and off-diagonal.
void oscillator_tridiagonal(double sigma, const RadialGrid& g, int ell, Eigen::VectorXd& diag, Eigen::VectorXd& off) {
  const auto N = static_cast<Eigen::Index>(g.size());
  diag.resize(N);
  off.resize(N - 1);
  const double l2 = static_cast<double>(ell) * ell;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double r = g.center(static_cast<std::size_t>(i));
    diag(i) = l2 / (r * r) + r * r / (4.0 * sigma * sigma);
  }
  for (Eigen::Index f = 1; f < N; ++f) {
    const auto fs = static_cast<std::size_t>(f);
    const double k = kTwoPi * g.face(fs) / g.h();
    const double wl = g.weight(fs - 1);
    const double wr = g.weight(fs);
    diag(f - 1) += k / wl;
    diag(f) += k / wr;
    off(f - 1) = -k / std::sqrt(wl * wr);
  }
}

}  // namespace

ModeOperator assemble_mode(const SteadyState& ss, int ell, bool coupled) {
  check_ell(ell);
  const auto& g = ss.grid();
  const auto N = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd d(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto is = static_cast<std::size_t>(i);
    if (!(ss.n_inf[is] > 0.0))
      throw PreconditionError(fmt::format("linearization needs n_inf > 0, found {} at r = {}", ss.n_inf[is], g.center(is)));
    d(i) = std::sqrt(ss.n_inf[is] * g.weight(is));
  }

  ModeOperator op{ell, coupled, Eigen::MatrixXd::Zero(N, N), Eigen::MatrixXd::Identity(N, N)};
  const double l2 = static_cast<double>(ell) * ell;
  for (Eigen::Index i = 0; i < N; ++i) {
    const double r = g.center(static_cast<std::size_t>(i));
    op.schrodinger(i, i) = l2 / (r * r);
  }
  for (Eigen::Index f = 1; f < N; ++f) {
    const auto fs = static_cast<std::size_t>(f);
    // mobility of the linearized exponential-fitted flux
    const double x = std::log(ss.n_inf[fs]) - std::log(ss.n_inf[fs - 1]);
    const double k = kTwoPi * g.face(fs) / g.h() * ss.n_inf[fs] * bernoulli(x);
    op.schrodinger(f - 1, f - 1) += k / (d(f - 1) * d(f - 1));
    op.schrodinger(f, f) += k / (d(f) * d(f));
    op.schrodinger(f - 1, f) = -k / (d(f - 1) * d(f));
    op.schrodinger(f, f - 1) = op.schrodinger(f - 1, f);
  }
  if (coupled) op.overlap.noalias() -= d.asDiagonal() * mode_green_kernel(g, ell) * d.asDiagonal();
  return op;
}

SpectrumResult spectral_gap(const SteadyState& ss, int ell, int k_eigs, bool coupled) {
  if (k_eigs < 1) throw PreconditionError("need at least one eigenvalue");
  const auto op = assemble_mode(ss, ell, coupled);
  Eigen::LLT<Eigen::MatrixXd> chol(op.overlap);
  if (chol.info() != Eigen::Success)
    throw NumericalError(fmt::format("free-energy Hessian is not positive definite at M = {}, ell = {}", ss.mass, ell));
  const Eigen::MatrixXd L = chol.matrixL();
  const Eigen::MatrixXd sym = L.transpose() * op.schrodinger * L;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError(fmt::format("eigensolver did not converge at M = {}, ell = {}", ss.mass, ell));

  SpectrumResult out;
  out.mass = ss.mass;
  out.ell = ell;
  out.coupled = coupled;
  out.r_max = ss.grid().r_max();
  out.n_cells = ss.grid().size();
  out.eigenvalues = lowest(es.eigenvalues(), k_eigs + (ell == 0 ? 1 : 0));
  const auto all = lowest(es.eigenvalues(), 2);
  if (ell == 0) {
    // the mass mode sits at zero; its size is a rounding-level multiple of the largest eigenvalue
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(std::abs(all[0]) <= 1e-9 * scale))
      throw NumericalError(fmt::format("mass mode eigenvalue {} is not at zero", all[0]));
    out.gap = all[1];
  } else {
    out.gap = all[0];
  }
  return out;
}

std::vector<double> oscillator_mode_eigenvalues(double sigma, const RadialGrid& grid, int ell, int k) {
  if (!(sigma > 0.0)) throw PreconditionError(fmt::format("oscillator width must be positive, got {}", sigma));
  check_ell(ell);
  Eigen::VectorXd diag, off;
  oscillator_tridiagonal(sigma, grid, ell, diag, off);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver did not converge");
  return lowest(es.eigenvalues(), k);
}

OscillatorEigen harmonic_oscillator_check(double sigma, const RadialGrid& grid) {
  return {oscillator_mode_eigenvalues(sigma, grid, 0, 1).front(), oscillator_mode_eigenvalues(sigma, grid, 1, 1).front()};
}

void write_spectrum_csv(const std::vector<SpectrumResult>& results, const std::filesystem::path& path) {
  csv::Writer out(path, {"M", "ell", "index", "eigenvalue"});
  for (const auto& r : results)
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
      out.row({r.mass, static_cast<double>(r.ell), static_cast<double>(k), r.eigenvalues[k]});
}

}  // namespace kslab
