#include "kslab/potential.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "kslab/error.hpp"

namespace kslab {

namespace {

// \int_a^b s log s ds
double s_log_s(double a, double b) {
  auto prim = [](double s) { return s > 0.0 ? 0.5 * s * s * std::log(s) - 0.25 * s * s : 0.0; };
  return prim(b) - prim(a);
}

// Self-interaction of cell i with itself, per unit density, for the mode-ell kernel
// (the cell's exact integral of the kink at s = r_i).
double self_term(const RadialGrid& g, std::size_t i, int ell) {
  const double r = g.center(i);
  const double a = g.face(i);
  const double b = g.face(i + 1);
  if (ell == 0) {
    return -(0.5 * (r * r - a * a) * std::log(r) + s_log_s(r, b));
  }
  const double l = static_cast<double>(ell);
  const double inner = (std::pow(r, l + 2.0) - std::pow(a, l + 2.0)) / ((l + 2.0) * std::pow(r, l));
  const double outer = ell == 2 ? r * r * std::log(b / r)
                                : std::pow(r, l) * (std::pow(b, 2.0 - l) - std::pow(r, 2.0 - l)) / (2.0 - l);
  return (inner + outer) / (2.0 * l);
}

void check_mode(int ell) {
  if (ell < 0) throw PreconditionError(fmt::format("angular mode must be >= 0, got {}", ell));
}

std::vector<double> mode_potential(const RadialGrid& g, std::span<const double> rho, int ell) {
  const std::size_t N = g.size();
  std::vector<double> psi(N, 0.0);
  if (ell == 0) {
    // psi_i = -(1/2pi) [ log r_i sum_{j<i} w_j rho_j + sum_{j>i} w_j rho_j log r_j ] + self
    std::vector<double> tail(N + 1, 0.0);
    for (std::size_t j = N; j-- > 0;) tail[j] = tail[j + 1] + g.weight(j) * rho[j] * std::log(g.center(j));
    double inner = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      psi[i] = -(inner * std::log(g.center(i)) + tail[i + 1]) / kTwoPi + rho[i] * self_term(g, i, 0);
      inner += g.weight(i) * rho[i];
    }
    return psi;
  }
  const double l = static_cast<double>(ell);
  std::vector<double> tail(N + 1, 0.0);
  for (std::size_t j = N; j-- > 0;) tail[j] = tail[j + 1] + g.weight(j) * rho[j] * std::pow(g.center(j), -l);
  double inner = 0.0;
  const double k = 1.0 / (2.0 * kTwoPi * l);
  for (std::size_t i = 0; i < N; ++i) {
    const double r = g.center(i);
    psi[i] = k * (inner * std::pow(r, -l) + tail[i + 1] * std::pow(r, l)) + rho[i] * self_term(g, i, ell);
    inner += g.weight(i) * rho[i] * std::pow(r, l);
  }
  return psi;
}

}  // namespace

PotentialResult solve_potential(const RadialField& n) {
  const auto& g = n.grid();
  auto m = face_mass(n);  // rejects negative cells
  PotentialResult out{RadialField(g, mode_potential(g, n.values(), 0)), std::vector<double>(g.size() + 1, 0.0),
                      0.0, m.back()};
  for (std::size_t f = 1; f <= g.size(); ++f) {
    out.dc_dr[f] = -m[f] / (kTwoPi * g.face(f));
    out.grad_c_inf = std::max(out.grad_c_inf, std::abs(out.dc_dr[f]));
  }
  return out;
}

double grad_c_inf_norm(const RadialField& n) { return solve_potential(n).grad_c_inf; }

double gradient_sup_bound(double mass, double p, double lp_norm_of_n) {
  if (!(p > 2.0)) throw PreconditionError(fmt::format("gradient bound needs p > 2, got {}", p));
  const double holder = std::pow(kTwoPi * (p - 1.0) / (p - 2.0), p / (p - 1.0));
  return (mass + holder * lp_norm_of_n) / kTwoPi;
}

double poisson_residual_l1(const RadialField& n, const PotentialResult& pot) {
  require_same_grid(n, pot.c);
  const auto& g = n.grid();
  const std::size_t N = g.size();
  const double h = g.h();
  auto flux = [&](std::size_t f) {
    if (f == 0) return 0.0;
    if (f == N) return g.face(N) * pot.dc_dr[N];
    return g.face(f) * (pot.c[f] - pot.c[f - 1]) / h;
  };
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double lap = (flux(i + 1) - flux(i)) / (g.center(i) * h);
    s += g.weight(i) * std::abs(-lap - n[i]);
  }
  return s;
}

RadialField solve_mode_poisson(const RadialField& rho, int ell) {
  check_mode(ell);
  return RadialField(rho.grid(), mode_potential(rho.grid(), rho.values(), ell));
}

Eigen::MatrixXd mode_green_kernel(const RadialGrid& g, int ell) {
  check_mode(ell);
  const auto N = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd G(N, N);
  const double l = static_cast<double>(ell);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double ri = g.center(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      const double rj = g.center(static_cast<std::size_t>(j));
      const double v = ell == 0 ? -std::log(ri) / kTwoPi : std::pow(rj / ri, l) / (2.0 * kTwoPi * l);
      G(i, j) = v;
      G(j, i) = v;
    }
    G(i, i) = self_term(g, static_cast<std::size_t>(i), ell) / g.weight(static_cast<std::size_t>(i));
  }
  return G;
}

}  // namespace kslab
