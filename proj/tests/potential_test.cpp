#include <gtest/gtest.h>

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <numbers>

#include "kslab/error.hpp"
#include "kslab/potential.hpp"

using namespace kslab;

namespace {

RadialField gaussian(const RadialGrid& g, double scale = 1.0) {
  return RadialField::from_function(g, [&](double r) { return scale * std::exp(-0.5 * r * r); });
}

double sup_diff(const RadialField& a, const RadialField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// zero-mass source with psi = e^{-r^2}/4 solving the ell = 0 problem
double zero_mass_source(double r) { return (1.0 - r * r) * std::exp(-r * r); }

// cell i of the coarse grid is cell 3^k i + (3^k - 1)/2 of the refined one
double nested_sup_error(const RadialField& coarse, const RadialField& fine) {
  const std::size_t ratio = fine.size() / coarse.size();
  double d = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) d = std::max(d, std::abs(coarse[i] - fine[ratio * i + ratio / 2]));
  return d;
}

}  // namespace

TEST(Potential, ZeroDensity) {
  const RadialGrid g(12.0, 200);
  const auto pot = solve_potential(RadialField(g));
  EXPECT_EQ(pot.grad_c_inf, 0.0);
  for (double v : pot.c.values()) EXPECT_EQ(v, 0.0);
}

TEST(Potential, GaussianGradientAtOne) {
  const RadialGrid g(10.0, 2000);
  const auto pot = solve_potential(gaussian(g));
  ASSERT_EQ(pot.dc_dr.size(), g.size() + 1);
  // m(1) carries the midpoint error -2 pi h^2/24, since d/dr (r e^{-r^2/2}) vanishes at r = 1
  const double h = g.h();
  EXPECT_NEAR(pot.dc_dr[200], -(1.0 - std::exp(-0.5)) - h * h / 24.0, 1e-10);
  EXPECT_NEAR(pot.dc_dr[200], -0.39347, 1e-5);
  EXPECT_EQ(pot.dc_dr[0], 0.0);
}

TEST(Potential, GaussianGradientSup) {
  const RadialGrid g(10.0, 2000);
  const auto pot = solve_potential(gaussian(g));
  const auto [r_star, neg] = boost::math::tools::brent_find_minima(
      [](double r) { return -(1.0 - std::exp(-0.5 * r * r)) / r; }, 0.5, 3.0, 40);
  EXPECT_NEAR(r_star, 1.585, 1e-3);
  EXPECT_NEAR(pot.grad_c_inf, -neg, 1e-4);
  EXPECT_NEAR(pot.grad_c_inf, 0.4513, 1e-4);
  std::size_t arg = 0;
  for (std::size_t f = 0; f < pot.dc_dr.size(); ++f)
    if (std::abs(pot.dc_dr[f]) > std::abs(pot.dc_dr[arg])) arg = f;
  EXPECT_NEAR(g.face(arg), r_star, 0.01);
  EXPECT_DOUBLE_EQ(grad_c_inf_norm(gaussian(g)), pot.grad_c_inf);
}

TEST(Potential, DirectGradientBoundHolds) {
  const RadialGrid g(10.0, 2000);
  const auto n = gaussian(g, 0.3);
  const double mass = integrate(n);
  const double grad = grad_c_inf_norm(n);
  for (double p : {3.0, 4.0, 6.0}) EXPECT_LT(grad, gradient_sup_bound(mass, p, lp_norm(n, p))) << "p = " << p;
  EXPECT_THROW(gradient_sup_bound(mass, 2.0, 1.0), PreconditionError);
}

TEST(Potential, PoissonResidualIsSecondOrder) {
  auto residual = [](std::size_t cells) {
    const RadialGrid g(12.0, cells);
    const auto n = gaussian(g);
    return poisson_residual_l1(n, solve_potential(n));
  };
  const double r1 = residual(500);
  const double r2 = residual(1000);
  EXPECT_NEAR(std::log2(r1 / r2), 2.0, 0.2);
}

TEST(Potential, AttractiveAndLinear) {
  const RadialGrid g(12.0, 600);
  const auto a = solve_potential(gaussian(g));
  const auto b = solve_potential(gaussian(g, 2.0));
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    EXPECT_GE(a.c[i], a.c[i + 1]);  // non-increasing away from the mass
    EXPECT_NEAR(b.c[i], 2.0 * a.c[i], 1e-12 * (1.0 + std::abs(a.c[i])));
  }
  for (double d : a.dc_dr) EXPECT_LE(d, 0.0);
}

TEST(Potential, FarFieldIsPointMass) {
  const RadialGrid g(12.0, 2000);
  const auto pot = solve_potential(gaussian(g));
  for (std::size_t f = 0; f < pot.dc_dr.size(); ++f) {
    const double r = g.face(f);
    if (r < 10.0) continue;
    EXPECT_LE(std::abs(pot.dc_dr[f] + pot.mass / (2.0 * std::numbers::pi * r)), 1e-8);
  }
}

TEST(Potential, RejectsNegativeDensity) {
  const RadialGrid g(4.0, 10);
  auto n = gaussian(g);
  n[2] = -0.1;
  EXPECT_THROW(solve_potential(n), PreconditionError);
}

TEST(ModePoisson, ZeroModeManufacturedSolution) {
  auto error = [](std::size_t cells) {
    const RadialGrid g(8.0, cells);
    const auto psi = solve_mode_poisson(RadialField::from_function(g, zero_mass_source), 0);
    const auto exact = RadialField::from_function(g, [](double r) { return 0.25 * std::exp(-r * r); });
    return sup_diff(psi, exact);
  };
  const double e1 = error(100);
  const double e2 = error(200);
  EXPECT_LT(e2, 1e-3);
  EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
}

TEST(ModePoisson, HigherModesConvergeAtSecondOrder) {
  const auto source = [](double r) { return r * r * std::exp(-r * r); };
  for (int ell : {1, 2}) {
    auto solve = [&](std::size_t cells) {
      const RadialGrid g(8.0, cells);
      return solve_mode_poisson(RadialField::from_function(g, source), ell);
    };
    const auto ref = solve(50 * 81);
    const double e1 = nested_sup_error(solve(50), ref);
    const double e2 = nested_sup_error(solve(150), ref);
    EXPECT_NEAR(std::log(e1 / e2) / std::log(3.0), 2.0, 0.2) << "ell = " << ell;
  }
}

TEST(ModePoisson, ZeroModeMatchesPotential) {
  const RadialGrid g(12.0, 400);
  const auto n = gaussian(g);
  const auto psi = solve_mode_poisson(n, 0);
  const auto c = solve_potential(n).c;
  EXPECT_LE(sup_diff(psi, c), 1e-12);
}

TEST(ModePoisson, KernelMatchesSolver) {
  const RadialGrid g(6.0, 120);
  const auto rho = RadialField::from_function(g, [](double r) { return std::sin(3.0 * r) * std::exp(-r); });
  for (int ell : {0, 1, 3}) {
    const auto G = mode_green_kernel(g, ell);
    EXPECT_LE((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-14 * G.cwiseAbs().maxCoeff());
    Eigen::VectorXd wr(static_cast<Eigen::Index>(g.size()));
    for (std::size_t j = 0; j < g.size(); ++j) wr(static_cast<Eigen::Index>(j)) = g.weight(j) * rho[j];
    const Eigen::VectorXd psi = G * wr;
    const auto direct = solve_mode_poisson(rho, ell);
    for (std::size_t i = 0; i < g.size(); ++i)
      EXPECT_NEAR(psi(static_cast<Eigen::Index>(i)), direct[i], 1e-12) << "ell = " << ell << " i = " << i;
  }
}

TEST(ModePoisson, RejectsNegativeMode) {
  const RadialGrid g(4.0, 10);
  EXPECT_THROW(solve_mode_poisson(RadialField(g), -1), PreconditionError);
}
