#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/radial_field.hpp"
#include "kslab/trap_constants.hpp"

using namespace kslab;
namespace bq = boost::math::quadrature;

namespace {

// L^sigma norm of d_1 of the 2D heat kernel at t = 1, integrated in polar coordinates
double kappa_by_quadrature(double sigma) {
  bq::tanh_sinh<double> angular;
  bq::exp_sinh<double> radial;
  const double ang = 4.0 * angular.integrate([&](double phi) { return std::pow(std::cos(phi), sigma); }, 0.0,
                                             std::numbers::pi / 2.0);
  const double rad = radial.integrate(
      [&](double r) { return r > 0.0 ? std::exp((sigma + 1.0) * std::log(r) - sigma * r * r / 4.0) : 0.0; }, 0.0,
      std::numeric_limits<double>::infinity());
  return std::pow(ang * rad, 1.0 / sigma) / (8.0 * std::numbers::pi);
}

}  // namespace

TEST(Kappa, EndpointValues) {
  EXPECT_NEAR(kappa(1.0), 1.0 / std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_NEAR(kappa(4.0 / 3.0), 0.2281, 1e-4);
  EXPECT_THROW(kappa(0.5), PreconditionError);
  EXPECT_THROW(kappa(2.5), PreconditionError);
}

TEST(Kappa, MatchesTwoDimensionalQuadrature) {
  for (double s : {1.0, 4.0 / 3.0, 1.35, 1.4, 1.5, 1.6, 1.75, 1.8, 1.99}) {
    const double q = kappa_by_quadrature(s);
    EXPECT_NEAR(kappa(s), q, 1e-8 * q) << "sigma = " << s;
  }
}

TEST(TrapExponents, Identities) {
  for (double p : {4.5, 5.0, 10.0, 100.0, 1e8}) {
    const auto e = trap_exponents(p);
    EXPECT_NEAR(e.sigma, 4.0 * p / (3.0 * p - 4.0), 1e-14);
    EXPECT_NEAR(e.theta, 1.25 - 1.0 / p, 1e-15);
    EXPECT_NEAR(e.beta, 1.0 / p + 0.75, 1e-15);
    EXPECT_NEAR(1.0 / e.sigma, 0.75 - 1.0 / p, 1e-14);
    EXPECT_NEAR(e.theta, 2.0 - e.beta, 1e-15);
  }
  const auto lim = trap_exponents(kInfinity);
  EXPECT_DOUBLE_EQ(lim.sigma, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(lim.theta, 1.25);
  EXPECT_THROW(trap_exponents(4.0), PreconditionError);
  EXPECT_THROW(trap_exponents(3.0), PreconditionError);
}

TEST(TrapExponents, KernelTimeIntegral) {
  // t \int_0^t (t-s)^{1/sigma - 3/2} (t+s)^{1/p - 5/4} ds = sigma / (2 - sigma),
  // integrated in v = t - s so the singular endpoint sits at zero
  bq::tanh_sinh<double> ts;
  for (double p : {5.0, 10.0, 40.0}) {
    const auto e = trap_exponents(p);
    for (double t : {0.5, 1.0, 2.0}) {
      const double v = t * ts.integrate(
                               [&](double v) {
                                 return std::pow(v, 1.0 / e.sigma - 1.5) * std::pow(2.0 * t - v, 1.0 / p - 1.25);
                               },
                               0.0, t);
      EXPECT_NEAR(v, e.sigma / (2.0 - e.sigma), 1e-8 * v) << "p = " << p << " t = " << t;
    }
  }
}

TEST(TrapFunction, ShapeAndMaximum) {
  const double M = 0.1, p = 10.0;
  EXPECT_DOUBLE_EQ(trap_function(0.0, M, p), -M / (2.0 * std::numbers::pi));
  const auto roots = trap_roots(M, p);
  EXPECT_NEAR(trap_maximum(M, p), trap_function(roots.z0, M, p), 1e-12 * std::max(1.0, roots.z0));
  EXPECT_DOUBLE_EQ(roots.h_at_z0, trap_maximum(M, p));
  // increasing before z0 and decreasing after
  for (double f : {0.1, 0.5, 0.9}) {
    EXPECT_LT(trap_function(f * roots.z0, M, p), trap_function(roots.z0, M, p));
    EXPECT_LT(trap_function(roots.z0 / f, M, p), trap_function(roots.z0, M, p));
  }
  EXPECT_THROW(trap_function(-1.0, M, p), PreconditionError);
}

TEST(TrapRoots, ResidualsAtRoundingLevel) {
  for (double M : {0.1, 0.3, 0.6}) {
    const auto r = trap_roots(M, 10.0);
    ASSERT_TRUE(r.z1 && r.z2) << "M = " << M;
    EXPECT_LT(*r.z1, r.z0);
    EXPECT_GT(*r.z2, r.z0);
    EXPECT_LE(std::abs(trap_function(*r.z1, M, 10.0)), 1e-14);
    // H carries terms of size z, so the residual at the large root scales with it
    EXPECT_LE(std::abs(trap_function(*r.z2, M, 10.0)), 1e-14 * std::max(1.0, *r.z2));
  }
}

TEST(TrapRoots, SmallMassAsymptotics) {
  const double M = 1e-3;
  const auto r = trap_roots(M, 10.0);
  ASSERT_TRUE(r.z1);
  EXPECT_NEAR(*r.z1, M / (2.0 * std::numbers::pi), 0.01 * M / (2.0 * std::numbers::pi));
  // z1 -> 0 and z0 -> inf as M -> 0
  const auto smaller = trap_roots(M / 10.0, 10.0);
  EXPECT_LT(*smaller.z1, *r.z1);
  EXPECT_GT(smaller.z0, r.z0);
}

TEST(TrapRoots, NoRootsAboveThreshold) {
  const double m0 = mass_threshold(10.0);
  const auto r = trap_roots(1.05 * m0, 10.0);
  EXPECT_LE(r.h_at_z0, 0.0);
  EXPECT_FALSE(r.z1);
  EXPECT_FALSE(r.z2);
  EXPECT_TRUE(trap_roots(0.95 * m0, 10.0).z1);
}

TEST(MassThreshold, LimitValue) {
  EXPECT_NEAR(mass_threshold(1e8), 0.822663, 1e-4);
  EXPECT_NEAR(limit_mass_threshold(), 0.822663, 1e-4);
}

TEST(MassThreshold, ClosedFormAgrees) {
  for (double p : {5.0, 10.0, 100.0, 1e8, kInfinity})
    EXPECT_NEAR(mass_threshold(p), mass_threshold_closed_form(p), 1e-6) << "p = " << p;
}

TEST(MassThreshold, IncreasingInP) {
  const double a = mass_threshold(5.0), b = mass_threshold(10.0), c = mass_threshold(100.0), d = mass_threshold(1e8);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(c, d);
}

TEST(MassThreshold, CloseToFour) {
  // the trap maximum overflows at small M here
  for (double p : {4.01, 4.1, 4.5})
    EXPECT_NEAR(mass_threshold(p), mass_threshold_closed_form(p), 1e-6 * mass_threshold_closed_form(p)) << "p = " << p;
}

TEST(LpDecayConstant, LimitingIndices) {
  const double M = 0.2;
  const auto r = trap_roots(M, 10.0);
  EXPECT_DOUBLE_EQ(lp_decay_constant(1.0, M, 10.0), M);
  EXPECT_DOUBLE_EQ(lp_decay_constant(kInfinity, M, 10.0), *r.z1);
  EXPECT_NEAR(lp_decay_constant(2.0, M, 10.0), std::sqrt(M * *r.z1), 1e-15);
  EXPECT_LT(lp_decay_constant(2.0, M / 2.0, 10.0), lp_decay_constant(2.0, M, 10.0));
  EXPECT_THROW(lp_decay_constant(2.0, 2.0, 10.0), PreconditionError);
  EXPECT_THROW(lp_decay_constant(0.5, M, 10.0), PreconditionError);
}

TEST(TrapSweep, RowsAndCsv) {
  const std::vector<double> ps{5.0, 10.0, 100.0};
  const auto rows = trap_sweep(ps, 0.1, 2);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t k = 0; k < ps.size(); ++k) {
    EXPECT_EQ(rows[k].p, ps[k]);
    EXPECT_DOUBLE_EQ(rows[k].m0, mass_threshold(ps[k]));
    EXPECT_DOUBLE_EQ(rows[k].c0_at_mass, trap_c0(0.1, ps[k]));
  }
  const auto path = std::filesystem::temp_directory_path() / "kslab_trap.csv";
  write_trap_sweep_csv(rows, path);
  const auto t = csv::read(path);
  EXPECT_EQ(t.header, (std::vector<std::string>{"p", "sigma", "theta", "kappa", "C0_at_M", "M0"}));
  EXPECT_EQ(t.rows.size(), 3u);
  std::filesystem::remove(path);
}
