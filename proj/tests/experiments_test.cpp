#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "kslab/error.hpp"
#include "kslab/experiments.hpp"

using namespace kslab;

namespace {

const RadialGrid kFast(10.0, 1000);

DecayRateOptions fast_options() {
  DecayRateOptions o;
  o.grid = kFast;
  return o;
}

}  // namespace

TEST(Fit, ExactExponential) {
  std::vector<double> tau, err;
  for (int k = 0; k <= 40; ++k) {
    tau.push_back(0.1 * k);
    err.push_back(7.0 * std::exp(-1.6 * tau.back()));
  }
  const auto f = fit_decay_rate(tau, err, 0.0, 4.0);
  EXPECT_NEAR(f.rate, 0.8, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_EQ(f.points, 41u);
  // the rate ignores the prefactor
  for (auto& e : err) e *= 1e-5;
  EXPECT_NEAR(fit_decay_rate(tau, err, 0.0, 4.0).rate, 0.8, 1e-12);
}

TEST(Fit, PerturbedExponential) {
  std::vector<double> tau, err;
  for (int k = 0; k <= 100; ++k) {
    tau.push_back(0.05 * k);
    err.push_back(std::exp(-2.0 * tau.back()) * (1.0 + 0.01 * std::sin(7.0 * tau.back())));
  }
  const auto f = fit_decay_rate(tau, err, 0.0, 5.0);
  EXPECT_NEAR(f.rate, 1.0, 1e-2);
  EXPECT_GT(f.r2, 0.999);
}

TEST(Fit, ConstantSeries) {
  const std::vector<double> tau{0.0, 1.0, 2.0}, err{3.0, 3.0, 3.0};
  EXPECT_EQ(fit_decay_rate(tau, err, 0.0, 2.0).rate, 0.0);
}

TEST(Fit, RejectsDegenerateWindows) {
  const std::vector<double> tau{0.0, 1.0, 2.0};
  EXPECT_THROW(fit_decay_rate(tau, {1.0, 0.0, 0.5}, 0.0, 2.0), PreconditionError);
  EXPECT_THROW(fit_decay_rate(tau, {1.0, 0.5, 0.2}, 1.5, 2.0), PreconditionError);
  EXPECT_THROW(fit_decay_rate(tau, {1.0, 0.5}, 0.0, 2.0), PreconditionError);
}

TEST(DecayRate, GuaranteedMassPasses) {
  const auto r = decay_rate_experiment(0.1, InitialProfile::gaussian(2.0), fast_options());
  EXPECT_TRUE(r.guaranteed);
  EXPECT_FALSE(r.fit_skipped);
  EXPECT_GE(r.fit.r2, 0.999);
  EXPECT_GE(r.fit.rate, r.gap.delta);
  EXPECT_TRUE(r.inequality_holds);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.window_sensitivity, 0.05);
  EXPECT_EQ(r.run.fitted_rate, r.fit.rate);
}

TEST(DecayRate, SmallMassRateIsTwo) {
  const auto r = decay_rate_experiment(0.01, InitialProfile::gaussian(2.0), fast_options());
  EXPECT_NEAR(r.fit.rate, 2.0, 0.2);
}

TEST(DecayRate, SteadyStartSkipsFit) {
  const auto r = decay_rate_experiment(0.1, InitialProfile::steady_perturbation(0.0), fast_options());
  EXPECT_TRUE(r.fit_skipped);
  EXPECT_TRUE(r.pass);
}

TEST(DecayRate, RejectsBadWindow) {
  auto o = fast_options();
  o.window_start = 1.0;
  EXPECT_THROW(decay_rate_experiment(0.1, InitialProfile::gaussian(2.0), o), PreconditionError);
}

TEST(LpDecay, MassIsConstant) {
  const auto r = lp_decay_experiment(0.2, 1.0, InitialProfile::gaussian(2.0), kFast, 2.0);
  for (const auto& [t, v] : r.series) EXPECT_NEAR(v, 0.2, 1e-12) << "t = " << t;
  EXPECT_DOUBLE_EQ(r.bound, 0.2);
}

TEST(LpDecay, SupNormTrapAndLimit) {
  const auto r = lp_decay_experiment(0.2, kInfinity, InitialProfile::gaussian(2.0), kFast, 8.0);
  EXPECT_TRUE(r.trap.passed) << r.trap.sup_t_u_inf << " vs " << r.trap.z1;
  EXPECT_TRUE(r.bound_ok);
  EXPECT_TRUE(r.limit_ok) << r.final_value << " vs " << r.limit;
  const auto ss = solve_steady_state(0.2, kFast);
  EXPECT_NEAR(r.limit, 0.5 * ss.n_inf_sup, 1e-15);
}

TEST(LpDecay, L2BoundAndLimit) {
  const auto r = lp_decay_experiment(0.2, 2.0, InitialProfile::gaussian(2.0), kFast, 8.0);
  EXPECT_TRUE(r.bound_ok);
  EXPECT_TRUE(r.limit_ok);
  EXPECT_THROW(lp_decay_experiment(0.9, 2.0, InitialProfile::gaussian(2.0), kFast, 1.0), PreconditionError);
}

TEST(Uniqueness, Deterministic) {
  EvolutionConfig cfg;
  cfg.mass = 0.1;
  cfg.grid = RadialGrid(12.0, 400);
  cfg.dt = 1e-3;
  cfg.tau_end = 0.5;
  std::vector<RadialField> a, b;
  run(cfg, [&](const EvolutionState& s) { a.push_back(s.n); });
  run(cfg, [&](const EvolutionState& s) { b.push_back(s.n); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) ASSERT_EQ(a[k][i], b[k][i]);
}

TEST(Uniqueness, FirstOrderInTime) {
  // the data must have finite distance in L^2(1/n_inf), so its tail is lighter than e^{-r^2/4}
  EvolutionConfig cfg;
  cfg.mass = 0.1;
  cfg.init = InitialProfile::gaussian(1.5);
  cfg.grid = RadialGrid(12.0, 400);
  cfg.tau_end = 1.0;
  cfg.sample_every = 50;
  const double d1 = uniqueness_probe(cfg, 2e-3);
  const double d2 = uniqueness_probe(cfg, 1e-3);
  EXPECT_GT(d2, 0.0);
  EXPECT_NEAR(d1 / d2, 2.0, 0.3);
}

TEST(Uniqueness, OrnsteinUhlenbeckAgainstExact) {
  EvolutionConfig cfg;
  cfg.mass = 1.0;
  cfg.coupling = Coupling::kDisabled;
  cfg.grid = RadialGrid(8.0, 1600);
  cfg.tau_end = 1.0;
  auto err = [&](double dt) {
    cfg.dt = dt;
    RadialField last(cfg.grid);
    run(cfg, [&](const EvolutionState& s) { last = s.n; });
    const auto exact = ornstein_uhlenbeck_solution(1.0, 2.0, 1.0, cfg.grid);
    return std::sqrt(weighted_l2_error(last, exact, Weight::inverse_of(exact)));
  };
  EXPECT_NEAR(err(5e-4) / err(2.5e-4), 2.0, 0.3);
}

TEST(Manifest, KeyValueLines) {
  const auto path = std::filesystem::temp_directory_path() / "kslab.manifest";
  write_manifest({{"mass", "0.1"}, {"dt", "0.00025"}}, path);
  std::ifstream in(path);
  std::string a, b;
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(a, "mass=0.1");
  EXPECT_EQ(b, "dt=0.00025");
  std::filesystem::remove(path);
}
