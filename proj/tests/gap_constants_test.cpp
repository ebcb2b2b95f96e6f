#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/evolution.hpp"
#include "kslab/gap_constants.hpp"
#include "kslab/trap_constants.hpp"

using namespace kslab;

namespace {

const RadialGrid kGrid(12.0, 2000);

}  // namespace

TEST(C1, LimitAndMonotonicity) {
  EXPECT_NEAR(c1_bound(0.2, 1.0 + 1e-12, 10.0), 0.2, 1e-9);
  double prev = 0.0;
  for (double m : {0.0125, 0.025, 0.05, 0.1, 0.2}) {
    const double v = c1_bound(m, 3.0, 10.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(c1_bound(2.0, 3.0, 10.0), PreconditionError);
}

TEST(C2, MonotoneAndGridRefinementStable) {
  double prev = 0.0;
  for (double m : {0.0125, 0.025, 0.05, 0.1, 0.2}) {
    const auto b = c2_bound(m, 10.0);
    EXPECT_GT(b.value, prev);
    prev = b.value;
  }
  auto fine = kGradientPGrid;
  for (double p = 2.1; p <= 40.0; p *= 1.02) fine.push_back(p);
  for (double m : {0.05, 0.2}) {
    const double coarse = c2_bound(m, 10.0).value;
    const double refined = c2_bound(m, 10.0, fine).value;
    EXPECT_LE(refined, coarse * (1.0 + 1e-15));
    EXPECT_LT((coarse - refined) / coarse, 1e-3) << "M = " << m;
  }
  EXPECT_THROW(c2_bound(0.1, 10.0, {2.0, 3.0}), PreconditionError);
}

TEST(Lambda, HypotheticalNoInteraction) {
  const auto l = lambda_gap(0.0, 0.0);
  EXPECT_NEAR(l.lambda, 1.0, 1e-5);
  EXPECT_LT(l.sigma_opt, 1.0 + 1e-3);
}

TEST(Lambda, SmallMassSteadyState) {
  const auto l = lambda_gap(solve_steady_state(0.05, kGrid));
  EXPECT_GT(l.lambda, 0.5);
  EXPECT_LT(l.lambda, 1.0);
  EXPECT_GT(l.sigma_opt, 1.0);
  EXPECT_LT(l.sigma_opt, 2.0);
}

TEST(Lambda, DecreasesWithMass) {
  double prev = 2.0;
  for (double m : {0.0125, 0.025, 0.05, 0.1, 0.2, 0.4}) {
    const double l = lambda_gap(solve_steady_state(m, kGrid)).lambda;
    EXPECT_LT(l, prev) << "M = " << m;
    prev = l;
  }
}

TEST(CStar, ScalesLinearlyAndVanishes) {
  EXPECT_EQ(c_star(0.0, 0.0, 0.0), 0.0);
  for (double m : {0.0125, 0.05, 0.2}) {
    const auto ss = solve_steady_state(m, kGrid);
    const double ratio = c_star(ss) / m;
    EXPECT_GT(ratio, 0.0);
    EXPECT_LT(ratio, 1.0);
  }
}

TEST(CStar, GridIndependent) {
  const double a = c_star(solve_steady_state(0.5, RadialGrid(12.0, 2000)));
  const double b = c_star(solve_steady_state(0.5, RadialGrid(12.0, 4000)));
  EXPECT_NEAR(a, b, 1e-4 * b);
}

TEST(DeltaRate, SweepIncreasesAsMassShrinks) {
  double prev = -1.0;
  for (double m : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    const auto r = delta_rate(m, 10.0, kGrid);
    ASSERT_FALSE(r.error) << *r.error;
    EXPECT_TRUE(r.valid);
    EXPECT_GT(r.delta, prev) << "M = " << m;
    EXPECT_LE(r.delta, r.lambda);
    EXPECT_LE(r.lambda, 1.0);
    EXPECT_NEAR(r.gamma, (r.c_star + 2.0 * r.c2) / std::sqrt(r.lambda), 1e-14);
    EXPECT_NEAR(r.tail_from_tau, 0.5 * std::log(2.0), 1e-15);
    prev = r.delta;
  }
}

TEST(DeltaRate, LargeMassIsInvalid) {
  const auto r = delta_rate(0.4, 10.0, kGrid);
  EXPECT_GE(r.gamma, 1.0);
  EXPECT_FALSE(r.valid);
  EXPECT_LE(r.delta, 0.0);
}

TEST(DeltaRate, TrapFailureIsRecorded) {
  const auto r = delta_rate(2.0, 10.0, RadialGrid(12.0, 400));
  ASSERT_TRUE(r.error);
  EXPECT_FALSE(r.valid);
}

TEST(MStar, BracketAndSeedIndependence) {
  const RadialGrid g(12.0, 500);
  const auto a = m_star(10.0, g, 0.1);
  const auto b = m_star(10.0, g, 0.3);
  EXPECT_GT(a.m_star, 0.0);
  EXPECT_LE(a.m_star, limit_mass_threshold());
  EXPECT_NEAR(a.m_star, b.m_star, 1e-4);
  const auto half = delta_rate(0.5 * a.m_star, 10.0, g);
  EXPECT_TRUE(half.valid);
  EXPECT_GT(half.delta, 0.0);
}

TEST(Bounds, HoldAlongRuns) {
  const RadialGrid g(10.0, 1000);
  for (double m : {0.1, 0.2}) {
    const double c1 = c1_bound(m, 3.0, 10.0);
    const double c2 = c2_bound(m, 10.0).value;
    EvolutionConfig cfg;
    cfg.mass = m;
    cfg.grid = g;
    cfg.tau_end = 3.0;
    cfg.sample_every = 20;
    const auto rec = run(cfg);
    for (const auto& s : rec.samples) {
      if (s.tau < 0.5 * std::log(2.0)) continue;
      EXPECT_LE(s.l3_n, c1) << "M = " << m << " tau = " << s.tau;
      EXPECT_LE(s.grad_c_inf, c2) << "M = " << m << " tau = " << s.tau;
    }
  }
}

TEST(GapCsv, Columns) {
  std::vector<GapReport> reps{delta_rate(0.1, 10.0, RadialGrid(12.0, 400))};
  const auto path = std::filesystem::temp_directory_path() / "kslab_gap.csv";
  write_gap_csv(reps, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "M,C1,C2,Lambda,sigma_opt,C_star,gamma,delta,valid");
  EXPECT_TRUE(row.ends_with(",true"));
  std::filesystem::remove(path);
}
