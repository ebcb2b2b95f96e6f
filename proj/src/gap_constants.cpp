#include "kslab/gap_constants.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/trap_constants.hpp"

namespace kslab {

double c1_bound(double mass, double p_norm, double p_trap) {
  const double q = std::isinf(p_norm) ? 0.0 : 1.0 / p_norm;
  return std::pow(4.0, 1.0 - q) * lp_decay_constant(p_norm, mass, p_trap);
}

GradientBound c2_bound(double mass, double p_trap, const std::vector<double>& p_grid) {
  if (p_grid.empty()) throw PreconditionError("gradient bound needs a non-empty p grid");
  GradientBound best{kInfinity, 0.0};
  for (double p : p_grid) {
    if (!(p > 2.0)) throw PreconditionError(fmt::format("gradient bound grid needs p > 2, got {}", p));
    const double holder = std::pow(kTwoPi * (p - 1.0) / (p - 2.0), p / (p - 1.0));
    const double v = (mass + holder * c1_bound(mass, p, p_trap)) / kTwoPi;
    if (v < best.value) best = {v, p};
  }
  return best;
}

LambdaResult lambda_gap(double grad_c_sup, double n_sup) {
  auto g = [&](double s) {
    return 2.0 / s - 1.0 - s * s * grad_c_sup * grad_c_sup / (4.0 * (s * s - 1.0)) - 0.5 * n_sup;
  };
  double a = 1.0 + 1e-6;
  double b = 2.0 - 1e-6;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  while (b - a > 1e-12) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + inv_phi * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - inv_phi * (b - a);
      g1 = g(x1);
    }
  }
  double s = 0.5 * (a + b);
  LambdaResult out{g(s), s};
  // the maximum may sit on the clipped boundary when the penalty vanishes
  for (double edge : {1.0 + 1e-6, 2.0 - 1e-6})
    if (g(edge) > out.lambda) out = {g(edge), edge};
  return out;
}

LambdaResult lambda_gap(const SteadyState& ss) { return lambda_gap(ss.grad_c_inf_sup, ss.n_inf_sup); }

double c_star(double mass, double n_l2, double n_sup) {
  return std::pow(mass, 0.25) * std::sqrt(n_l2) * std::pow(n_sup, 0.25) / std::sqrt(std::numbers::pi);
}

double c_star(const SteadyState& ss) { return c_star(ss.mass, ss.n_inf_l2, ss.n_inf_sup); }

GapReport delta_rate(const SteadyState& ss, double p_trap) {
  GapReport r;
  r.mass = ss.mass;
  r.p_trap = p_trap;
  r.tail_from_tau = 0.5 * std::log(2.0);
  const auto lam = lambda_gap(ss);
  r.lambda = lam.lambda;
  r.sigma_opt = lam.sigma_opt;
  r.lambda_positive = r.lambda > 0.0;
  r.c_star = c_star(ss);
  try {
    const auto c2 = c2_bound(ss.mass, p_trap);
    r.c2 = c2.value;
    r.c1_p = c2.p_best;
    r.c1 = c1_bound(ss.mass, c2.p_best, p_trap);
  } catch (const PreconditionError& e) {
    r.error = e.what();
  }
  if (r.lambda_positive) {
    r.gamma = (r.c_star + 2.0 * r.c2) / std::sqrt(r.lambda);
    r.delta = r.lambda * (1.0 - r.gamma);
  } else {
    r.gamma = kInfinity;
    r.delta = r.lambda;
  }
  if (!std::isfinite(r.delta)) r.delta = -kInfinity;
  r.valid = !r.error && ss.mass < limit_mass_threshold() && r.lambda_positive && r.gamma < 1.0;
  return r;
}

GapReport delta_rate(double mass, double p_trap, const RadialGrid& grid, const SteadyOptions& opts) {
  try {
    return delta_rate(solve_steady_state(mass, grid, opts), p_trap);
  } catch (const std::exception& e) {
    GapReport r;
    r.mass = mass;
    r.p_trap = p_trap;
    r.delta = -kInfinity;
    r.error = e.what();
    return r;
  }
}

MStarResult m_star(double p_trap, const RadialGrid& grid, double seed, const SteadyOptions& opts) {
  const double m1 = limit_mass_threshold();
  MStarResult out;
  auto good = [&](double m) {
    ++out.evaluations;
    const auto r = delta_rate(m, p_trap, grid, opts);
    return r.valid && r.delta > 0.0;
  };
  double lo = 1e-4;
  double hi = m1;
  if (!good(lo)) throw NumericalError(fmt::format("delta is not positive even at M = {}", lo));
  if (good(hi)) {
    out.m_star = m1;
    out.saturated = true;
    return out;
  }
  if (seed > lo && seed < hi) (good(seed) ? lo : hi) = seed;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    (good(mid) ? lo : hi) = mid;
  }
  out.m_star = lo;
  return out;
}

void write_gap_csv(const std::vector<GapReport>& reports, const std::filesystem::path& path) {
  csv::Writer out(path, {"M", "C1", "C2", "Lambda", "sigma_opt", "C_star", "gamma", "delta", "valid"});
  for (const auto& r : reports)
    out.raw_row({csv::format_number(r.mass), csv::format_number(r.c1), csv::format_number(r.c2),
                 csv::format_number(r.lambda), csv::format_number(r.sigma_opt), csv::format_number(r.c_star),
                 csv::format_number(r.gamma), csv::format_number(r.delta), r.valid ? "true" : "false"});
}

}  // namespace kslab
