#include "kslab/trap_constants.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"

namespace kslab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_mass(double mass) {
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw PreconditionError(fmt::format("mass must be positive and finite, got {}", mass));
}

// Bisection of a sign change f(lo) < 0 < f(hi) (or the reverse) down to adjacent doubles.
template <class F>
double bisect(F&& f, double lo, double hi) {
  const bool rising = f(lo) < 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == rising)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

}  // namespace

TrapExponents trap_exponents(double p) {
  if (!(p > 4.0)) throw PreconditionError(fmt::format("p must exceed 4, got {}", p));
  if (std::isinf(p)) return {p, 4.0 / 3.0, 1.25, 0.75};
  return {p, 4.0 * p / (3.0 * p - 4.0), 1.25 - 1.0 / p, 1.0 / p + 0.75};
}

double kappa(double sigma) {
  if (!(sigma >= 1.0 && sigma <= 2.0)) throw PreconditionError(fmt::format("kappa needs sigma in [1, 2], got {}", sigma));
  const double s = sigma;
  const double ks = std::pow(8.0 * kPi, -s) * std::pow(2.0, s + 2.0) * std::sqrt(kPi) * std::tgamma(0.5 * (s + 1.0)) *
                    std::pow(s, -(0.5 * s + 1.0));
  return std::pow(ks, 1.0 / s);
}

double trap_c0(double mass, double p) {
  check_mass(mass);
  const auto e = trap_exponents(p);
  return 2.0 * kappa(e.sigma) * kHlsConstant / kPi * std::pow(mass, e.beta) * e.sigma / (2.0 - e.sigma);
}

double trap_function(double z, double mass, double p) {
  if (!(z >= 0.0)) throw PreconditionError(fmt::format("trap function needs z >= 0, got {}", z));
  const auto e = trap_exponents(p);
  return z - trap_c0(mass, p) * std::pow(z, e.theta) - mass / (2.0 * kPi);
}

double trap_maximum(double mass, double p) {
  const auto e = trap_exponents(p);
  const double c0 = trap_c0(mass, p);
  return (e.theta - 1.0) / e.theta * std::pow(c0 * e.theta, 1.0 / (1.0 - e.theta)) - mass / (2.0 * kPi);
}

TrapRoots trap_roots(double mass, double p) {
  const auto e = trap_exponents(p);
  const double c0 = trap_c0(mass, p);
  TrapRoots out;
  out.z0 = std::pow(c0 * e.theta, 1.0 / (1.0 - e.theta));
  out.h_at_z0 = trap_maximum(mass, p);
  if (!(out.h_at_z0 > 0.0)) return out;
  auto h = [&](double z) { return z - c0 * std::pow(z, e.theta) - mass / (2.0 * kPi); };
  out.z1 = bisect(h, 0.0, out.z0);
  double hi = 2.0 * out.z0;
  while (h(hi) > 0.0) hi *= 2.0;
  out.z2 = bisect(h, out.z0, hi);
  return out;
}

double mass_threshold(double p) {
  trap_exponents(p);
  auto f = [p](double m) { return trap_maximum(m, p); };
  double lo = 1e-6;
  double hi = 1.0;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError(fmt::format("no sign change of the trap maximum below M = 1e6 at p = {}", p));
  }
  if (!(f(lo) > 0.0)) throw NumericalError(fmt::format("trap maximum already negative at M = {} for p = {}", lo, p));

  constexpr int kSamples = 64;
  std::vector<double> profile(kSamples);
  for (int k = 0; k < kSamples; ++k) profile[k] = f(lo * std::pow(hi / lo, k / (kSamples - 1.0)));
  for (int k = 1; k < kSamples; ++k) {
    // close to p = 4 the maximum overflows at small M; runs of +inf carry no order information
    const bool overflow = std::isinf(profile[k]) && profile[k] > 0.0 && profile[k - 1] == profile[k];
    if (!overflow && !(profile[k] < profile[k - 1])) {
      std::string dump;
      for (double v : profile) dump += fmt::format(" {:.6g}", v);
      throw NumericalError(fmt::format("trap maximum is not decreasing in M at p = {}; sampled:{}", p, dump));
    }
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double mass_threshold_closed_form(double p) {
  const auto e = trap_exponents(p);
  const double a = 2.0 * kappa(e.sigma) * kHlsConstant / kPi * e.sigma / (2.0 - e.sigma);
  // in logs: the powers over- and underflow as p approaches 4
  const double log_rhs = std::log(2.0 * kPi * (e.theta - 1.0) / e.theta) - std::log(a * e.theta) / (e.theta - 1.0);
  return std::exp(log_rhs / (1.0 + e.beta / (e.theta - 1.0)));
}

double limit_mass_threshold() { return mass_threshold(std::numeric_limits<double>::infinity()); }

double lp_decay_constant(double p_norm, double mass, double p_trap) {
  if (!(p_norm >= 1.0)) throw PreconditionError(fmt::format("norm index must be >= 1, got {}", p_norm));
  const auto roots = trap_roots(mass, p_trap);
  if (!roots.z1)
    throw PreconditionError(fmt::format("the trap has no root at M = {}, p = {} (M must stay below M0(p))", mass, p_trap));
  const double q = std::isinf(p_norm) ? 0.0 : 1.0 / p_norm;
  return std::pow(mass, q) * std::pow(*roots.z1, 1.0 - q);
}

TrapReport trap_report(double mass, double p) {
  const auto e = trap_exponents(p);
  return {p, e.sigma, e.theta, kappa(e.sigma), kHlsConstant, mass, trap_c0(mass, p), trap_roots(mass, p)};
}

std::vector<TrapSweepRow> trap_sweep(const std::vector<double>& ps, double mass, unsigned jobs) {
  std::vector<TrapSweepRow> rows(ps.size());
  std::vector<std::exception_ptr> errors(ps.size());
  auto one = [&](std::size_t k) {
    try {
      const auto e = trap_exponents(ps[k]);
      rows[k] = {ps[k], e.sigma, e.theta, kappa(e.sigma), trap_c0(mass, ps[k]), mass_threshold(ps[k])};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(ps.size())));
  {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < ps.size(); k = next++) one(k);
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_trap_sweep_csv(const std::vector<TrapSweepRow>& rows, const std::filesystem::path& path) {
  csv::Writer out(path, {"p", "sigma", "theta", "kappa", "C0_at_M", "M0"});
  for (const auto& r : rows) out.row({r.p, r.sigma, r.theta, r.kappa, r.c0_at_mass, r.m0});
}

}  // namespace kslab
