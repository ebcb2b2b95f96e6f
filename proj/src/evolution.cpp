#include "kslab/evolution.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"
#include "kslab/potential.hpp"

namespace kslab {

Coupling parse_coupling(std::string_view s) {
  if (s == "full") return Coupling::kFull;
  if (s == "disabled") return Coupling::kDisabled;
  throw PreconditionError(fmt::format("coupling must be 'full' or 'disabled', got '{}'", s));
}

std::string to_string(Coupling c) { return c == Coupling::kFull ? "full" : "disabled"; }

InitialProfile InitialProfile::gaussian(double variance) {
  if (!(variance > 0.0)) throw PreconditionError("gaussian variance must be positive");
  return {Kind::kGaussian, variance, 0.0};
}

InitialProfile InitialProfile::annulus(double r0, double width) {
  if (!(r0 >= 0.0) || !(width > 0.0)) throw PreconditionError("annulus needs r0 >= 0 and width > 0");
  return {Kind::kAnnulus, r0, width};
}

InitialProfile InitialProfile::steady_perturbation(double amplitude) {
  if (!(amplitude > -1.0)) throw PreconditionError("steady perturbation amplitude must exceed -1");
  return {Kind::kSteadyPerturbation, amplitude, 0.0};
}

namespace {

double to_number(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw PreconditionError(fmt::format("bad number '{}' in initial profile", s));
  return v;
}

}  // namespace

InitialProfile InitialProfile::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "gaussian") return gaussian(args.empty() ? 2.0 : to_number(args));
  if (name == "steady") return steady_perturbation(args.empty() ? 0.0 : to_number(args));
  if (name == "annulus") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) throw PreconditionError("annulus expects 'annulus:r0,width'");
    return annulus(to_number(args.substr(0, comma)), to_number(args.substr(comma + 1)));
  }
  throw PreconditionError(fmt::format("unknown initial profile '{}' (gaussian, annulus, steady)", text));
}

std::string InitialProfile::to_string() const {
  switch (kind) {
    case Kind::kGaussian:
      return fmt::format("gaussian:{}", a);
    case Kind::kAnnulus:
      return fmt::format("annulus:{},{}", a, b);
    case Kind::kSteadyPerturbation:
      return fmt::format("steady:{}", a);
  }
  return {};
}

RadialField make_initial(const InitialProfile& init, double mass, const RadialGrid& grid,
                         const SteadyState* reference) {
  if (!(mass > 0.0)) throw PreconditionError("initial mass must be positive");
  RadialField n(grid);
  switch (init.kind) {
    case InitialProfile::Kind::kGaussian:
      n = RadialField::from_function(grid, [&](double r) { return std::exp(-0.5 * r * r / init.a); });
      break;
    case InitialProfile::Kind::kAnnulus:
      n = RadialField::from_function(grid, [&](double r) {
        const double d = (r - init.a) / init.b;
        return std::exp(-0.5 * d * d);
      });
      break;
    case InitialProfile::Kind::kSteadyPerturbation:
      if (!reference || !(reference->grid() == grid))
        throw PreconditionError("steady perturbation needs a steady state on the run grid");
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid.center(i);
        n[i] = reference->n_inf[i] * std::exp(-0.5 * init.a * r * r);
      }
      break;
  }
  const double scale = mass / integrate(n);
  for (auto& v : n.values()) v *= scale;
  return n;
}

namespace {

// Bernoulli function x / (e^x - 1)
double bernoulli(double x) {
  if (std::abs(x) < 1e-12) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

double entropy_density(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

// Potential plus confinement, Phi_i = c_i - r_i^2 / 2, with the matching c.
struct DriftField {
  std::vector<double> phi;
  RadialField c;
  double grad_c_inf = 0.0;
};

DriftField drift_field(const RadialField& n, Coupling coupling) {
  const auto& g = n.grid();
  DriftField d{std::vector<double>(g.size()), RadialField(g)};
  if (coupling == Coupling::kFull) {
    auto pot = solve_potential(n);
    d.c = std::move(pot.c);
    d.grad_c_inf = pot.grad_c_inf;
  }
  for (std::size_t i = 0; i < g.size(); ++i) d.phi[i] = d.c[i] - 0.5 * g.center(i) * g.center(i);
  return d;
}

double free_energy_with(const RadialField& n, const RadialField& c, Coupling coupling) {
  const auto& g = n.grid();
  double f = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.center(i);
    double e = entropy_density(n[i]) + 0.5 * r * r * n[i];
    if (coupling == Coupling::kFull) e -= 0.5 * n[i] * c[i];
    f += g.weight(i) * e;
  }
  return f;
}

double cfl_from_phi(const RadialGrid& g, const std::vector<double>& phi) {
  double umax = 0.0;
  for (std::size_t f = 1; f < g.size(); ++f) umax = std::max(umax, std::abs(phi[f] - phi[f - 1]) / g.h());
  return umax > 0.0 ? g.h() / umax : kInfinity;
}

// Reusable tridiagonal workspace for the implicit Scharfetter-Gummel solve.
class Stepper {
 public:
  explicit Stepper(const RadialGrid& g) : g_(g), lo_(g.size()), di_(g.size()), up_(g.size()), rhs_(g.size()) {}

  // Advances n in place using the drift of the current state.
  void advance(RadialField& n, double dt, const DriftField& drift, double tau) {
    for (std::size_t i = 0; i < n.size(); ++i)
      if (n[i] < 0.0) throw PreconditionError(fmt::format("negative density at tau = {}", tau));
    const double limit = cfl_from_phi(g_, drift.phi);
    if (dt > limit * (1.0 + 1e-12))
      throw PreconditionError(fmt::format("dt = {} violates the CFL limit {} at tau = {}", dt, limit, tau));

    const std::size_t N = g_.size();
    const double h = g_.h();
    for (std::size_t i = 0; i < N; ++i) {
      const double vol = g_.center(i) * h / dt;
      lo_[i] = 0.0;
      up_[i] = 0.0;
      di_[i] = vol;
      rhs_[i] = vol * n[i];
    }
    for (std::size_t f = 1; f < N; ++f) {
      const double a = g_.face(f) / h;
      const double x = drift.phi[f] - drift.phi[f - 1];
      const double bp = a * bernoulli(x);
      const double bm = a * bernoulli(-x);
      di_[f - 1] += bm;
      up_[f - 1] -= bp;
      di_[f] += bp;
      lo_[f] -= bm;
    }
    // Thomas elimination; the matrix is a column-diagonally-dominant M-matrix
    for (std::size_t i = 1; i < N; ++i) {
      const double w = lo_[i] / di_[i - 1];
      di_[i] -= w * up_[i - 1];
      rhs_[i] -= w * rhs_[i - 1];
    }
    n[N - 1] = rhs_[N - 1] / di_[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) n[i] = (rhs_[i] - up_[i] * n[i + 1]) / di_[i];
  }

 private:
  RadialGrid g_;
  std::vector<double> lo_, di_, up_, rhs_;
};

// Rounding-level negatives are flushed to zero; anything larger is an error.
void check_positivity(RadialField& n, double mass, double tau) {
  const double floor = -1e-14 * mass / kTwoPi;
  const double lowest = n.min();
  if (lowest < floor)
    throw NumericalError(fmt::format("positivity lost at tau = {}: min value {:.3e}", tau, lowest));
  for (auto& v : n.values()) v = std::max(v, 0.0);
}

}  // namespace

double free_energy(const RadialField& n, Coupling coupling) {
  const auto d = drift_field(n, coupling);
  return free_energy_with(n, d.c, coupling);
}

double cfl_limit(const RadialField& n, Coupling coupling) {
  return cfl_from_phi(n.grid(), drift_field(n, coupling).phi);
}

Diagnostics diagnose(const RadialField& n, Coupling coupling, const SteadyState* reference) {
  const auto d = drift_field(n, coupling);
  Diagnostics out;
  out.mass = integrate(n);
  out.free_energy = free_energy_with(n, d.c, coupling);
  out.linf = lp_norm(n, kInfinity);
  out.l2 = lp_norm(n, 2.0);
  out.l3 = lp_norm(n, 3.0);
  out.grad_c_inf = coupling == Coupling::kFull ? d.grad_c_inf : grad_c_inf_norm(n);
  if (reference) out.weighted_error = weighted_l2_error(n, reference->n_inf, Weight::inverse_of(reference->n_inf));
  return out;
}

EvolutionState step(const EvolutionState& state, double dt, Coupling coupling) {
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  EvolutionState next{state.tau + dt, state.n, {}};
  Stepper stepper(state.n.grid());
  stepper.advance(next.n, dt, drift_field(state.n, coupling), state.tau);
  check_positivity(next.n, integrate(state.n), next.tau);
  next.diag = diagnose(next.n, coupling);
  return next;
}

double original_time(double tau) { return 0.5 * std::expm1(2.0 * tau); }
double rescaled_time(double t) { return 0.5 * std::log1p(2.0 * t); }

RunRecord run(const EvolutionConfig& config, const Observer& observer) {
  if (!(config.tau_end > 0.0)) throw PreconditionError("tau_end must be positive");
  if (config.sample_every < 1) throw PreconditionError("sample_every must be >= 1");
  const auto& g = config.grid;
  const SteadyState* ref = config.reference.get();
  if (ref && !(ref->grid() == g)) throw PreconditionError("reference steady state lives on another grid");

  RunRecord rec;
  rec.config = config;
  EvolutionState state{0.0, make_initial(config.init, config.mass, g, ref), {}};

  double dt = config.dt;
  if (dt == 0.0) dt = std::min(1e-3, 0.5 * cfl_limit(state.n, config.coupling));
  if (!(dt > 0.0)) throw PreconditionError("time step must be positive");
  // round the step count up so the uniform step never exceeds the requested one
  const long n_steps = std::max(1L, static_cast<long>(std::ceil(config.tau_end / dt * (1.0 - 1e-12))));
  dt = config.tau_end / static_cast<double>(n_steps);
  rec.dt = dt;
  rec.steps = n_steps;
  rec.min_value = state.n.min();

  std::shared_ptr<const Weight> weight;
  if (ref) weight = std::make_shared<const Weight>(Weight::inverse_of(ref->n_inf));

  auto record = [&](const EvolutionState& s, double grad_c) {
    Sample smp;
    smp.tau = s.tau;
    smp.t_original = original_time(s.tau);
    smp.mass = integrate(s.n);
    smp.free_energy = s.diag.free_energy;
    smp.linf_n = lp_norm(s.n, kInfinity);
    smp.l2_n = lp_norm(s.n, 2.0);
    smp.l3_n = lp_norm(s.n, 3.0);
    smp.grad_c_inf = grad_c;
    if (weight) smp.weighted_error = weighted_l2_error(s.n, ref->n_inf, *weight);
    const double R2 = std::exp(2.0 * s.tau);
    smp.linf_u_times_t = smp.t_original * smp.linf_n / R2;
    rec.samples.push_back(smp);
    if (observer) {
      EvolutionState copy = s;
      copy.diag.mass = smp.mass;
      copy.diag.linf = smp.linf_n;
      copy.diag.l2 = smp.l2_n;
      copy.diag.l3 = smp.l3_n;
      copy.diag.grad_c_inf = grad_c;
      copy.diag.weighted_error = smp.weighted_error;
      observer(copy);
    }
  };

  Stepper stepper(g);
  const double mass = config.mass;
  auto drift = drift_field(state.n, config.coupling);
  double energy = free_energy_with(state.n, drift.c, config.coupling);
  state.diag.free_energy = energy;
  record(state, config.coupling == Coupling::kFull ? drift.grad_c_inf : grad_c_inf_norm(state.n));
  for (long k = 0; k < n_steps; ++k) {
    stepper.advance(state.n, dt, drift, state.tau);
    state.tau = config.tau_end * static_cast<double>(k + 1) / static_cast<double>(n_steps);
    rec.min_value = std::min(rec.min_value, state.n.min());
    check_positivity(state.n, mass, state.tau);
    drift = drift_field(state.n, config.coupling);
    const double next_energy = free_energy_with(state.n, drift.c, config.coupling);
    rec.max_free_energy_increase = std::max(rec.max_free_energy_increase, next_energy - energy);
    energy = next_energy;
    rec.max_mass_drift = std::max(rec.max_mass_drift, std::abs(integrate(state.n) - mass) / mass);
    if ((k + 1) % config.sample_every == 0 || k + 1 == n_steps) {
      state.diag.free_energy = energy;
      record(state, config.coupling == Coupling::kFull ? drift.grad_c_inf : grad_c_inf_norm(state.n));
    }
  }
  return rec;
}

void write_run_csv(const RunRecord& record, const std::filesystem::path& path) {
  csv::Writer out(path, {"tau", "t_original", "mass", "free_energy", "weighted_error", "linf_n", "l2_n",
                         "linf_u_times_t"});
  for (const auto& s : record.samples)
    out.row({s.tau, s.t_original, s.mass, s.free_energy, s.weighted_error, s.linf_n, s.l2_n, s.linf_u_times_t});
}

OriginalVariables to_original_variables(const EvolutionState& state) {
  if (!(state.tau >= 0.0)) throw PreconditionError("rescaled time must be >= 0");
  const double R = std::exp(state.tau);
  const double R2 = R * R;
  std::vector<double> u(state.n.values().begin(), state.n.values().end());
  for (auto& v : u) v /= R2;
  OriginalVariables out{original_time(state.tau), R, RadialField(state.n.grid().stretched(R), std::move(u)), {}};
  for (double p : {1.0, 2.0, 3.0, kInfinity}) out.lp_u[p] = lp_norm(out.u, p);
  return out;
}

RadialField ornstein_uhlenbeck_solution(double mass, double variance0, double tau, const RadialGrid& grid) {
  const double s = 1.0 + (variance0 - 1.0) * std::exp(-2.0 * tau);
  return RadialField::from_function(grid, [&](double r) { return mass * std::exp(-0.5 * r * r / s) / (kTwoPi * s); });
}

}  // namespace kslab
