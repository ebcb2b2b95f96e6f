#include "kslab/radial_field.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "kslab/csv.hpp"
#include "kslab/error.hpp"

namespace kslab {

RadialGrid::RadialGrid(double r_max, std::size_t n_cells) : r_max_(r_max), n_cells_(n_cells) {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw PreconditionError(fmt::format("grid radius must be positive, got {}", r_max));
  if (n_cells == 0) throw PreconditionError("grid needs at least one cell");
  h_ = r_max / static_cast<double>(n_cells);
}

std::vector<double> RadialGrid::centers() const {
  std::vector<double> r(n_cells_);
  for (std::size_t i = 0; i < n_cells_; ++i) r[i] = center(i);
  return r;
}

std::vector<double> RadialGrid::weights() const {
  std::vector<double> w(n_cells_);
  for (std::size_t i = 0; i < n_cells_; ++i) w[i] = weight(i);
  return w;
}

RadialGrid RadialGrid::stretched(double factor) const { return RadialGrid(r_max_ * factor, n_cells_); }

RadialField::RadialField(RadialGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

RadialField::RadialField(RadialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw PreconditionError(
        fmt::format("field has {} values for a grid of {} cells", values_.size(), grid_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw PreconditionError("field values must be finite");
}

double RadialField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RadialField::max() const { return *std::max_element(values_.begin(), values_.end()); }

Weight Weight::unweighted() { return Weight(Kind::kUnweighted); }
Weight Weight::gaussian_k() { return Weight(Kind::kGaussianK); }

Weight Weight::inverse_of(const RadialField& n_inf) {
  for (double v : n_inf.values())
    if (!(v > 0.0)) throw PreconditionError("inverse steady-state weight needs n_inf > 0 on every cell");
  Weight w(Kind::kInverseSteady);
  w.reference_ = std::make_shared<const RadialField>(n_inf);
  return w;
}

double Weight::at(const RadialGrid& grid, std::size_t i) const {
  switch (kind_) {
    case Kind::kUnweighted:
      return 1.0;
    case Kind::kGaussianK: {
      const double r = grid.center(i);
      return std::exp(0.5 * r * r);
    }
    case Kind::kInverseSteady:
      return 1.0 / (*reference_)[i];
  }
  return 1.0;
}

void require_same_grid(const RadialField& a, const RadialField& b) {
  if (!(a.grid() == b.grid())) throw PreconditionError("fields live on different grids");
}

double integrate(const RadialField& field) {
  const auto& g = field.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += g.weight(i) * field[i];
  return s;
}

double lp_norm(const RadialField& field, double p) {
  if (!(p >= 1.0)) throw PreconditionError(fmt::format("Lp norm needs p >= 1, got {}", p));
  double peak = 0.0;
  for (double v : field.values()) peak = std::max(peak, std::abs(v));
  if (std::isinf(p) || peak == 0.0) return peak;
  const auto& g = field.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += g.weight(i) * std::pow(std::abs(field[i]) / peak, p);
  return peak * std::pow(s, 1.0 / p);
}

double weighted_l2_error(const RadialField& n, const RadialField& n_ref, const Weight& w) {
  require_same_grid(n, n_ref);
  const auto& g = n.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double d = n[i] - n_ref[i];
    s += g.weight(i) * d * d * w.at(g, i);
  }
  return s;
}

std::vector<double> face_mass(const RadialField& n) {
  const auto& g = n.grid();
  std::vector<double> m(n.size() + 1, 0.0);
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0.0) throw PreconditionError(fmt::format("negative density {} in cell {}", n[i], i));
    m[i + 1] = m[i] + g.weight(i) * n[i];
  }
  return m;
}

RadialField cumulative_mass(const RadialField& n) {
  auto m = face_mass(n);
  return RadialField(n.grid(), std::vector<double>(m.begin() + 1, m.end()));
}

double h1k_seminorm(const RadialField& n) {
  const auto& g = n.grid();
  const std::size_t N = n.size();
  if (N < 2) return 0.0;
  const double h = g.h();
  double s = 0.0;
  // interior faces own a dual cell of width h; the outer face a half cell with a
  // one-sided difference; the face at r = 0 carries zero measure
  for (std::size_t f = 1; f < N; ++f) {
    const double r = g.face(f);
    const double d = (n[f] - n[f - 1]) / h;
    s += kTwoPi * r * h * d * d * std::exp(0.5 * r * r);
  }
  const double r = g.face(N);
  const double d = (n[N - 1] - n[N - 2]) / h;
  s += kTwoPi * r * 0.5 * h * d * d * std::exp(0.5 * r * r);
  return std::sqrt(s);
}

void write_csv(const RadialField& field, const std::filesystem::path& path) {
  csv::Writer out(path, {"r", "value"});
  for (std::size_t i = 0; i < field.size(); ++i) out.row({field.grid().center(i), field[i]});
}

RadialField read_csv(const std::filesystem::path& path) {
  auto t = csv::read(path);
  const auto rc = t.column("r");
  const auto vc = t.column("value");
  if (t.rows.empty()) throw PreconditionError("empty field csv " + path.string());
  const double h = 2.0 * t.rows.front()[rc];
  RadialGrid grid(h * static_cast<double>(t.rows.size()), t.rows.size());
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& row : t.rows) v.push_back(row[vc]);
  return RadialField(grid, std::move(v));
}

}  // namespace kslab
