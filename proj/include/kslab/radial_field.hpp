#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace kslab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Uniform cell-centered grid on [0, r_max] for radially symmetric functions
/// of x in R^2.  Cell i spans [i*h, (i+1)*h] with center (i+1/2)*h and area
/// weight 2*pi*r_i*h.  Faces are indexed 0..n_cells.
class RadialGrid {
 public:
  RadialGrid(double r_max, std::size_t n_cells);

  double r_max() const { return r_max_; }
  std::size_t size() const { return n_cells_; }
  double h() const { return h_; }

  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * h_; }
  double face(std::size_t i) const { return static_cast<double>(i) * h_; }
  double weight(std::size_t i) const { return kTwoPi * center(i) * h_; }

  std::vector<double> centers() const;
  std::vector<double> weights() const;

  /// The same cell layout scaled by `factor` (centers r_i * factor).
  RadialGrid stretched(double factor) const;

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

 private:
  double r_max_;
  std::size_t n_cells_;
  double h_;
};

/// Cell-centered samples of a radial profile.
class RadialField {
 public:
  explicit RadialField(RadialGrid grid);  // zero field
  RadialField(RadialGrid grid, std::vector<double> values);

  template <class F>
  static RadialField from_function(const RadialGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.center(i));
    return RadialField(grid, std::move(v));
  }

  const RadialGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double min() const;
  double max() const;

 private:
  RadialGrid grid_;
  std::vector<double> values_;
};

/// Weight in the L2 error functional: 1, K(x) = exp(|x|^2/2), or 1/n_inf.
class Weight {
 public:
  enum class Kind { kUnweighted, kGaussianK, kInverseSteady };

  static Weight unweighted();
  static Weight gaussian_k();
  /// Requires every cell of `n_inf` to be strictly positive.
  static Weight inverse_of(const RadialField& n_inf);

  Kind kind() const { return kind_; }
  double at(const RadialGrid& grid, std::size_t i) const;

 private:
  explicit Weight(Kind k) : kind_(k) {}
  Kind kind_;
  std::shared_ptr<const RadialField> reference_;
};

/// Midpoint quadrature of \int_{R^2} f dx = sum_i w_i f_i.
double integrate(const RadialField& field);

/// (\int |f|^p dx)^{1/p}; p = kInfinity gives the grid max of |f|.
double lp_norm(const RadialField& field, double p);

/// \int (n - n_ref)^2 weight dx.  Grids must match.
double weighted_l2_error(const RadialField& n, const RadialField& n_ref, const Weight& w);

/// Cumulative mass m(r) = 2*pi \int_0^r n(s) s ds evaluated at the outer face
/// of every cell, so the last value equals integrate(n).  Rejects n < 0.
RadialField cumulative_mass(const RadialField& n);

/// Cumulative mass at all n_cells + 1 faces, starting with m(0) = 0.
std::vector<double> face_mass(const RadialField& n);

/// (\int |d_r n|^2 K dx)^{1/2} with face-centered differences, K = exp(r^2/2).
double h1k_seminorm(const RadialField& n);

void require_same_grid(const RadialField& a, const RadialField& b);

/// CSV with header `r,value`, exact round-trip digits.
void write_csv(const RadialField& field, const std::filesystem::path& path);
/// Reads a field written by write_csv; the grid is recovered from the centers.
RadialField read_csv(const std::filesystem::path& path);

}  // namespace kslab
