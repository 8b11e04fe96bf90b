#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "gbrw/grid.hpp"

namespace gbrw {

/// Probability mass function supported on grid points.
///
/// Weights are stored densely; [lo, hi] is the nonzero support range.
/// Construction validates: weights >= 0 and sum to 1 within 1e-12.
class GridPmf {
 public:
  GridPmf(Grid grid, std::vector<double> weights);

  /// Atoms given as (x, weight) pairs; x must be grid-aligned.
  static GridPmf from_atoms(const Grid& grid, const std::vector<std::pair<double, double>>& atoms);

  static GridPmf point_mass(const Grid& grid, double x);

  /// Cell-mass discretization of a density by the midpoint rule:
  /// weight_i proportional to density(x_i), normalized. Weights below
  /// `relative_floor` times the maximum are dropped before normalizing.
  template <class Density>
  static GridPmf from_density(const Grid& grid, Density&& density, double relative_floor = 1e-16) {
    std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
    double wmax = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      w[static_cast<std::size_t>(i)] = density(grid.x(i));
      wmax = std::max(wmax, w[static_cast<std::size_t>(i)]);
    }
    if (wmax <= 0.0) throw NonProbability("density is zero on the whole grid");
    double total = 0.0;
    for (double& v : w) {
      if (v < wmax * relative_floor) v = 0.0;
      total += v;
    }
    for (double& v : w) v /= total;
    return GridPmf(grid, std::move(w));
  }

  static GridPmf gaussian(const Grid& grid, double mean, double sd);

  /// Right tail exactly exp(-rate * x) at grid points x >= 0; no mass at x <= 0.
  static GridPmf exponential_tail(const Grid& grid, double rate);

  /// Right tail exactly (1 + x)^(-alpha) at grid points x >= 0 (polynomial decay).
  static GridPmf pareto_tail(const Grid& grid, double alpha);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& weights() const { return w_; }
  double weight(int i) const { return grid_.contains_index(i) ? w_[static_cast<std::size_t>(i)] : 0.0; }
  int support_lo() const { return lo_; }
  int support_hi() const { return hi_; }
  double min_value() const { return grid_.x(lo_); }
  double max_value() const { return grid_.x(hi_); }

  /// P(X <= x_i); i may be outside the grid (clamped).
  double cdf_at(int i) const;
  /// P(X > x_i).
  double tail_at(int i) const { return 1.0 - cdf_at(i); }
  /// P(X >= x_i).
  double mass_geq(int i) const;

  double mean() const;

  /// Same weights moved by a grid-aligned offset c. Throws GridOverflow if
  /// support would leave the grid.
  GridPmf shifted(double c) const;

  /// Distribution of X + Y for independent X ~ *this, Y ~ other.
  GridPmf convolve(const GridPmf& other) const;

  /// Inverse-CDF draw; one uniform consumed per call.
  template <class Urbg>
  double sample(Urbg& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    return sample_u(uni(rng));
  }

  /// Deterministic inverse-CDF lookup for a uniform in [0, 1).
  double sample_u(double u) const;

  bool same_weights(const GridPmf& other, double tol = 0.0) const;

 private:
  Grid grid_;
  std::vector<double> w_;
  std::vector<double> cum_;  // cum_[i] = P(X <= x_i)
  int lo_ = 0, hi_ = 0;
};

/// Convolution of a bounded monotone grid function f with a pmf:
/// out(x_i) = sum_j w_j * f(x_i - y_j), with f extended by `left` for
/// points left of the grid and `right` for points right of it.
std::vector<double> convolve_function(const std::vector<double>& f, double left, double right,
                                      const GridPmf& pmf);

}  // namespace gbrw
