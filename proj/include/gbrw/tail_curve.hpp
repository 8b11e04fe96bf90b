#pragma once

#include <vector>

#include "gbrw/grid.hpp"

namespace gbrw {

/// Non-increasing right-continuous step function on the grid with values in
/// [0, 1]; models a survival function P(M > x). Off the grid the curve is 1
/// to the left and 0 to the right.
class TailCurve {
 public:
  /// Validates range and monotonicity (tolerance 1e-12 against float dust).
  TailCurve(Grid grid, std::vector<double> values);

  /// Clamp into [0,1] and restore monotonicity by a right-to-left cumulative
  /// max. `correction`, when given, receives the largest adjustment applied.
  static TailCurve repaired(Grid grid, std::vector<double> values, double* correction = nullptr);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return v_; }

  /// Value at grid index, with the off-grid extension.
  double at(int i) const {
    if (i < 0) return 1.0;
    if (i >= grid_.size()) return 0.0;
    return v_[static_cast<std::size_t>(i)];
  }

  /// Left limit at grid index i: the value one grid step earlier.
  double left_limit(int i) const { return at(i - 1); }

  /// Value at a grid-aligned point x.
  double value_at(double x) const;

  /// Right-continuous evaluation at an arbitrary real point.
  double at_real(double z) const {
    if (z < grid_.xmin()) return 1.0;
    const int i = static_cast<int>(std::floor((z - grid_.xmin()) / grid_.h() + 1e-9));
    return at(i);
  }

  /// Smallest grid x with 1 - u(x) >= q. Throws DomainError if the curve
  /// never drops to 1 - q.
  double quantile(double q) const;

  double median() const { return quantile(0.5); }

  /// True when u(xmin) >= 1 - 1e-9 and u(xmax) <= 1e-9.
  bool edges_consistent() const;

  /// Throws GridOverflow unless edges_consistent().
  void require_edges() const;

  /// max_i |a(x_i) - b(x_i)|.
  static double sup_distance(const TailCurve& a, const TailCurve& b);

 private:
  TailCurve() : grid_(0.0, 1.0, 1.0) {}
  Grid grid_;
  std::vector<double> v_;
};

}  // namespace gbrw
