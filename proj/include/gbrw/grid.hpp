#pragma once

#include <cmath>
#include <cstdint>

#include "gbrw/errors.hpp"

namespace gbrw {

/// Shared uniform grid [xmin, xmax] with step h.
///
/// All pmfs and tail curves in the library live on one such grid, so that
/// convolutions reduce to exact index arithmetic. xmin and xmax must be
/// integer multiples of h; this makes x_i - y_j land on a grid point again.
class Grid {
 public:
  Grid(double xmin, double xmax, double h) : xmin_(xmin), xmax_(xmax), h_(h) {
    if (!(h > 0) || !(xmax > xmin)) throw ConfigError("grid: need h > 0 and xmax > xmin");
    const double lo = xmin / h, hi = xmax / h;
    if (std::abs(lo - std::round(lo)) > 1e-9 || std::abs(hi - std::round(hi)) > 1e-9)
      throw ConfigError("grid: xmin and xmax must be integer multiples of h");
    size_ = static_cast<int>(std::llround(hi - lo)) + 1;
    origin_ = static_cast<int>(std::llround(-lo));  // index of x = 0 (may be off-grid)
  }

  static Grid standard() { return Grid(-60.0, 60.0, 0.05); }

  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  double h() const { return h_; }
  int size() const { return size_; }
  /// Index of x = 0.
  int origin() const { return origin_; }

  double x(int i) const { return xmin_ + i * h_; }

  bool contains_index(int i) const { return i >= 0 && i < size_; }

  /// Nearest grid index; throws GridOverflow unless x is grid-aligned and in range.
  int index_of(double x) const {
    const double fi = (x - xmin_) / h_;
    const int i = static_cast<int>(std::llround(fi));
    if (std::abs(fi - i) > 1e-6) throw GridOverflow("value is not grid-aligned");
    if (i < 0 || i >= size_) throw GridOverflow("value is outside the grid");
    return i;
  }

  bool aligned(double v) const {
    const double f = v / h_;
    return std::abs(f - std::round(f)) <= 1e-6;
  }

  /// Signed index offset for a grid-aligned displacement (e.g. M or B).
  int steps_of(double v) const {
    const double f = v / h_;
    const long long s = std::llround(f);
    if (std::abs(f - static_cast<double>(s)) > 1e-6)
      throw GridOverflow("displacement is not a multiple of the grid step");
    return static_cast<int>(s);
  }

  bool operator==(const Grid& o) const {
    return xmin_ == o.xmin_ && xmax_ == o.xmax_ && h_ == o.h_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  double xmin_, xmax_, h_;
  int size_ = 0;
  int origin_ = 0;
};

}  // namespace gbrw
