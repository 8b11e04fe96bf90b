#include "gbrw/tail_curve.hpp"

#include <algorithm>
#include <cmath>

namespace gbrw {

namespace {
constexpr double kMonotoneTolerance = 1e-12;
}

TailCurve::TailCurve(Grid grid, std::vector<double> values) : grid_(grid), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != grid_.size())
    throw GridOverflow("tail curve value vector does not match the grid size");
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!(v_[i] >= -kMonotoneTolerance) || !(v_[i] <= 1.0 + kMonotoneTolerance))
      throw DomainError("tail curve value outside [0,1]");
    v_[i] = std::clamp(v_[i], 0.0, 1.0);
    if (i > 0 && v_[i] > v_[i - 1] + kMonotoneTolerance)
      throw DomainError("tail curve is not non-increasing");
    if (i > 0) v_[i] = std::min(v_[i], v_[i - 1]);
  }
}

TailCurve TailCurve::repaired(Grid grid, std::vector<double> values, double* correction) {
  double worst = 0.0;
  for (double& v : values) {
    const double c = std::clamp(v, 0.0, 1.0);
    worst = std::max(worst, std::abs(v - c));
    v = c;
  }
  double running = 0.0;  // cumulative max from the right
  for (auto it = values.rbegin(); it != values.rend(); ++it) {
    if (*it < running) {
      worst = std::max(worst, running - *it);
      *it = running;
    } else {
      running = *it;
    }
  }
  if (correction) *correction = worst;
  TailCurve out;
  out.grid_ = grid;
  out.v_ = std::move(values);
  if (static_cast<int>(out.v_.size()) != grid.size())
    throw GridOverflow("tail curve value vector does not match the grid size");
  return out;
}

double TailCurve::value_at(double x) const {
  if (x < grid_.xmin()) return 1.0;
  if (x > grid_.xmax()) return 0.0;
  return at(grid_.index_of(x));
}

double TailCurve::quantile(double q) const {
  for (int i = 0; i < grid_.size(); ++i)
    if (1.0 - at(i) >= q) return grid_.x(i);
  throw DomainError("tail curve never reaches the requested quantile");
}

bool TailCurve::edges_consistent() const {
  return v_.front() >= 1.0 - 1e-9 && v_.back() <= 1e-9;
}

void TailCurve::require_edges() const {
  if (!edges_consistent())
    throw GridOverflow("tail mass leaked past a grid edge (widen the grid)");
}

double TailCurve::sup_distance(const TailCurve& a, const TailCurve& b) {
  double worst = 0.0;
  const int n = std::max(a.grid_.size(), b.grid_.size());
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
  return worst;
}

}  // namespace gbrw
