#include "gbrw/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gbrw {

namespace {
constexpr double kPmfSumTolerance = 1e-12;
}

GridPmf::GridPmf(Grid grid, std::vector<double> weights) : grid_(grid), w_(std::move(weights)) {
  if (static_cast<int>(w_.size()) != grid_.size())
    throw NonProbability("pmf weight vector does not match the grid size");
  double total = 0.0;
  lo_ = -1;
  hi_ = -1;
  for (int i = 0; i < grid_.size(); ++i) {
    const double v = w_[static_cast<std::size_t>(i)];
    if (v < 0.0) throw NonProbability("pmf has a negative weight");
    if (v > 0.0) {
      if (lo_ < 0) lo_ = i;
      hi_ = i;
    }
    total += v;
  }
  if (lo_ < 0) throw NonProbability("pmf has no positive weight");
  if (std::abs(total - 1.0) > kPmfSumTolerance)
    throw NonProbability("pmf weights sum to " + std::to_string(total) + ", not 1");
  cum_.resize(w_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    acc += w_[i];
    cum_[i] = acc;
  }
  // Past the support the cdf is exactly 1; keep tail probabilities exact there.
  for (int i = hi_; i < grid_.size(); ++i) cum_[static_cast<std::size_t>(i)] = 1.0;
}

GridPmf GridPmf::from_atoms(const Grid& grid,
                            const std::vector<std::pair<double, double>>& atoms) {
  std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
  for (const auto& [x, p] : atoms) w[static_cast<std::size_t>(grid.index_of(x))] += p;
  return GridPmf(grid, std::move(w));
}

GridPmf GridPmf::point_mass(const Grid& grid, double x) { return from_atoms(grid, {{x, 1.0}}); }

GridPmf GridPmf::gaussian(const Grid& grid, double mean, double sd) {
  if (!(sd > 0)) throw NonProbability("gaussian marginal needs sd > 0");
  return from_density(grid, [mean, sd](double x) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z);
  });
}

GridPmf GridPmf::exponential_tail(const Grid& grid, double rate) {
  if (!(rate > 0)) throw NonProbability("exponential tail needs rate > 0");
  std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
  const int i0 = grid.origin();
  if (i0 < 0 || i0 >= grid.size() - 1) throw GridTooNarrow("grid does not cover x >= 0");
  // P(X > x_i) = exp(-rate * x_i) for i >= i0; atom_i = tail(x_{i-1}) - tail(x_i).
  double prev_tail = 1.0;
  for (int i = i0 + 1; i < grid.size(); ++i) {
    const double tail = std::exp(-rate * grid.x(i));
    w[static_cast<std::size_t>(i)] = prev_tail - tail;
    prev_tail = tail;
  }
  w.back() += prev_tail;  // residual tail mass collapses onto the edge cell
  return GridPmf(grid, std::move(w));
}

GridPmf GridPmf::pareto_tail(const Grid& grid, double alpha) {
  if (!(alpha > 0)) throw NonProbability("pareto tail needs alpha > 0");
  std::vector<double> w(static_cast<std::size_t>(grid.size()), 0.0);
  const int i0 = grid.origin();
  if (i0 < 0 || i0 >= grid.size() - 1) throw GridTooNarrow("grid does not cover x >= 0");
  double prev_tail = 1.0;
  for (int i = i0 + 1; i < grid.size(); ++i) {
    const double tail = std::pow(1.0 + grid.x(i), -alpha);
    w[static_cast<std::size_t>(i)] = prev_tail - tail;
    prev_tail = tail;
  }
  w.back() += prev_tail;
  return GridPmf(grid, std::move(w));
}

double GridPmf::cdf_at(int i) const {
  if (i < 0) return 0.0;
  if (i >= grid_.size()) return 1.0;
  return cum_[static_cast<std::size_t>(i)];
}

double GridPmf::mass_geq(int i) const { return 1.0 - cdf_at(i - 1); }

double GridPmf::mean() const {
  double m = 0.0;
  for (int i = lo_; i <= hi_; ++i) m += w_[static_cast<std::size_t>(i)] * grid_.x(i);
  return m;
}

GridPmf GridPmf::shifted(double c) const {
  const int d = grid_.steps_of(c);
  if (lo_ + d < 0 || hi_ + d >= grid_.size())
    throw GridOverflow("shifted pmf support leaves the grid");
  std::vector<double> w(w_.size(), 0.0);
  for (int i = lo_; i <= hi_; ++i)
    w[static_cast<std::size_t>(i + d)] = w_[static_cast<std::size_t>(i)];
  return GridPmf(grid_, std::move(w));
}

GridPmf GridPmf::convolve(const GridPmf& other) const {
  if (grid_ != other.grid_) throw GridOverflow("convolving pmfs on different grids");
  const int i0 = grid_.origin();
  std::vector<double> w(w_.size(), 0.0);
  for (int i = lo_; i <= hi_; ++i) {
    const double wi = w_[static_cast<std::size_t>(i)];
    if (wi == 0.0) continue;
    for (int j = other.lo_; j <= other.hi_; ++j) {
      const double wj = other.w_[static_cast<std::size_t>(j)];
      if (wj == 0.0) continue;
      const int t = i + j - i0;  // index of x_i + x_j
      if (t < 0 || t >= grid_.size()) throw GridOverflow("pmf convolution leaves the grid");
      w[static_cast<std::size_t>(t)] += wi * wj;
    }
  }
  // Convolution of exact pmfs accumulates rounding in the total; renormalize.
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return GridPmf(grid_, std::move(w));
}

double GridPmf::sample_u(double u) const {
  const auto it = std::upper_bound(cum_.begin() + lo_, cum_.begin() + hi_ + 1, u);
  const int i = std::min<int>(static_cast<int>(it - cum_.begin()), hi_);
  return grid_.x(i);
}

bool GridPmf::same_weights(const GridPmf& other, double tol) const {
  if (grid_ != other.grid_) return false;
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (std::abs(w_[i] - other.w_[i]) > tol) return false;
  return true;
}

std::vector<double> convolve_function(const std::vector<double>& f, double left, double right,
                                      const GridPmf& pmf) {
  const Grid& g = pmf.grid();
  const int n = g.size();
  if (static_cast<int>(f.size()) != n) throw GridOverflow("function/grid size mismatch");
  const int i0 = g.origin();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int j = pmf.support_lo(); j <= pmf.support_hi(); ++j) {
    const double wj = pmf.weight(j);
    if (wj == 0.0) continue;
    const int s = j - i0;  // f is evaluated at index i - s
    const int lo_i = std::max(0, s);            // below: i - s < 0 -> left extension
    const int hi_i = std::min(n, n + s);        // above: i - s >= n -> right extension
    if (left != 0.0)
      for (int i = 0; i < lo_i; ++i) out[static_cast<std::size_t>(i)] += wj * left;
    for (int i = lo_i; i < hi_i; ++i)
      out[static_cast<std::size_t>(i)] += wj * f[static_cast<std::size_t>(i - s)];
    if (right != 0.0)
      for (int i = hi_i; i < n; ++i) out[static_cast<std::size_t>(i)] += wj * right;
  }
  return out;
}

}  // namespace gbrw
