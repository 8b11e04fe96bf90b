#include "gbrw/recurse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "gbrw/rng.hpp"

namespace gbrw {

namespace {

constexpr double kSandwichTolerance = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

void check_unit(double u) {
  if (!(u >= 0.0) || !(u <= 1.0)) throw DomainError("u must lie in [0,1]");
}

double q1_scalar(int k, double u) {
  if (u >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-u));
}

/// Groups the scheduled k values by distinct marginal (shared-marginal laws
/// convolve once, per-k laws once per k).
std::vector<std::pair<const GridPmf*, std::vector<int>>> group_by_marginal(
    const DisplacementLaw& law, int m, const std::vector<int>& ks) {
  std::vector<std::pair<const GridPmf*, std::vector<int>>> groups;
  for (int k : ks) {
    const GridPmf* g = &law.marginal(m, k);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [g](const auto& e) { return e.first == g; });
    if (it == groups.end())
      groups.push_back({g, {k}});
    else
      it->second.push_back(k);
  }
  return groups;
}

TailCurve finish_step(const Grid& grid, std::vector<double> raw, StepStats* stats,
                      double mc_se = 0.0, bool approximate = false) {
  double corr = 0.0;
  TailCurve out = TailCurve::repaired(grid, std::move(raw), &corr);
  if (stats) {
    stats->remonotonize_correction = corr;
    stats->mc_std_error = mc_se;
    stats->approximate = approximate;
  }
  out.require_edges();
  return out;
}

TailCurve step_exact_structured(int m, const TailCurve& u, const BranchingLaw& branching,
                                const DisplacementLaw& law, StepStats* stats) {
  const Grid& grid = u.grid();
  const int n = grid.size();
  const OffspringPmf& pmf = branching.at(m);
  std::vector<int> ks = law.scheduled_ks(m, &branching);
  if (ks.empty()) throw NotScheduled("no offspring count is scheduled at this generation");

  std::vector<double> survive(static_cast<std::size_t>(n), 0.0);  // sum_k p_k prod-term
  switch (law.family()) {
    case Family::Independent:
    case Family::ExplicitProduct: {
      if (law.family() == Family::ExplicitProduct) {
        // prod_i (1 - H_i * u); the permutation average leaves this product
        // unchanged, so symmetrized and raw joints step identically.
        const auto& factors = law.level(m).factors;
        const int k = static_cast<int>(factors.size());
        if (pmf.p(k) <= 0.0 || ks.size() != 1)
          throw NotScheduled("explicit product requires branching concentrated on its k");
        std::vector<double> prod(static_cast<std::size_t>(n), 1.0);
        for (const auto& f : factors) {
          const std::vector<double> conv = convolve_function(u.values(), 1.0, 0.0, f);
          for (int i = 0; i < n; ++i)
            prod[static_cast<std::size_t>(i)] *= 1.0 - conv[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < n; ++i) survive[static_cast<std::size_t>(i)] = prod[static_cast<std::size_t>(i)];
        break;
      }
      for (const auto& [g, group_ks] : group_by_marginal(law, m, ks)) {
        const std::vector<double> conv = convolve_function(u.values(), 1.0, 0.0, *g);
        for (int i = 0; i < n; ++i) {
          const double s = 1.0 - conv[static_cast<std::size_t>(i)];
          double acc = 0.0;
          for (int k : group_ks) acc += pmf.p(k) * std::pow(s, k);
          survive[static_cast<std::size_t>(i)] += acc;
        }
      }
      break;
    }
    case Family::CommonShift: {
      // Condition on the shared shift: inner product uses the Z part only,
      // then one convolution with the shift pmf.
      std::vector<double> inner(static_cast<std::size_t>(n), 0.0);
      std::map<const GridPmf*, std::vector<int>> zgroups;
      for (int k : ks) zgroups[&law.z_for(m, k)].push_back(k);
      for (const auto& [z, group_ks] : zgroups) {
        const std::vector<double> conv = convolve_function(u.values(), 1.0, 0.0, *z);
        for (int i = 0; i < n; ++i) {
          const double w = 1.0 - conv[static_cast<std::size_t>(i)];
          double acc = 0.0;
          for (int k : group_ks) acc += pmf.p(k) * std::pow(w, k);
          inner[static_cast<std::size_t>(i)] += acc;
        }
      }
      survive = convolve_function(inner, 0.0, 1.0, *law.level(m).shift);
      break;
    }
    case Family::McGeneric:
      throw UnboundedK("mc family must go through the Monte Carlo path");
  }

  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = 1.0 - survive[static_cast<std::size_t>(i)];
  return finish_step(grid, std::move(out), stats);
}

TailCurve step_exact_mc(int m, const TailCurve& u, const BranchingLaw& branching,
                        const DisplacementLaw& law, int mc_budget, StepStats* stats) {
  if (mc_budget < 2) throw ConfigError("mc_budget must be >= 2");
  const Grid& grid = u.grid();
  const int n = grid.size();
  const OffspringPmf& pmf = branching.at(m);

  std::vector<double> survive(static_cast<std::size_t>(n), 0.0);
  std::vector<double> var_acc(static_cast<std::size_t>(n), 0.0);
  std::vector<double> y;
  std::vector<double> sum(static_cast<std::size_t>(n));
  std::vector<double> sumsq(static_cast<std::size_t>(n));
  for (int k = 1; k <= pmf.k_max(); ++k) {
    const double pk = pmf.p(k);
    if (pk <= 0.0) continue;
    // Fixed sub-seed per (generation, k): reruns are reproducible.
    std::mt19937_64 rng(derive_seed(0x6D63ULL, static_cast<std::uint64_t>(m) * 131071u +
                                               static_cast<std::uint64_t>(k)));
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(sumsq.begin(), sumsq.end(), 0.0);
    for (int t = 0; t < mc_budget; ++t) {
      law.sample_vector(m, k, rng, y);
      for (int i = 0; i < n; ++i) {
        double prod = 1.0;
        for (double yi : y) prod *= 1.0 - u.at_real(grid.x(i) - yi);
        sum[static_cast<std::size_t>(i)] += prod;
        sumsq[static_cast<std::size_t>(i)] += prod * prod;
      }
    }
    const double T = static_cast<double>(mc_budget);
    for (int i = 0; i < n; ++i) {
      const double mean = sum[static_cast<std::size_t>(i)] / T;
      const double var =
          std::max(0.0, (sumsq[static_cast<std::size_t>(i)] - T * mean * mean) / (T - 1.0));
      survive[static_cast<std::size_t>(i)] += pk * mean;
      var_acc[static_cast<std::size_t>(i)] += pk * pk * var / T;
    }
  }
  double max_se = 0.0;
  for (double v : var_acc) max_se = std::max(max_se, std::sqrt(v));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = 1.0 - survive[static_cast<std::size_t>(i)];
  return finish_step(grid, std::move(out), stats, max_se, /*approximate=*/true);
}

enum class BoundSide { Lower, Upper };

TailCurve step_bound(BoundSide side, int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& law, StepStats* stats) {
  const Grid& grid = u.grid();
  const int n = grid.size();
  const OffspringPmf& pmf = branching.at(m);
  const DisplacementLaw& structured =
      (law.family() == Family::McGeneric && law.mc_base()) ? *law.mc_base() : law;
  if (structured.family() == Family::McGeneric)
    throw UnboundedK("a pure-sampler law has no closed-form marginals for the bounds");
  std::vector<int> ks = structured.scheduled_ks(m, &branching);
  if (ks.empty()) throw NotScheduled("no offspring count is scheduled at this generation");

  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  if (structured.identical_marginals()) {
    // Factored form: one convolution of the pmf-weighted transform.
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double ui = u.at(i);
      t[static_cast<std::size_t>(i)] = side == BoundSide::Lower ? pmf.q1(ui) : pmf.q2(ui);
    }
    const double left = side == BoundSide::Lower ? pmf.q1(1.0) : pmf.q2(1.0);
    acc = convolve_function(t, left, 0.0, structured.marginal(m, ks.front()));
  } else {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k : ks) {
      const double pk = pmf.p(k);
      for (int i = 0; i < n; ++i) {
        const double ui = u.at(i);
        t[static_cast<std::size_t>(i)] =
            side == BoundSide::Lower ? q1_scalar(k, ui) : static_cast<double>(k) * ui;
      }
      const double left = side == BoundSide::Lower ? 1.0 : static_cast<double>(k);
      const std::vector<double> conv = convolve_function(t, left, 0.0, structured.marginal(m, k));
      for (int i = 0; i < n; ++i) acc[static_cast<std::size_t>(i)] += pk * conv[static_cast<std::size_t>(i)];
    }
  }
  if (side == BoundSide::Upper)
    for (double& v : acc) v = std::min(v, 1.0);  // valid: the exact tail is <= 1
  return finish_step(grid, std::move(acc), stats);
}

}  // namespace

TailCurve base_tail(const Grid& grid) {
  std::vector<double> v(static_cast<std::size_t>(grid.size()), 0.0);
  for (int i = 0; i < grid.size() && grid.x(i) < 0.0; ++i) v[static_cast<std::size_t>(i)] = 1.0;
  return TailCurve(grid, std::move(v));
}

double q_transform(QKind kind, int k, double u) {
  check_unit(u);
  if (k < 1) throw DomainError("k must be >= 1");
  switch (kind) {
    case QKind::Q1k:
      return q1_scalar(k, u);
    case QKind::Q2k:
      return static_cast<double>(k) * u;
    default:
      throw DomainError("this transform needs an offspring pmf");
  }
}

double q_transform(QKind kind, const OffspringPmf& pmf, double u) {
  check_unit(u);
  switch (kind) {
    case QKind::Qm:
    case QKind::Qm1:
      return pmf.q1(u);
    case QKind::Qm2:
      return pmf.q2(u);
    default:
      throw DomainError("this transform needs an explicit k");
  }
}

TailCurve step_exact(int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& displacement, int mc_budget, StepStats* stats) {
  if (displacement.family() == Family::McGeneric)
    return step_exact_mc(m, u, branching, displacement, mc_budget, stats);
  return step_exact_structured(m, u, branching, displacement, stats);
}

TailCurve step_lower(int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& displacement, StepStats* stats) {
  return step_bound(BoundSide::Lower, m, u, branching, displacement, stats);
}

TailCurve step_upper(int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& displacement, StepStats* stats) {
  return step_bound(BoundSide::Upper, m, u, branching, displacement, stats);
}

const TailCurve& SandwichRun::exact_at(int m) const {
  if (m < 0 || m > n || !exact[static_cast<std::size_t>(m)])
    throw MissingMode("exact curve not stored for this generation");
  return *exact[static_cast<std::size_t>(m)];
}

SandwichRun run(const BranchingLaw& branching, const DisplacementLaw& displacement, int n,
                unsigned modes, int mc_budget) {
  if (n < 0) throw DomainError("horizon must be >= 0");
  if ((modes & kAllModes) == 0) throw MissingMode("no recursion mode requested");
  SandwichRun out(branching, displacement, n, modes);
  out.lower.resize(static_cast<std::size_t>(n) + 1);
  out.exact.resize(static_cast<std::size_t>(n) + 1);
  out.upper.resize(static_cast<std::size_t>(n) + 1);

  const TailCurve base = base_tail(displacement.grid());
  if (modes & kLower) out.lower[static_cast<std::size_t>(n)] = base;
  if (modes & kExact) out.exact[static_cast<std::size_t>(n)] = base;
  if (modes & kUpper) out.upper[static_cast<std::size_t>(n)] = base;

  StepStats stats;
  for (int m = n - 1; m >= 0; --m) {
    const auto mi = static_cast<std::size_t>(m);
    if (modes & kExact) {
      out.exact[mi] = step_exact(m, *out.exact[mi + 1], branching, displacement, mc_budget, &stats);
      out.max_remonotonize = std::max(out.max_remonotonize, stats.remonotonize_correction);
      out.max_mc_std_error = std::max(out.max_mc_std_error, stats.mc_std_error);
      out.approximate = out.approximate || stats.approximate;
    }
    if (modes & kLower) {
      out.lower[mi] = step_lower(m, *out.lower[mi + 1], branching, displacement, &stats);
      out.max_remonotonize = std::max(out.max_remonotonize, stats.remonotonize_correction);
    }
    if (modes & kUpper) {
      out.upper[mi] = step_upper(m, *out.upper[mi + 1], branching, displacement, &stats);
      out.max_remonotonize = std::max(out.max_remonotonize, stats.remonotonize_correction);
    }
  }
  return out;
}

Report check_sandwich(const SandwichRun& data) {
  Report report;
  bool have_exact = false;
  for (const auto& c : data.exact) have_exact = have_exact || c.has_value();
  if (!have_exact) throw MissingMode("check_sandwich needs the exact mode");

  const double tol = kSandwichTolerance + (data.approximate ? 3.0 * data.max_mc_std_error : 0.0);
  const Grid& grid = data.displacement.grid();

  const auto side = [&](const char* name, bool lower_side,
                        const std::vector<std::optional<TailCurve>>& bound) {
    double worst = 0.0;
    int worst_m = -1, worst_i = -1;
    bool any = false;
    for (int m = 0; m <= data.n; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      if (!bound[mi] || !data.exact[mi]) continue;
      any = true;
      for (int i = 0; i < grid.size(); ++i) {
        const double v = lower_side ? bound[mi]->at(i) - data.exact[mi]->at(i)
                                    : data.exact[mi]->at(i) - bound[mi]->at(i);
        if (v > worst) {
          worst = v;
          worst_m = m;
          worst_i = i;
        }
      }
    }
    if (!any) return;
    CheckResult c;
    c.name = name;
    c.pass = worst <= tol;
    c.margin = tol - worst;
    c.value = worst;
    c.witness = worst_m < 0 ? "no violation"
                            : "max violation " + fmt(worst) + " at (m=" + std::to_string(worst_m) +
                                  ", x=" + fmt(grid.x(worst_i)) + ")";
    report.add(std::move(c));
  };
  side("lower<=exact", true, data.lower);
  side("exact<=upper", false, data.upper);
  if (report.checks().empty()) throw MissingMode("check_sandwich needs a lower or upper mode");
  return report;
}

Report pointwise_bounds_check(const SandwichRun& data, double B, double eta1) {
  const Grid& grid = data.displacement.grid();
  const int bs = grid.steps_of(B);
  Report report;

  double worst_lo = std::numeric_limits<double>::infinity();
  double worst_hi = std::numeric_limits<double>::infinity();
  int lo_m = -1, lo_i = -1, hi_m = -1, hi_i = -1;
  std::vector<double> q(static_cast<std::size_t>(grid.size()));
  for (int m = 0; m < data.n; ++m) {
    const TailCurve& um = data.exact_at(m);
    const TailCurve& next = data.exact_at(m + 1);
    const OffspringPmf& pmf = data.branching.at(m);
    for (int i = 0; i < grid.size(); ++i) q[static_cast<std::size_t>(i)] = pmf.q1(next.at(i));
    const auto q_at = [&](int i) {
      if (i < 0) return 1.0;  // Qm(1) = 1
      if (i >= grid.size()) return 0.0;
      return q[static_cast<std::size_t>(i)];
    };
    for (int i = 0; i < grid.size(); ++i) {
      const double lo_margin = um.at(i) - (q_at(i + bs) - eta1);
      const double hi_margin = (q_at(i - bs) + eta1) - um.at(i);
      if (lo_margin < worst_lo) {
        worst_lo = lo_margin;
        lo_m = m;
        lo_i = i;
      }
      if (hi_margin < worst_hi) {
        worst_hi = hi_margin;
        hi_m = m;
        hi_i = i;
      }
    }
  }
  const double tol = 1e-9 + (data.approximate ? 3.0 * data.max_mc_std_error : 0.0);
  CheckResult lo;
  lo.name = "pwbounds_lower";
  lo.pass = worst_lo >= -tol;
  lo.margin = worst_lo;
  lo.witness = lo_m < 0 ? "vacuous (n = 0)"
                        : "min margin at (m=" + std::to_string(lo_m) + ", x=" + fmt(grid.x(lo_i)) + ")";
  report.add(std::move(lo));
  CheckResult hi;
  hi.name = "pwbounds_upper";
  hi.pass = worst_hi >= -tol;
  hi.margin = worst_hi;
  hi.witness = hi_m < 0 ? "vacuous (n = 0)"
                        : "min margin at (m=" + std::to_string(hi_m) + ", x=" + fmt(grid.x(hi_i)) + ")";
  report.add(std::move(hi));
  return report;
}

}  // namespace gbrw
