#include "gbrw/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gbrw {

namespace {
constexpr double kPmfSumTolerance = 1e-12;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}
}  // namespace

// ---------------------------------------------------------------------------
// OffspringPmf
// ---------------------------------------------------------------------------

OffspringPmf::OffspringPmf(std::vector<double> p_by_k) : p_(std::move(p_by_k)) {
  if (p_.empty()) throw NonProbability("offspring pmf is empty");
  if (p_[0] > 0.0) throw ZeroOffspring("offspring pmf puts mass on k = 0");
  double total = 0.0;
  for (std::size_t k = 0; k < p_.size(); ++k) {
    const double v = p_[k];
    if (v < 0.0) throw NonProbability("offspring pmf has a negative weight");
    total += v;
    if (v > 0.0) k_max_ = static_cast<int>(k);
    mean_ += v * static_cast<double>(k);
    m2_ += v * static_cast<double>(k) * static_cast<double>(k);
  }
  if (std::abs(total - 1.0) > kPmfSumTolerance)
    throw NonProbability("offspring pmf weights sum to " + fmt(total) + ", not 1");
  if (k_max_ < 1) throw NonProbability("offspring pmf has no positive weight");
  p_.resize(static_cast<std::size_t>(k_max_) + 1);
}

OffspringPmf OffspringPmf::from_map(const std::map<int, double>& pk) {
  int kmax = 0;
  for (const auto& [k, v] : pk) {
    if (k < 0) throw NonProbability("offspring pmf has a negative k");
    if (k == 0 && v > 0.0) throw ZeroOffspring("offspring pmf puts mass on k = 0");
    kmax = std::max(kmax, k);
  }
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (const auto& [k, v] : pk) p[static_cast<std::size_t>(k)] += v;
  return OffspringPmf(std::move(p));
}

OffspringPmf OffspringPmf::deterministic(int k) {
  if (k < 1) throw ZeroOffspring("deterministic offspring count must be >= 1");
  std::vector<double> p(static_cast<std::size_t>(k) + 1, 0.0);
  p[static_cast<std::size_t>(k)] = 1.0;
  return OffspringPmf(std::move(p));
}

OffspringPmf OffspringPmf::truncated_geometric(double ratio, double tail_eps,
                                               double* truncation_error) {
  if (!(ratio > 0.0) || !(ratio < 1.0)) throw NonProbability("geometric ratio must be in (0,1)");
  // Untruncated: p_k = (1 - ratio) ratio^(k-1); tail beyond K is ratio^K.
  int K = 1;
  while (std::pow(ratio, K) >= tail_eps && K < 100000) ++K;
  return truncated_geometric_at(ratio, K, truncation_error);
}

OffspringPmf OffspringPmf::truncated_geometric_at(double ratio, int k_cap,
                                                  double* truncation_error) {
  if (!(ratio > 0.0) || !(ratio < 1.0)) throw NonProbability("geometric ratio must be in (0,1)");
  if (k_cap < 1) throw NonProbability("geometric truncation cap must be >= 1");
  std::vector<double> p(static_cast<std::size_t>(k_cap) + 1, 0.0);
  double total = 0.0;
  for (int k = 1; k <= k_cap; ++k) {
    p[static_cast<std::size_t>(k)] = (1.0 - ratio) * std::pow(ratio, k - 1);
    total += p[static_cast<std::size_t>(k)];
  }
  if (truncation_error) *truncation_error = 1.0 - total;
  for (double& v : p) v /= total;
  return OffspringPmf(std::move(p));
}

double OffspringPmf::q1(double u) const {
  if (u >= 1.0) return 1.0;
  double acc = 0.0;
  const double l = std::log1p(-u);
  for (int k = 1; k <= k_max_; ++k) {
    const double pk = p(k);
    if (pk > 0.0) acc += pk * (-std::expm1(static_cast<double>(k) * l));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// BranchingLaw
// ---------------------------------------------------------------------------

BranchingLaw::BranchingLaw(SchedulePolicy policy, std::vector<OffspringPmf> pmfs,
                           bool bounded_support, double truncation_error)
    : policy_(policy),
      pmfs_(std::move(pmfs)),
      bounded_support_(bounded_support),
      truncation_error_(truncation_error) {
  if (pmfs_.empty()) throw NonProbability("branching schedule has no pmfs");
}

const OffspringPmf& BranchingLaw::at(int n) const {
  if (n < 0) throw NotScheduled("negative generation");
  switch (policy_) {
    case SchedulePolicy::Constant:
      return pmfs_[0];
    case SchedulePolicy::Periodic:
      return pmfs_[static_cast<std::size_t>(n % static_cast<int>(pmfs_.size()))];
    case SchedulePolicy::Explicit:
      if (n >= static_cast<int>(pmfs_.size()))
        throw NotScheduled("generation " + std::to_string(n) + " beyond the explicit schedule");
      return pmfs_[static_cast<std::size_t>(n)];
  }
  throw NotScheduled("invalid schedule policy");
}

bool BranchingLaw::scheduled(int n) const {
  if (n < 0) return false;
  return policy_ != SchedulePolicy::Explicit || n < static_cast<int>(pmfs_.size());
}

std::optional<int> BranchingLaw::k_max() const {
  if (!bounded_support_) return std::nullopt;
  int k = 0;
  for (const auto& pmf : pmfs_) k = std::max(k, pmf.k_max());
  return k;
}

double BranchingLaw::inf_mean() const {
  double m = pmfs_[0].mean();
  for (const auto& pmf : pmfs_) m = std::min(m, pmf.mean());
  return m;
}

double BranchingLaw::sup_second_moment() const {
  double m = 0.0;
  for (const auto& pmf : pmfs_) m = std::max(m, pmf.second_moment());
  return m;
}

BranchingLaw make_branching_schedule(const BranchingSpec& spec) {
  std::vector<OffspringPmf> pmfs;
  pmfs.reserve(spec.pmfs.size());
  for (const auto& m : spec.pmfs) pmfs.push_back(OffspringPmf::from_map(m));
  return BranchingLaw(spec.policy, std::move(pmfs));
}

// ---------------------------------------------------------------------------
// DisplacementLaw
// ---------------------------------------------------------------------------

DisplacementLaw::DisplacementLaw(Family f, Grid grid, SchedulePolicy policy,
                                 std::vector<Level> levels)
    : family_(f), grid_(grid), policy_(policy), levels_(std::move(levels)) {
  if (levels_.empty()) throw NonProbability("displacement law has no levels");
  finalize();
}

void DisplacementLaw::finalize() {
  marginals_.clear();
  marginals_.resize(levels_.size());
  identical_marginals_ = true;
  for (std::size_t li = 0; li < levels_.size(); ++li) {
    Level& lv = levels_[li];
    LevelMarginals& lm = marginals_[li];
    switch (family_) {
      case Family::Independent:
        lm.all = lv.z_all;
        lm.by_k = lv.z_by_k;
        break;
      case Family::CommonShift: {
        if (!lv.shift) throw NonProbability("common_shift level without a shift pmf");
        if (lv.z_all) lm.all = lv.shift->convolve(*lv.z_all);
        for (const auto& [k, z] : lv.z_by_k) lm.by_k.emplace(k, lv.shift->convolve(z));
        break;
      }
      case Family::ExplicitProduct: {
        if (lv.factors.empty()) throw NonProbability("explicit product with no factors");
        if (lv.factors.size() > 4)
          throw KTooLarge("explicit product joints support k <= 4");
        std::vector<double> w(static_cast<std::size_t>(grid_.size()), 0.0);
        for (const auto& f : lv.factors)
          for (int i = 0; i < grid_.size(); ++i)
            w[static_cast<std::size_t>(i)] +=
                f.weight(i) / static_cast<double>(lv.factors.size());
        lm.all = GridPmf(grid_, std::move(w));
        break;
      }
      case Family::McGeneric:
        break;  // marginals come from the base law, if any
    }
    // MT0'-style flag: one marginal per generation, shared by every k.
    const GridPmf* ref = lm.all ? &*lm.all : nullptr;
    for (const auto& [k, g] : lm.by_k) {
      if (!ref)
        ref = &g;
      else if (!ref->same_weights(g))
        identical_marginals_ = false;
    }
  }
  if (family_ == Family::McGeneric && base_) identical_marginals_ = base_->identical_marginals();
  if (family_ == Family::McGeneric && !base_) identical_marginals_ = false;
}

DisplacementLaw DisplacementLaw::independent(const Grid& grid, GridPmf marginal,
                                             SchedulePolicy policy) {
  Level lv;
  lv.z_all = std::move(marginal);
  return DisplacementLaw(Family::Independent, grid, policy, {std::move(lv)});
}

DisplacementLaw DisplacementLaw::independent_per_k(const Grid& grid, std::map<int, GridPmf> by_k,
                                                   SchedulePolicy policy) {
  Level lv;
  lv.z_by_k = std::move(by_k);
  return DisplacementLaw(Family::Independent, grid, policy, {std::move(lv)});
}

DisplacementLaw DisplacementLaw::independent_schedule(const Grid& grid, SchedulePolicy policy,
                                                      std::vector<Level> levels) {
  return DisplacementLaw(Family::Independent, grid, policy, std::move(levels));
}

DisplacementLaw DisplacementLaw::common_shift(const Grid& grid, GridPmf shift, GridPmf z,
                                              SchedulePolicy policy) {
  Level lv;
  lv.shift = std::move(shift);
  lv.z_all = std::move(z);
  return DisplacementLaw(Family::CommonShift, grid, policy, {std::move(lv)});
}

DisplacementLaw DisplacementLaw::common_shift_per_k(const Grid& grid, GridPmf shift,
                                                    std::map<int, GridPmf> z_by_k) {
  Level lv;
  lv.shift = std::move(shift);
  lv.z_by_k = std::move(z_by_k);
  return DisplacementLaw(Family::CommonShift, grid, SchedulePolicy::Constant, {std::move(lv)});
}

DisplacementLaw DisplacementLaw::explicit_product(const Grid& grid, std::vector<GridPmf> factors) {
  Level lv;
  lv.factors = std::move(factors);
  return DisplacementLaw(Family::ExplicitProduct, grid, SchedulePolicy::Constant, {std::move(lv)});
}

DisplacementLaw DisplacementLaw::mc(DisplacementLaw base) {
  DisplacementLaw out(Family::McGeneric, base.grid(), base.policy(), base.levels_);
  out.base_ = std::make_shared<const DisplacementLaw>(std::move(base));
  out.finalize();
  return out;
}

DisplacementLaw DisplacementLaw::mc_sampler(const Grid& grid, McSampler sampler, int k_max) {
  if (!sampler) throw ConfigError("mc_sampler needs a sampler");
  if (k_max < 1) throw ConfigError("mc_sampler needs k_max >= 1");
  DisplacementLaw out(Family::McGeneric, grid, SchedulePolicy::Constant, {Level{}});
  out.sampler_ = std::move(sampler);
  out.sampler_k_max_ = k_max;
  return out;
}

const DisplacementLaw::Level& DisplacementLaw::level(int n) const {
  if (n < 0) throw NotScheduled("negative generation");
  switch (policy_) {
    case SchedulePolicy::Constant:
      return levels_[0];
    case SchedulePolicy::Periodic:
      return levels_[static_cast<std::size_t>(n % static_cast<int>(levels_.size()))];
    case SchedulePolicy::Explicit:
      if (n >= static_cast<int>(levels_.size()))
        throw NotScheduled("generation " + std::to_string(n) + " beyond the displacement schedule");
      return levels_[static_cast<std::size_t>(n)];
  }
  throw NotScheduled("invalid schedule policy");
}

static int level_index_of(SchedulePolicy policy, int n, int count) {
  switch (policy) {
    case SchedulePolicy::Constant:
      return 0;
    case SchedulePolicy::Periodic:
      return n % count;
    case SchedulePolicy::Explicit:
      return n;
  }
  return 0;
}

bool DisplacementLaw::scheduled(int n, int k) const {
  if (n < 0 || k < 1) return false;
  if (policy_ == SchedulePolicy::Explicit && n >= static_cast<int>(levels_.size())) return false;
  if (family_ == Family::McGeneric) {
    if (base_) return base_->scheduled(n, k);
    return k <= sampler_k_max_;
  }
  const Level& lv = level(n);
  if (family_ == Family::ExplicitProduct) return k == static_cast<int>(lv.factors.size());
  return lv.z_all.has_value() || lv.z_by_k.count(k) > 0;
}

const GridPmf& DisplacementLaw::marginal(int n, int k) const {
  if (family_ == Family::McGeneric) {
    if (base_) return base_->marginal(n, k);
    throw UnboundedK("a pure-sampler law has no closed-form marginal");
  }
  if (!scheduled(n, k))
    throw NotScheduled("displacement (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                       ") is not scheduled");
  const int li =
      level_index_of(policy_, n, static_cast<int>(levels_.size()));
  const LevelMarginals& lm = marginals_[static_cast<std::size_t>(li)];
  const auto it = lm.by_k.find(k);
  if (it != lm.by_k.end()) return it->second;
  return *lm.all;
}

const GridPmf& DisplacementLaw::z_for(int n, int k) const {
  if (!scheduled(n, k))
    throw NotScheduled("displacement (n=" + std::to_string(n) + ", k=" + std::to_string(k) +
                       ") is not scheduled");
  const Level& lv = level(n);
  const auto it = lv.z_by_k.find(k);
  if (it != lv.z_by_k.end()) return it->second;
  if (lv.z_all) return *lv.z_all;
  throw NotScheduled("no per-sibling pmf for this family");
}

std::vector<int> DisplacementLaw::scheduled_ks(int n, const BranchingLaw* branching,
                                               int k_cap) const {
  std::vector<int> ks;
  if (family_ == Family::McGeneric && base_) return base_->scheduled_ks(n, branching, k_cap);
  if (family_ == Family::ExplicitProduct) {
    const int k = static_cast<int>(level(n).factors.size());
    if (!branching || branching->at(n).p(k) > 0.0) ks.push_back(k);
    return ks;
  }
  if (branching) {
    const OffspringPmf& pmf = branching->at(n);
    for (int k = 1; k <= pmf.k_max(); ++k)
      if (pmf.p(k) > 0.0 && scheduled(n, k)) ks.push_back(k);
    return ks;
  }
  const Level& lv = level(n);
  if (!lv.z_by_k.empty()) {
    for (const auto& [k, g] : lv.z_by_k) ks.push_back(k);
  } else {
    for (int k = 1; k <= k_cap; ++k) ks.push_back(k);
  }
  return ks;
}

bool DisplacementLaw::open_k_range() const {
  if (family_ == Family::McGeneric && base_) return base_->open_k_range();
  if (family_ == Family::ExplicitProduct) return false;
  for (const auto& lv : levels_)
    if (lv.z_by_k.empty()) return true;
  return false;
}

double DisplacementLaw::max_step(int n) const {
  if (family_ == Family::McGeneric) {
    if (base_) return base_->max_step(n);
    return std::numeric_limits<double>::infinity();
  }
  const Level& lv = level(n);
  double m = -std::numeric_limits<double>::infinity();
  if (family_ == Family::ExplicitProduct) {
    for (const auto& f : lv.factors) m = std::max(m, f.max_value());
    return m;
  }
  if (lv.z_all) m = std::max(m, lv.z_all->max_value());
  for (const auto& [k, z] : lv.z_by_k) m = std::max(m, z.max_value());
  if (family_ == Family::CommonShift) m += lv.shift->max_value();
  return m;
}

DisplacementLaw DisplacementLaw::shifted(double c) const {
  if (family_ == Family::McGeneric) {
    if (base_) return mc(base_->shifted(c));
    McSampler inner = sampler_;
    McSampler wrapped = [inner, c](int n, int k, std::mt19937_64& rng, std::vector<double>& out) {
      inner(n, k, rng, out);
      for (double& v : out) v += c;
    };
    return mc_sampler(grid_, std::move(wrapped), sampler_k_max_);
  }
  std::vector<Level> levels = levels_;
  for (Level& lv : levels) {
    if (family_ == Family::CommonShift) {
      lv.shift = lv.shift->shifted(c);
      continue;
    }
    if (lv.z_all) lv.z_all = lv.z_all->shifted(c);
    for (auto& [k, z] : lv.z_by_k) z = z.shifted(c);
    for (auto& f : lv.factors) f = f.shifted(c);
  }
  return DisplacementLaw(family_, grid_, policy_, std::move(levels));
}

void DisplacementLaw::sample_vector(int n, int k, std::mt19937_64& rng,
                                    std::vector<double>& out) const {
  out.resize(static_cast<std::size_t>(k));
  switch (family_) {
    case Family::Independent: {
      const GridPmf& z = z_for(n, k);
      for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = z.sample(rng);
      return;
    }
    case Family::CommonShift: {
      const Level& lv = level(n);
      const double y = lv.shift->sample(rng);
      const GridPmf& z = z_for(n, k);
      for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = y + z.sample(rng);
      return;
    }
    case Family::ExplicitProduct: {
      const Level& lv = level(n);
      if (k != static_cast<int>(lv.factors.size()))
        throw NotScheduled("explicit product has a fixed sibling count");
      for (int i = 0; i < k; ++i)
        out[static_cast<std::size_t>(i)] = lv.factors[static_cast<std::size_t>(i)].sample(rng);
      if (lv.symmetrized) std::shuffle(out.begin(), out.end(), rng);
      return;
    }
    case Family::McGeneric:
      if (sampler_) {
        sampler_(n, k, rng, out);
        return;
      }
      base_->sample_vector(n, k, rng, out);
      return;
  }
}

double DisplacementLaw::box_all_leq(int n, int k, double B) const {
  if (family_ == Family::McGeneric) {
    if (base_) return base_->box_all_leq(n, k, B);
    throw UnboundedK("a pure-sampler law has no closed-form joint");
  }
  if (!scheduled(n, k)) throw NotScheduled("joint (n,k) not scheduled");
  const int i0 = grid_.origin();
  const int iB = i0 + grid_.steps_of(B);
  switch (family_) {
    case Family::Independent:
      return std::pow(z_for(n, k).cdf_at(iB), k);
    case Family::CommonShift: {
      const Level& lv = level(n);
      const GridPmf& z = z_for(n, k);
      double acc = 0.0;
      for (int j = lv.shift->support_lo(); j <= lv.shift->support_hi(); ++j) {
        const double wj = lv.shift->weight(j);
        if (wj > 0.0) acc += wj * std::pow(z.cdf_at(iB - (j - i0)), k);
      }
      return acc;
    }
    case Family::ExplicitProduct: {
      double acc = 1.0;
      for (const auto& f : level(n).factors) acc *= f.cdf_at(iB);
      return acc;
    }
    default:
      throw UnboundedK("unsupported family");
  }
}

double DisplacementLaw::box_all_geq_neg(int n, int k, double B) const {
  if (family_ == Family::McGeneric) {
    if (base_) return base_->box_all_geq_neg(n, k, B);
    throw UnboundedK("a pure-sampler law has no closed-form joint");
  }
  if (!scheduled(n, k)) throw NotScheduled("joint (n,k) not scheduled");
  const int i0 = grid_.origin();
  const int iNeg = i0 - grid_.steps_of(B);
  switch (family_) {
    case Family::Independent:
      return std::pow(z_for(n, k).mass_geq(iNeg), k);
    case Family::CommonShift: {
      const Level& lv = level(n);
      const GridPmf& z = z_for(n, k);
      double acc = 0.0;
      for (int j = lv.shift->support_lo(); j <= lv.shift->support_hi(); ++j) {
        const double wj = lv.shift->weight(j);
        if (wj > 0.0) acc += wj * std::pow(z.mass_geq(iNeg - (j - i0)), k);
      }
      return acc;
    }
    case Family::ExplicitProduct: {
      double acc = 1.0;
      for (const auto& f : level(n).factors) acc *= f.mass_geq(iNeg);
      return acc;
    }
    default:
      throw UnboundedK("unsupported family");
  }
}

// ---------------------------------------------------------------------------
// Assumption checkers
// ---------------------------------------------------------------------------

namespace {

/// Number of generations that covers every distinct (branching, displacement)
/// level pairing: the lcm of the two periods, or the explicit length.
int closure_horizon(const DisplacementLaw& law, const BranchingLaw* branching) {
  const auto span = [](SchedulePolicy p, int count) {
    return p == SchedulePolicy::Constant ? 1 : count;
  };
  int a = span(law.policy(), law.distinct_levels());
  int b = branching ? span(branching->policy(), branching->distinct_levels()) : 1;
  if (law.policy() == SchedulePolicy::Explicit ||
      (branching && branching->policy() == SchedulePolicy::Explicit))
    return std::max(a, b);
  return static_cast<int>(std::lcm(a, b));
}

}  // namespace

AssumptionReport check_branching_assumptions(const BranchingLaw& law, BranchingVariant variant) {
  AssumptionReport report;
  const double inf_mean = law.inf_mean();
  const double m0 = law.declared_m0();

  if (variant == BranchingVariant::Bounded) {
    const auto k0 = law.k_max();
    CheckResult b1;
    b1.name = "B1";
    b1.pass = k0.has_value();
    if (k0) {
      b1.value = static_cast<double>(*k0);
      b1.witness = "k0=" + std::to_string(*k0);
    } else {
      b1.witness = "support truncated from an unbounded family (tail mass " +
                   fmt(law.truncation_error()) + ")";
    }
    report.add(std::move(b1));

    CheckResult b2;
    b2.name = "B2";
    b2.pass = m0 > 1.0;
    b2.margin = inf_mean - 1.0;
    b2.value = m0;
    b2.witness = b2.pass ? "certified m0=" + fmt(m0) + " (inf mean " + fmt(inf_mean) +
                               " minus margin " + fmt(BranchingLaw::kCertifyMargin) + ")"
                         : "inf mean " + fmt(inf_mean) + " is not > 1";
    report.add(std::move(b2));
  } else {
    const double m1 = law.declared_m1();
    CheckResult mean_check;
    mean_check.name = "B1'_mean";
    mean_check.pass = m0 > 1.0;
    mean_check.margin = inf_mean - 1.0;
    mean_check.value = m0;
    mean_check.witness = mean_check.pass
                             ? "certified m0=" + fmt(m0)
                             : "inf mean " + fmt(inf_mean) + " is not > 1";
    report.add(std::move(mean_check));

    CheckResult m2_check;
    m2_check.name = "B1'_second_moment";
    m2_check.pass = std::isfinite(m1);
    m2_check.value = m1;
    m2_check.witness = "certified m1=" + fmt(m1) + " (sup second moment " +
                       fmt(law.sup_second_moment()) + " plus margin)";
    report.add(std::move(m2_check));
  }

  if (law.truncation_error() > 0.0) {
    CheckResult tr;
    tr.name = "truncation";
    tr.pass = true;
    tr.value = law.truncation_error();
    tr.witness = "unbounded offspring pmf truncated; removed tail mass " +
                 fmt(law.truncation_error());
    report.add(std::move(tr));
  }
  return report;
}

AssumptionReport check_marginal_assumptions(const DisplacementLaw& law, double eps0, double a,
                                            double M0, const BranchingLaw* branching) {
  if (!(eps0 > 0.0) || !(eps0 < 1.0)) throw DomainError("eps0 must be in (0,1)");
  if (!(a > 0.0) || !(M0 > 0.0)) throw DomainError("need a > 0 and M0 > 0");
  const Grid& g = law.grid();
  AssumptionReport report;

  struct Entry {
    int n, k;
    const GridPmf* pmf;
  };
  std::vector<Entry> entries;
  const int horizon = closure_horizon(law, branching);
  for (int n = 0; n < horizon; ++n)
    for (int k : law.scheduled_ks(n, branching)) entries.push_back({n, k, &law.marginal(n, k)});
  if (entries.empty()) throw NotScheduled("no scheduled (n,k) marginals to check");

  for (const Entry& e : entries)
    if (e.pmf->weight(g.size() - 1) > 1e-12)
      throw GridTooNarrow("marginal mass at the grid edge exceeds 1e-12 for (n=" +
                          std::to_string(e.n) + ", k=" + std::to_string(e.k) + ")");

  // MT1: largest common x0 with P(X >= x0) >= 1 - eps0, i.e. the left limit
  // of the tail at x0. Always exists on the grid since P(X >= xmin) = 1.
  int x0_index = g.size() - 1;
  for (const Entry& e : entries) {
    int i = x0_index;
    while (i > 0 && e.pmf->mass_geq(i) < 1.0 - eps0) --i;
    x0_index = std::min(x0_index, i);
  }
  double mt1_margin = 1.0;
  for (const Entry& e : entries)
    mt1_margin = std::min(mt1_margin, e.pmf->mass_geq(x0_index) - (1.0 - eps0));
  {
    CheckResult mt1;
    mt1.name = "MT1";
    mt1.pass = mt1_margin >= 0.0;
    mt1.margin = mt1_margin;
    mt1.value = g.x(x0_index);
    mt1.witness = "x0=" + fmt(g.x(x0_index)) + ", shift=" + fmt(-g.x(x0_index));
    report.add(std::move(mt1));
  }

  // MT2: tail(x + M) <= exp(-a M) tail(x) for grid x >= 0 and grid M > M0.
  const int i0 = g.origin();
  const int m_min = static_cast<int>(std::floor(M0 / g.h())) + 1;  // smallest grid M > M0
  double worst_ratio = 0.0;
  std::string witness;
  for (const Entry& e : entries) {
    const int hi = e.pmf->support_hi();
    for (int ix = i0; ix <= hi; ++ix) {
      const double t1 = e.pmf->tail_at(ix);
      if (t1 <= 0.0) break;
      for (int ms = m_min; ix + ms <= hi; ++ms) {
        const double t2 = e.pmf->tail_at(ix + ms);
        if (t2 <= 0.0) break;
        const double ratio = t2 * std::exp(a * ms * g.h()) / t1;
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          witness = "(n=" + std::to_string(e.n) + ", k=" + std::to_string(e.k) +
                    ", x=" + fmt(g.x(ix)) + ", M=" + fmt(ms * g.h()) + ")";
        }
      }
    }
  }
  {
    CheckResult mt2;
    mt2.name = "MT2";
    mt2.pass = worst_ratio <= 1.0 + 1e-9;
    mt2.margin = 1.0 - worst_ratio;
    mt2.witness = witness.empty() ? "no positive-tail pairs to check (vacuous)"
                                  : "max ratio " + fmt(worst_ratio) + " at " + witness;
    report.add(std::move(mt2));
  }
  return report;
}

AssumptionReport check_joint_tail(const DisplacementLaw& law, double eta1, JointTailVariant variant,
                                  const BranchingLaw* branching, int k_cap) {
  if (!(eta1 > 0.0) || !(eta1 < 1.0)) throw DomainError("eta1 must be in (0,1)");
  const Grid& g = law.grid();
  AssumptionReport report;

  struct Entry {
    int n, k;
  };
  std::vector<Entry> entries;
  const int horizon = closure_horizon(law, branching);
  for (int n = 0; n < horizon; ++n)
    for (int k : law.scheduled_ks(n, branching, k_cap)) entries.push_back({n, k});
  if (entries.empty()) throw NotScheduled("no scheduled (n,k) joints to check");
  const bool partial = law.open_k_range() && branching == nullptr;

  const auto slack_at = [&](double B, Entry* worst) {
    double slack = 1.0;
    for (const Entry& e : entries) {
      double s = law.box_all_leq(e.n, e.k, B) - (1.0 - eta1);
      if (variant == JointTailVariant::GT) {
        s = std::min(s, law.box_all_geq_neg(e.n, e.k, B) - (1.0 - eta1));
      } else {
        // Marginal left tail: P(X > -B) >= 1 - eta1.
        const int iNeg = g.origin() - g.steps_of(B);
        s = std::min(s, law.marginal(e.n, e.k).tail_at(iNeg) - (1.0 - eta1));
      }
      if (s < slack) {
        slack = s;
        if (worst) *worst = e;
      }
    }
    return slack;
  };

  // B ranges over grid multiples strictly inside (0, xmax): a certificate at
  // the edge cell would be vacuous for any law clipped by the grid.
  const int bs_max = g.steps_of(g.xmax()) - 1;
  int lo = 1, hi = bs_max;
  Entry worst{0, 0};
  CheckResult gt;
  gt.name = variant == JointTailVariant::GT ? "GT" : "GT'";
  if (slack_at(bs_max * g.h(), &worst) < 0.0) {
    gt.pass = false;
    gt.margin = slack_at(bs_max * g.h(), &worst);
    gt.witness = "no B <= " + fmt(bs_max * g.h()) + " certifies eta1=" + fmt(eta1) + "; worst (n=" +
                 std::to_string(worst.n) + ", k=" + std::to_string(worst.k) + ")";
  } else {
    while (lo < hi) {  // smallest certifying B; slack is monotone in B
      const int mid = lo + (hi - lo) / 2;
      if (slack_at(mid * g.h(), nullptr) >= 0.0)
        hi = mid;
      else
        lo = mid + 1;
    }
    gt.pass = true;
    gt.value = lo * g.h();
    gt.margin = slack_at(lo * g.h(), nullptr);
    gt.witness = "B=" + fmt(lo * g.h());
  }
  if (partial) gt.witness += " (partial: open k range capped at k <= " + std::to_string(k_cap) + ")";
  report.add(std::move(gt));
  return report;
}

DisplacementLaw symmetrize(const DisplacementLaw& joint) {
  if (joint.family() != Family::ExplicitProduct) return joint;  // already exchangeable
  const DisplacementLaw::Level& lv = joint.level(0);
  if (lv.symmetrized) return joint;
  DisplacementLaw::Level out = lv;
  out.symmetrized = true;
  return DisplacementLaw::explicit_product_symmetrized(joint.grid(), std::move(out));
}

DisplacementLaw DisplacementLaw::explicit_product_symmetrized(const Grid& grid, Level lv) {
  return DisplacementLaw(Family::ExplicitProduct, grid, SchedulePolicy::Constant, {std::move(lv)});
}

}  // namespace gbrw
