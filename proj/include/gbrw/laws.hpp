#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "gbrw/pmf.hpp"
#include "gbrw/report.hpp"

namespace gbrw {

using AssumptionReport = Report;

/// How a finite list of per-generation entries covers all generations.
enum class SchedulePolicy { Constant, Periodic, Explicit };

/// Offspring-count pmf {p_k : k >= 1}. p_0 must be zero (no extinction).
class OffspringPmf {
 public:
  /// p[k] is the probability of k children; p[0] must be 0 (or the vector
  /// may start at k=1 with from_probs below).
  explicit OffspringPmf(std::vector<double> p_by_k);

  static OffspringPmf from_map(const std::map<int, double>& pk);
  static OffspringPmf deterministic(int k);
  /// p_k proportional to ratio^(k-1), truncated at the smallest K with tail
  /// mass below tail_eps and renormalized.
  static OffspringPmf truncated_geometric(double ratio, double tail_eps = 1e-10,
                                          double* truncation_error = nullptr);
  static OffspringPmf truncated_geometric_at(double ratio, int k_cap,
                                             double* truncation_error = nullptr);

  int k_max() const { return k_max_; }
  double p(int k) const {
    return (k >= 0 && k < static_cast<int>(p_.size())) ? p_[static_cast<std::size_t>(k)] : 0.0;
  }
  double mean() const { return mean_; }
  double second_moment() const { return m2_; }

  /// sum_k p_k * (1 - (1-u)^k).
  double q1(double u) const;
  /// sum_k p_k * k * u.
  double q2(double u) const { return mean_ * u; }

  template <class Urbg>
  int sample(Urbg& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u = uni(rng);
    double acc = 0.0;
    for (int k = 1; k <= k_max_; ++k) {
      acc += p(k);
      if (u < acc) return k;
    }
    return k_max_;
  }

 private:
  std::vector<double> p_;
  double mean_ = 0.0, m2_ = 0.0;
  int k_max_ = 0;
};

/// Time-indexed offspring schedule.
struct BranchingSpec {
  SchedulePolicy policy = SchedulePolicy::Constant;
  std::vector<std::map<int, double>> pmfs;
};

class BranchingLaw {
 public:
  static constexpr double kCertifyMargin = 1e-6;

  BranchingLaw(SchedulePolicy policy, std::vector<OffspringPmf> pmfs, bool bounded_support = true,
               double truncation_error = 0.0);

  const OffspringPmf& at(int n) const;
  bool scheduled(int n) const;
  SchedulePolicy policy() const { return policy_; }
  /// Number of distinct per-generation entries (1 for Constant, the period
  /// for Periodic, the list length for Explicit).
  int distinct_levels() const { return static_cast<int>(pmfs_.size()); }

  /// k0 when the support is declared uniformly bounded; nullopt when the law
  /// came from truncating an unbounded family.
  std::optional<int> k_max() const;
  double inf_mean() const;
  double sup_second_moment() const;
  /// inf_n mean minus the certification safety margin.
  double declared_m0() const { return inf_mean() - kCertifyMargin; }
  /// sup_n second moment plus the certification safety margin.
  double declared_m1() const { return sup_second_moment() + kCertifyMargin; }
  double truncation_error() const { return truncation_error_; }

 private:
  SchedulePolicy policy_;
  std::vector<OffspringPmf> pmfs_;
  bool bounded_support_;
  double truncation_error_;
};

BranchingLaw make_branching_schedule(const BranchingSpec& spec);

enum class Family { Independent, CommonShift, ExplicitProduct, McGeneric };

/// Sampler hook for Monte Carlo joints: fills `out` with the k displacement
/// values for a generation-n particle with k children.
using McSampler = std::function<void(int n, int k, std::mt19937_64& rng, std::vector<double>& out)>;

/// Joint sibling-displacement law on the shared grid.
///
/// Families:
///  - Independent:    siblings move independently, each with marginal g_{n,k}.
///  - CommonShift:    X_i = Y_n + Z_i with Z_i i.i.d.; the marginal is the
///                    convolution of the shift pmf with the Z pmf.
///  - ExplicitProduct: product of up to 4 explicitly listed (possibly
///                    distinct) factors, optionally permutation-averaged.
///  - McGeneric:      arbitrary sampler; integrals are Monte Carlo only.
///
/// Laws are immutable after construction and safe to share across threads.
class DisplacementLaw {
 public:
  struct Level {
    std::optional<GridPmf> z_all;       // shared across all k
    std::map<int, GridPmf> z_by_k;      // per-k overrides / entries
    std::optional<GridPmf> shift;       // CommonShift only
    std::vector<GridPmf> factors;       // ExplicitProduct only
    bool symmetrized = false;           // ExplicitProduct only
  };

  static DisplacementLaw independent(const Grid& grid, GridPmf marginal,
                                     SchedulePolicy policy = SchedulePolicy::Constant);
  static DisplacementLaw independent_per_k(const Grid& grid, std::map<int, GridPmf> by_k,
                                           SchedulePolicy policy = SchedulePolicy::Constant);
  static DisplacementLaw independent_schedule(const Grid& grid, SchedulePolicy policy,
                                              std::vector<Level> levels);
  static DisplacementLaw common_shift(const Grid& grid, GridPmf shift, GridPmf z,
                                      SchedulePolicy policy = SchedulePolicy::Constant);
  static DisplacementLaw common_shift_per_k(const Grid& grid, GridPmf shift,
                                            std::map<int, GridPmf> z_by_k);
  /// k = factors.size() <= 4; throws KTooLarge beyond that.
  static DisplacementLaw explicit_product(const Grid& grid, std::vector<GridPmf> factors);
  /// Monte Carlo view of a structured law (same distribution, sampled paths).
  static DisplacementLaw mc(DisplacementLaw base);
  /// Pure sampler; k_max bounds the offspring counts the sampler accepts.
  static DisplacementLaw mc_sampler(const Grid& grid, McSampler sampler, int k_max);

  Family family() const { return family_; }
  const Grid& grid() const { return grid_; }
  SchedulePolicy policy() const { return policy_; }
  int distinct_levels() const { return static_cast<int>(levels_.size()); }
  const Level& level(int n) const;
  bool scheduled(int n, int k) const;
  /// True when every scheduled k shares one marginal at each generation.
  bool identical_marginals() const { return identical_marginals_; }
  const DisplacementLaw* mc_base() const { return base_.get(); }

  /// The common one-dimensional marginal g_{n,k}. For CommonShift this is
  /// shift * Z; for ExplicitProduct the arithmetic mean of the factors.
  const GridPmf& marginal(int n, int k) const;

  /// Scheduled k values at generation n with p_{n,k} > 0; when the law covers
  /// all k (shared marginal), `branching` or `k_cap` bounds the range.
  std::vector<int> scheduled_ks(int n, const BranchingLaw* branching, int k_cap = 64) const;
  /// True when the k-range at some level is "all k >= 1" rather than a list.
  bool open_k_range() const;

  /// Largest displacement any single child can receive at generation n
  /// (+infinity for pure-sampler laws).
  double max_step(int n) const;

  /// Law with every displacement shifted by a grid-aligned constant.
  DisplacementLaw shifted(double c) const;

  /// Draws the k sibling displacements for a generation-n particle.
  void sample_vector(int n, int k, std::mt19937_64& rng, std::vector<double>& out) const;

  /// Used by symmetrize() to rebuild an explicit product with the flag set.
  static DisplacementLaw explicit_product_symmetrized(const Grid& grid, Level lv);

  /// P(X_1 <= B, ..., X_k <= B) for the generation-n, k-children joint.
  double box_all_leq(int n, int k, double B) const;
  /// P(X_1 >= -B, ..., X_k >= -B).
  double box_all_geq_neg(int n, int k, double B) const;

  /// Z-part pmf for the exact recursion (the marginal itself for Independent).
  const GridPmf& z_for(int n, int k) const;

 private:
  DisplacementLaw(Family f, Grid grid, SchedulePolicy policy, std::vector<Level> levels);
  void finalize();

  Family family_;
  Grid grid_;
  SchedulePolicy policy_;
  std::vector<Level> levels_;
  bool identical_marginals_ = false;
  std::shared_ptr<const DisplacementLaw> base_;  // McGeneric over a structured law
  McSampler sampler_;                            // McGeneric pure sampler
  int sampler_k_max_ = 0;
  // Precomputed marginals: per level, shared and per-k.
  struct LevelMarginals {
    std::optional<GridPmf> all;
    std::map<int, GridPmf> by_k;
  };
  std::vector<LevelMarginals> marginals_;
};

enum class BranchingVariant { Bounded, IdenticalMarginal };
enum class JointTailVariant { GT, GTPrime };

/// Uniformly-bounded-support and mean-offspring checks (or their
/// unbounded-support second-moment variant).
AssumptionReport check_branching_assumptions(const BranchingLaw& law, BranchingVariant variant);

/// Marginal-tail checks: a common left-mass anchor x0 across all scheduled
/// marginals (reported with the shift moving it to 0), and exponential
/// right-tail decay tail(x+M) <= exp(-a M) tail(x) for grid M > M0, x >= 0.
AssumptionReport check_marginal_assumptions(const DisplacementLaw& law, double eps0, double a,
                                            double M0, const BranchingLaw* branching = nullptr);

/// Smallest grid B > 0 with P(all siblings in (-inf, B]) and
/// P(all siblings in [-B, inf)) both >= 1 - eta1 (GTPrime replaces the second
/// condition by the marginal tail at -B).
AssumptionReport check_joint_tail(const DisplacementLaw& law, double eta1, JointTailVariant variant,
                                  const BranchingLaw* branching = nullptr, int k_cap = 64);

/// Permutation-average of an explicit product joint; exchangeable families
/// are returned unchanged. Idempotent.
DisplacementLaw symmetrize(const DisplacementLaw& joint);

}  // namespace gbrw
