#pragma once

#include <optional>
#include <vector>

#include "gbrw/laws.hpp"
#include "gbrw/report.hpp"
#include "gbrw/tail_curve.hpp"

namespace gbrw {

/// Indicator tail of the zero-step process: 1 for x < 0, 0 for x >= 0.
TailCurve base_tail(const Grid& grid);

enum class QKind { Q1k, Q2k, Qm, Qm1, Qm2 };

/// Scalar union/linearization transforms:
///   Q1k -> 1 - (1-u)^k, Q2k -> k u (not clamped),
///   Qm and Qm1 -> pmf-weighted Q1k, Qm2 -> pmf-weighted Q2k.
double q_transform(QKind kind, int k, double u);
double q_transform(QKind kind, const OffspringPmf& pmf, double u);

/// Diagnostics of a single recursion step.
struct StepStats {
  /// Largest monotonicity/range repair applied to the step output
  /// (intentional clamping of the linear upper bound at 1 is not counted).
  double remonotonize_correction = 0.0;
  /// Max pointwise standard error of the Monte Carlo integral (mc family).
  double mc_std_error = 0.0;
  bool approximate = false;
};

/// One exact backward step of the tail recursion: maps the tail of the
/// process started at generation m+1 to the tail at generation m.
TailCurve step_exact(int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& displacement, int mc_budget = 4096,
                     StepStats* stats = nullptr);

/// Union lower bound: sum_k p_k (g_k * Q1k(u)).
TailCurve step_lower(int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& displacement, StepStats* stats = nullptr);

/// Linear upper bound: sum_k p_k (g_k * Q2k(u)), clamped at 1.
TailCurve step_upper(int m, const TailCurve& u, const BranchingLaw& branching,
                     const DisplacementLaw& displacement, StepStats* stats = nullptr);

enum Mode : unsigned { kLower = 1u, kExact = 2u, kUpper = 4u, kAllModes = 7u };

/// Backward iteration output: per generation m in [0, n], the requested
/// lower / exact / upper tail curves of the process run from m to n.
struct SandwichRun {
  SandwichRun(BranchingLaw b, DisplacementLaw d, int horizon, unsigned mode_mask)
      : n(horizon), modes(mode_mask), branching(std::move(b)), displacement(std::move(d)) {}

  int n;
  unsigned modes;
  BranchingLaw branching;
  DisplacementLaw displacement;
  std::vector<std::optional<TailCurve>> lower, exact, upper;  // indexed by m
  double max_remonotonize = 0.0;
  double max_mc_std_error = 0.0;
  bool approximate = false;

  const TailCurve& exact_at(int m) const;
};

SandwichRun run(const BranchingLaw& branching, const DisplacementLaw& displacement, int n,
                unsigned modes, int mc_budget = 4096);

/// Checks lower <= exact <= upper pointwise across all generations.
Report check_sandwich(const SandwichRun& data);

/// Checks the B-window bracket linking consecutive exact curves:
///   Qm(u_{m+1})(x + B) - eta1 <= u_m(x) <= Qm(u_{m+1})(x - B) + eta1.
Report pointwise_bounds_check(const SandwichRun& data, double B, double eta1);

}  // namespace gbrw
