#pragma once

#include <map>
#include <vector>

#include "gbrw/laws.hpp"
#include "gbrw/recurse.hpp"
#include "gbrw/report.hpp"
#include "gbrw/tail_curve.hpp"

namespace gbrw {

/// Parameter bundle for the Lyapunov functional and its constraint system.
struct LyapunovParams {
  double eps0 = 0.0;  ///< marginal left-mass defect bound
  double eps1 = 0.0;  ///< flatness slack, < 1/100
  double b = 0.0;     ///< flatness log base, > 1
  double M = 0.0;     ///< flatness window, > 100, grid-aligned
  double kappa = 0.0; ///< flatness-drift control, < 1/100
  double a = 0.0;     ///< marginal tail decay rate
  double M0 = 0.0;    ///< tail decay onset
  int k0 = 0;         ///< offspring support bound
  double m0 = 0.0;    ///< certified mean offspring lower bound, > 1
  double c1 = 1.0;    ///< union-bound quadratic constant, >= 1
  double C = 0.6931471805599453;  ///< boundedness threshold log 2

  /// Where the positive part in the flatness term is applied. The default
  /// clips the logarithm's argument at 0 (log 0 = -inf); the alternative
  /// clips the logarithm's output at 0.
  enum class PlusConvention { ClampArgument, ClampOutput };
  PlusConvention plus = PlusConvention::ClampArgument;
};

/// Pointwise functional log(1/u(x)) + log_b(1 + eps1 - u(x-M)/u(x))_+ at a
/// grid index; -inf when the flatness term vanishes. Throws DomainError when
/// u(x) = 0.
double lyapunov_l(const TailCurve& u, int x_index, const LyapunovParams& params);
double lyapunov_l(const TailCurve& u, double x, const LyapunovParams& params);

struct LValue {
  double value;      ///< -inf when the sup set is empty
  int argmax_index;  ///< -1 when the sup set is empty
};

/// Supremum of lyapunov_l over grid points with u(x) in (0, 1/2].
LValue lyapunov_L(const TailCurve& u, const LyapunovParams& params);

/// Smallest simple constant making k u - c1 u^2 <= 1 - (1-u)^k for k <= k0.
double c1_for(int k0);

/// Deterministic geometric-halving search for a bundle satisfying the full
/// constraint system: (eps1, kappa/log b) shrink first, then b walks toward 1,
/// then M grows. M is rounded up to an even multiple of the grid step. Throws
/// Infeasible when a floor (eps1 >= 1e-8, b-1 >= 1e-10, M <= 1e7) is hit.
LyapunovParams choose_params(int k0, double m0, double eps0, double a, double M0, double c1,
                             double h);

/// Direct substitution of the constraint system. `branching` supplies the
/// per-generation mean slack when available; otherwise the search's built-in
/// slack floor stands in. `h` > 0 additionally checks grid alignment of M.
Report validate_params(const LyapunovParams& params, const BranchingLaw* branching = nullptr,
                       double h = 0.0);

/// Union-bound envelope inequalities for a bounded support (u-grid sweep).
Report check_q_lemma(int k0);
/// Their pmf-weighted analogue under a second-moment bound m1.
Report check_q_lemma(const OffspringPmf& pmf, double m1);

/// Uniform expansion (T1') and sharpened-expansion (T2') properties of the
/// pmf-weighted union transform.
Report check_T1_T2(const OffspringPmf& pmf, double delta, double eps);

/// sup_m L(tail_m) <= C across an exact recursion run.
Report verify_bounded(const SandwichRun& data, const LyapunovParams& params);

/// Searches a dyadic ladder of tail thresholds delta1 for a certificate of
///   u_m(x) <= delta1  =>  u_m(x - M) >= (1 + eps1/2) u_m(x).
Report right_tail_check(const SandwichRun& data, const LyapunovParams& params,
                        const std::vector<double>& delta1_candidates = {});

/// Flatness bookkeeping of a curve pair (v fed by u through the union lower
/// bound): anchor points, flatness increments, and the nonflatness radii.
struct FlatnessDiagnostics {
  double x1 = 0.0;  ///< anchor grid point
  double x2 = 0.0;  ///< x1 - M
  double eps = 0.0;
  double f0 = 0.0;
  double delta = 0.0;
  double eps_p = 0.0;    ///< eps + delta
  double eps_pp = 0.0;   ///< eps + 2 delta
  double eps_p3 = 0.0;   ///< eps + 3 delta
  double y0 = 0.0;
  double q = 0.0;  ///< +inf when u never steepens past (4 k0)^2 beyond M/2
  double r = 0.0;
};

/// Requires L(v) > C (PremiseUnmet otherwise); all infima taken over grid
/// points, left limits as previous-grid-point values.
FlatnessDiagnostics flatness_diagnostics(const TailCurve& v, const TailCurve& u,
                                         const LyapunovParams& params);

/// Builds v = sum_k p_k g_k * Q1k(u) and asserts L(v) > C implies L(u) > C.
Report chain_check(const TailCurve& u, const OffspringPmf& pmf,
                   const std::map<int, GridPmf>& marginals, const LyapunovParams& params);

}  // namespace gbrw
