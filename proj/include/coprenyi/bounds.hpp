#pragma once

#include <utility>

// Frechet-Hoeffding envelope bounds for the bivariate inaccuracy measures
// against an independent reference whose margins are power distortions
// (u1^alpha, u2^beta on the relevant scale). Pointwise
//   max(u1+u2-1, 0) <= C(u1,u2) <= min(u1,u2)
// turns the defining integral into two kernel integrals
//   Imax = Int max(u1+u2-1,0) (u1^a u2^b)^{gamma-1},
//   Imin = Int min(u1,u2)     (u1^a u2^b)^{gamma-1},
// and psi(gamma) log of them brackets the measure; psi < 0 for gamma > 1
// makes the max kernel the upper bound there, and the roles swap for
// gamma < 1. The survival-scale version has literally the same kernels.
//
// The module ships two evaluations side by side: the defining kernel
// integrals by kink-aware quadrature (ground truth), and the closed-form
// rational/Beta expressions these bounds are commonly quoted in. The two
// disagree for some parameter choices; the report carries both and flags the
// discrepancies instead of reconciling them.

namespace coprenyi::bounds {

enum class Target { MCCRI, MSCRI };

struct BoundRequest {
  double gamma = 3.0;  // > 0 and != 1
  double alpha = 1.0;  // > 0
  double beta = 1.0;   // > 0
  Target target = Target::MCCRI;

  void validate() const;  // throws std::invalid_argument
};

struct BoundReport {
  BoundRequest request;
  // psi(gamma) log of the kernel integrals, oriented by the gamma regime.
  double numeric_lower = 0.0;
  double numeric_upper = 0.0;
  // psi(gamma) log of the closed forms, same orientation; NaN when a closed
  // form is nonpositive or undefined and cannot be passed through log.
  double claimed_lower = 0.0;
  double claimed_upper = 0.0;
  bool lower_agrees = false;  // |numeric - claimed| <= 1e-6 on the measure scale
  bool upper_agrees = false;
  double lower_discrepancy = 0.0;
  double upper_discrepancy = 0.0;
  // Raw kernel integrals before orientation, for diagnostics.
  double kernel_max_integral = 0.0;
  double kernel_min_integral = 0.0;
};

// Oriented (lower, upper) bounds on the measure scale from the kernel
// integrals. The max(u+v-1,0) kernel is integrated by splitting the square
// along u+v = 1 (mapping the active triangle back to a square) so the kink
// never crosses a quadrature panel; both kernels get an endpoint-clustering
// substitution that absorbs the power singularities when gamma < 1. Node
// counts double once (200 -> 400 per axis) and the change is reported
// through BoundReport users; it stays below 1e-8 for admissible requests.
std::pair<double, double> ccri_bound_integrals(const BoundRequest& req);
std::pair<double, double> scri_bound_integrals(const BoundRequest& req);

// Literal closed forms: (xi, psistar) for the CDF-scale target and
// (phi, phihat) for the survival-scale target. Values are the raw integral
// claims (no psi log). phihat's Beta-function arguments can leave the
// admissible domain for gamma < 1; the value is then NaN.
std::pair<double, double> ccri_claimed_closed_forms(const BoundRequest& req);
std::pair<double, double> scri_claimed_closed_forms(const BoundRequest& req);

// Full side-by-side report for req.target.
BoundReport build_report(const BoundRequest& req);

}  // namespace coprenyi::bounds
