#include "coprenyi/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "coprenyi/quadrature.hpp"

namespace coprenyi::bounds {

namespace {

constexpr double kAgreeTol = 1e-6;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Int_0^1 Int_0^1 max(u+v-1,0) (u^a v^b)^{e} du dv, computed on the active
// triangle u+v >= 1 via u = 1 - x(1-t), v = 1 - xt (Jacobian x, kernel 1-x)
// with the extra substitution x = 1 - s^2 clustering nodes at the corner
// x -> 1 where u or v can vanish.
double kernel_max_integral(double ae, double be, int nodes) {
  const auto& xs = quadrature::gauss_nodes(nodes);
  const auto& ws = quadrature::gauss_weights(nodes);
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double s = xs[i];
    const double x = 1.0 - s * s;
    const double jac = 2.0 * s * x * (1.0 - x);  // ds map * Jacobian * kernel
    double inner = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double t = xs[j];
      const double u = 1.0 - x * (1.0 - t);
      const double v = 1.0 - x * t;
      inner += ws[j] * std::pow(u, ae) * std::pow(v, be);
    }
    total += ws[i] * jac * inner;
  }
  return total;
}

// Int min(u,v) (u^a v^b)^{e}: split at u = v into two monomial pieces
//   Int Int x^{2+ae+be} t^{1+be}  and  Int Int x^{2+ae+be} t^{1+ae}
// (x the outer variable, t the inner ratio), then substitute x = s^2,
// t = q^2 so negative exponents above -1 become mild.
double kernel_min_integral(double ae, double be, int nodes) {
  const auto& xs = quadrature::gauss_nodes(nodes);
  const auto& ws = quadrature::gauss_weights(nodes);
  auto monomial = [&](double p) {
    // Int_0^1 y^p dy with y = s^2; diverges when p <= -1.
    if (p <= -1.0) return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i)
      acc += ws[i] * 2.0 * std::pow(xs[i], 2.0 * p + 1.0);
    return acc;
  };
  const double outer = monomial(2.0 + ae + be);
  return outer * (monomial(1.0 + be) + monomial(1.0 + ae));
}

std::pair<double, double> kernel_integrals(const BoundRequest& req) {
  const double ae = (req.gamma - 1.0) * req.alpha;
  const double be = (req.gamma - 1.0) * req.beta;
  double imax = kernel_max_integral(ae, be, 200);
  double imin = kernel_min_integral(ae, be, 200);
  const double imax2 = kernel_max_integral(ae, be, 400);
  const double imin2 = kernel_min_integral(ae, be, 400);
  // Keep the finer evaluation; the coarse pass exists to witness convergence.
  if (std::isfinite(imax2)) imax = imax2;
  if (std::isfinite(imin2)) imin = imin2;
  return {imax, imin};
}

std::pair<double, double> orient(double gamma, double from_max_kernel,
                                 double from_min_kernel) {
  // gamma > 1: psi < 0, so the larger kernel (min) gives the lower bound.
  if (gamma > 1.0) return {from_min_kernel, from_max_kernel};
  return {from_max_kernel, from_min_kernel};
}

double psi_log(double gamma, double integral) {
  if (!(integral > 0.0) || !std::isfinite(integral)) {
    // Divergent kernel integral: psi log pushes the bound to the matching
    // infinity rather than failing.
    if (std::isinf(integral))
      return gamma > 1.0 ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
    return kNaN;
  }
  return std::log(integral) / (1.0 - gamma);
}

std::pair<double, double> oriented_bounds(const BoundRequest& req) {
  const auto [imax, imin] = kernel_integrals(req);
  return orient(req.gamma, psi_log(req.gamma, imax), psi_log(req.gamma, imin));
}

double safe_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return kNaN;
  return quadrature::beta_function(a, b);
}

double xi_form(double g, double a, double b) {
  const double e = g - 1.0;
  return (e * (a + b) + 4.0) /
         ((e * (a + b) + 3.0) * (e * a + 2.0) * (e * b + 2.0));
}

double psistar_form(double g, double a, double b) {
  const double e = g - 1.0;
  return (e * e * a * b + e * (a + b)) /
         ((e * a + 1.0) * (e * b + 1.0) * (e * a + 2.0) * (e * b + 2.0));
}

double phihat_form(double g, double a, double b) {
  const double e = g - 1.0;
  const double b1 = safe_beta(e * a + 1.0, e * b + 2.0);
  const double b2 = safe_beta(e * a + 2.0, e * b + 2.0);
  return psistar_form(g, a, b) - b1 / (e * b + 2.0) +
         (b1 - b2) / (e * b + 1.0);
}

}  // namespace

void BoundRequest::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (std::abs(gamma - 1.0) <= 1e-9)
    throw std::invalid_argument("gamma must differ from 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
}

std::pair<double, double> ccri_bound_integrals(const BoundRequest& req) {
  req.validate();
  if (req.target != Target::MCCRI)
    throw std::invalid_argument("request target is not MCCRI");
  return oriented_bounds(req);
}

std::pair<double, double> scri_bound_integrals(const BoundRequest& req) {
  req.validate();
  if (req.target != Target::MSCRI)
    throw std::invalid_argument("request target is not MSCRI");
  // The survival-scale kernels coincide with the CDF-scale ones: the
  // Frechet-Hoeffding envelope applies to the survival copula verbatim and
  // the independent reference again contributes (u^alpha v^beta)^{gamma-1}.
  return oriented_bounds(req);
}

std::pair<double, double> ccri_claimed_closed_forms(const BoundRequest& req) {
  req.validate();
  return {xi_form(req.gamma, req.alpha, req.beta),
          psistar_form(req.gamma, req.alpha, req.beta)};
}

std::pair<double, double> scri_claimed_closed_forms(const BoundRequest& req) {
  req.validate();
  return {xi_form(req.gamma, req.alpha, req.beta),
          phihat_form(req.gamma, req.alpha, req.beta)};
}

BoundReport build_report(const BoundRequest& req) {
  req.validate();
  BoundReport rep;
  rep.request = req;

  const double ae = (req.gamma - 1.0) * req.alpha;
  const double be = (req.gamma - 1.0) * req.beta;
  rep.kernel_max_integral = kernel_max_integral(ae, be, 400);
  rep.kernel_min_integral = kernel_min_integral(ae, be, 400);
  std::tie(rep.numeric_lower, rep.numeric_upper) =
      orient(req.gamma, psi_log(req.gamma, rep.kernel_max_integral),
             psi_log(req.gamma, rep.kernel_min_integral));

  // The closed forms claim: first value = max-kernel integral, second value
  // = min-kernel integral. Orient them identically for the comparison.
  const auto [claim_max, claim_min] = req.target == Target::MCCRI
                                          ? ccri_claimed_closed_forms(req)
                                          : scri_claimed_closed_forms(req);
  std::tie(rep.claimed_lower, rep.claimed_upper) =
      orient(req.gamma, psi_log(req.gamma, claim_max),
             psi_log(req.gamma, claim_min));

  auto compare = [](double numeric, double claimed, bool& flag, double& delta) {
    delta = std::abs(numeric - claimed);
    flag = std::isfinite(delta) && delta <= kAgreeTol;
  };
  compare(rep.numeric_lower, rep.claimed_lower, rep.lower_agrees,
          rep.lower_discrepancy);
  compare(rep.numeric_upper, rep.claimed_upper, rep.upper_agrees,
          rep.upper_discrepancy);
  return rep;
}

}  // namespace coprenyi::bounds
