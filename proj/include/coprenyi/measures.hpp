#pragma once

#include <optional>
#include <string>

#include "coprenyi/copula.hpp"
#include "coprenyi/marginals.hpp"
#include "coprenyi/quadrature.hpp"

// Copula-based cumulative Renyi inaccuracy and entropy functionals, all of
// the form psi(gamma) * log of a hypercube integral with psi(gamma) =
// 1/(1-gamma), plus the log-kind (Kerridge-type) inaccuracies CCI/SCI.
//
//   MCCRI   psi * log  Int C_X(u)        * C_Y(d(u))^{gamma-1}  du
//   MSCRI   psi * log  Int Chat_X(u)     * Chat_Y(d(u))^{gamma-1} du
//   MCoCRI  psi * log  Int Cstar_X(u)    * Cstar_Y(d(u))^{gamma-1} du
//   MDCRI   psi * log  Int Cdual_X(u)    * Cdual_Y(d(u))^{gamma-1} du
//   CCI          -     Int C_X(u)        * log C_Y(d(u))  du
//   SCI          -     Int Chat_X(u)     * log Chat_Y(d(u)) du
//   MCCRE   psi * log  Int C_X(u)^gamma  du
//   MSCRE   psi * log  Int Chat_X(u)^gamma du
//
// d is the coordinatewise distortion profile: CDF scale for
// MCCRI/MCoCRI/MDCRI/CCI/MCCRE, survival scale for MSCRI/SCI/MSCRE.

namespace coprenyi::measures {

enum class Kind { MCCRI, MSCRI, MCoCRI, MDCRI, CCI, SCI, MCCRE, MSCRE };

const char* kind_name(Kind k);
Kind kind_from_name(const std::string& name);  // case-insensitive

bool kind_uses_gamma(Kind k);      // all but CCI/SCI
bool kind_uses_reference(Kind k);  // all but MCCRE/MSCRE
marginals::Scale kind_scale(Kind k);

struct MeasureRequest {
  Kind kind = Kind::MCCRI;
  // Required for Renyi kinds (> 0, |gamma-1| > 1e-9); must be absent for
  // CCI/SCI.
  std::optional<double> gamma;
  copula::CopulaModel truth_copula;
  // Required for inaccuracy kinds; must be absent for MCCRE/MSCRE.
  std::optional<copula::CopulaModel> reference_copula;
  // Dimension must match the copulas and the scale must match the kind. The
  // entropy kinds carry no reference surface, so their integrands never apply
  // the maps; the profile still pins the expected scale and dimension.
  marginals::DistortionProfile distortion;
  quadrature::IntegrationConfig integration;

  void validate() const;  // throws std::invalid_argument
};

struct MeasureValue {
  Kind kind = Kind::MCCRI;
  double value = 0.0;
  double gamma = 0.0;  // NaN for CCI/SCI
  quadrature::IntegralEstimate integral;
};

// Dispatch on req.kind. Throws std::invalid_argument for an invalid request
// and std::domain_error when the integral is non-positive or non-finite
// (degenerate configuration).
MeasureValue evaluate(const MeasureRequest& req);

// Kind-checked wrappers; each throws if req.kind disagrees.
MeasureValue mccri(const MeasureRequest& req);
MeasureValue mscri(const MeasureRequest& req);
MeasureValue cocri(const MeasureRequest& req);
MeasureValue dcri(const MeasureRequest& req);
MeasureValue cci(const MeasureRequest& req);
MeasureValue sci(const MeasureRequest& req);
MeasureValue mccre(const MeasureRequest& req);
MeasureValue mscre(const MeasureRequest& req);

}  // namespace coprenyi::measures
