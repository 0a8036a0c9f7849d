#include "coprenyi/measures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace coprenyi::measures {

namespace {

constexpr double kGammaGap = 1e-9;

using Surface = double (*)(const copula::CopulaModel&, std::span<const double>);

Surface surface_for(Kind k) {
  switch (k) {
    case Kind::MCCRI:
    case Kind::CCI:
    case Kind::MCCRE:
      return &copula::cdf;
    case Kind::MSCRI:
    case Kind::SCI:
    case Kind::MSCRE:
      return &copula::survival_copula;
    case Kind::MCoCRI:
      return &copula::co_copula;
    case Kind::MDCRI:
      return &copula::dual_copula;
  }
  throw std::logic_error("unreachable kind");
}

double psi(double gamma) { return 1.0 / (1.0 - gamma); }

MeasureValue finish_renyi(const MeasureRequest& req,
                          quadrature::IntegralEstimate est) {
  if (!std::isfinite(est.value) || est.value <= 0.0) {
    std::ostringstream os;
    os << kind_name(req.kind) << " integral is " << est.value
       << "; configuration is degenerate";
    throw std::domain_error(os.str());
  }
  MeasureValue out;
  out.kind = req.kind;
  out.gamma = *req.gamma;
  out.integral = est;
  out.value = psi(*req.gamma) * std::log(est.value);
  if (!std::isfinite(out.value))
    throw std::domain_error("measure value is non-finite");
  return out;
}

MeasureValue finish_log_kind(const MeasureRequest& req,
                             quadrature::IntegralEstimate est) {
  if (!std::isfinite(est.value)) {
    std::ostringstream os;
    os << kind_name(req.kind)
       << " integral is non-finite; the reference surface vanishes on a "
          "region of positive truth mass";
    throw std::domain_error(os.str());
  }
  MeasureValue out;
  out.kind = req.kind;
  out.gamma = std::numeric_limits<double>::quiet_NaN();
  out.integral = est;
  out.value = -est.value;
  return out;
}

MeasureValue evaluate_entropy(const MeasureRequest& req) {
  const Surface surf = surface_for(req.kind);
  const double gamma = *req.gamma;
  const auto& model = req.truth_copula;
  quadrature::Integrand f = [&](std::span<const double> u) {
    const double a = surf(model, u);
    return a <= 0.0 ? 0.0 : std::pow(a, gamma);
  };
  return finish_renyi(req, integrate(f, model.dimension, req.integration));
}

MeasureValue evaluate_inaccuracy(const MeasureRequest& req) {
  const Surface surf = surface_for(req.kind);
  const auto& truth = req.truth_copula;
  const auto& ref = *req.reference_copula;
  const auto& dist = req.distortion;
  const int d = truth.dimension;
  const bool log_kind = !kind_uses_gamma(req.kind);
  const double expo = log_kind ? 0.0 : *req.gamma - 1.0;

  quadrature::Integrand f = [&, d](std::span<const double> u) {
    const double a = surf(truth, u);
    if (a <= 0.0) return 0.0;  // 0 * log 0 and 0 * 0^{gamma-1} read as 0
    thread_local std::vector<double> w;
    w.resize(static_cast<std::size_t>(d));
    dist.apply(u, w);
    const double b = surf(ref, w);
    if (log_kind)
      return b <= 0.0 ? std::numeric_limits<double>::infinity()
                      : a * std::log(b);
    if (b <= 0.0)
      return expo > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return a * std::pow(b, expo);
  };
  auto est = integrate(f, d, req.integration);
  return log_kind ? finish_log_kind(req, est) : finish_renyi(req, est);
}

MeasureValue checked(const MeasureRequest& req, Kind expect) {
  if (req.kind != expect) {
    std::ostringstream os;
    os << "request kind " << kind_name(req.kind) << " passed to "
       << kind_name(expect) << " entry point";
    throw std::invalid_argument(os.str());
  }
  return evaluate(req);
}

}  // namespace

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::MCCRI: return "mccri";
    case Kind::MSCRI: return "mscri";
    case Kind::MCoCRI: return "cocri";
    case Kind::MDCRI: return "dcri";
    case Kind::CCI: return "cci";
    case Kind::SCI: return "sci";
    case Kind::MCCRE: return "mccre";
    case Kind::MSCRE: return "mscre";
  }
  return "?";
}

Kind kind_from_name(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "mccri") return Kind::MCCRI;
  if (s == "mscri") return Kind::MSCRI;
  if (s == "cocri" || s == "mcocri") return Kind::MCoCRI;
  if (s == "dcri" || s == "mdcri") return Kind::MDCRI;
  if (s == "cci") return Kind::CCI;
  if (s == "sci") return Kind::SCI;
  if (s == "mccre") return Kind::MCCRE;
  if (s == "mscre") return Kind::MSCRE;
  throw std::invalid_argument("unknown measure kind: " + name);
}

bool kind_uses_gamma(Kind k) { return k != Kind::CCI && k != Kind::SCI; }

bool kind_uses_reference(Kind k) {
  return k != Kind::MCCRE && k != Kind::MSCRE;
}

marginals::Scale kind_scale(Kind k) {
  switch (k) {
    case Kind::MSCRI:
    case Kind::SCI:
    case Kind::MSCRE:
      return marginals::Scale::Survival;
    default:
      return marginals::Scale::Cdf;
  }
}

void MeasureRequest::validate() const {
  truth_copula.validate();
  if (kind_uses_gamma(kind)) {
    if (!gamma)
      throw std::invalid_argument(std::string(kind_name(kind)) +
                                  " requires gamma");
    if (!(*gamma > 0.0))
      throw std::invalid_argument("gamma must be > 0");
    if (std::abs(*gamma - 1.0) <= kGammaGap)
      throw std::invalid_argument("gamma must differ from 1 by more than 1e-9");
  } else if (gamma) {
    throw std::invalid_argument(std::string(kind_name(kind)) +
                                " takes no gamma");
  }
  if (kind_uses_reference(kind)) {
    if (!reference_copula)
      throw std::invalid_argument(std::string(kind_name(kind)) +
                                  " requires a reference copula");
    reference_copula->validate();
    if (reference_copula->dimension != truth_copula.dimension)
      throw std::invalid_argument(
          "truth and reference copulas must share a dimension");
  } else if (reference_copula) {
    throw std::invalid_argument(std::string(kind_name(kind)) +
                                " takes no reference copula");
  }
  if (distortion.dimension() != truth_copula.dimension)
    throw std::invalid_argument(
        "distortion dimension must match the copula dimension");
  if (distortion.scale() != kind_scale(kind)) {
    std::ostringstream os;
    os << kind_name(kind) << " needs a "
       << (kind_scale(kind) == marginals::Scale::Cdf ? "CDF" : "survival")
       << "-scale distortion";
    throw std::invalid_argument(os.str());
  }
  integration.validate();
}

MeasureValue evaluate(const MeasureRequest& req) {
  req.validate();
  return kind_uses_reference(req.kind) ? evaluate_inaccuracy(req)
                                       : evaluate_entropy(req);
}

MeasureValue mccri(const MeasureRequest& req) { return checked(req, Kind::MCCRI); }
MeasureValue mscri(const MeasureRequest& req) { return checked(req, Kind::MSCRI); }
MeasureValue cocri(const MeasureRequest& req) { return checked(req, Kind::MCoCRI); }
MeasureValue dcri(const MeasureRequest& req) { return checked(req, Kind::MDCRI); }
MeasureValue cci(const MeasureRequest& req) { return checked(req, Kind::CCI); }
MeasureValue sci(const MeasureRequest& req) { return checked(req, Kind::SCI); }
MeasureValue mccre(const MeasureRequest& req) { return checked(req, Kind::MCCRE); }
MeasureValue mscre(const MeasureRequest& req) { return checked(req, Kind::MSCRE); }

}  // namespace coprenyi::measures
