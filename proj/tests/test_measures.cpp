#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "coprenyi/copula.hpp"
#include "coprenyi/marginals.hpp"
#include "coprenyi/measures.hpp"

using namespace coprenyi;
using copula::CopulaModel;
using copula::Family;
using marginals::DistortionProfile;
using marginals::MarginalModel;
using marginals::Scale;
using measures::Kind;
using measures::MeasureRequest;

namespace {

MeasureRequest base_request(Kind kind, std::optional<double> gamma,
                            CopulaModel truth, std::optional<CopulaModel> ref) {
  MeasureRequest req;
  req.kind = kind;
  req.gamma = gamma;
  req.truth_copula = truth;
  req.reference_copula = ref;
  req.distortion =
      DistortionProfile::identity(truth.dimension, measures::kind_scale(kind));
  req.integration.nodes_per_axis = 64;
  req.integration.max_refinements = 1;
  return req;
}

const CopulaModel kProduct2{Family::Product, 2, 0.0};

}  // namespace

TEST_CASE("product-copula entropies have closed forms", "[measures]") {
  // gamma = 0.5 has an integrable corner singularity; give the rule room to
  // refine so all three orders meet the same tolerance.
  for (double gamma : {0.5, 2.0, 3.0}) {
    const double expected = 2.0 * std::log(gamma + 1.0) / (gamma - 1.0);
    auto creq = base_request(Kind::MCCRE, gamma, kProduct2, {});
    auto sreq = base_request(Kind::MSCRE, gamma, kProduct2, {});
    for (auto* req : {&creq, &sreq}) {
      req->integration.rel_tol = 1e-12;
      req->integration.max_refinements = 6;
    }
    REQUIRE_THAT(measures::evaluate(creq).value,
                 Catch::Matchers::WithinAbs(expected, 1e-10));
    REQUIRE_THAT(measures::evaluate(sreq).value,
                 Catch::Matchers::WithinAbs(expected, 1e-10));
  }
}

TEST_CASE("product-copula inaccuracies against themselves have closed forms",
          "[measures]") {
  // gamma = 2 so every integrand is a polynomial the rule nails exactly.
  auto ccri = measures::evaluate(base_request(Kind::MCCRI, 2.0, kProduct2, kProduct2));
  REQUIRE_THAT(ccri.value, Catch::Matchers::WithinAbs(-std::log(1.0 / 9.0), 1e-12));
  auto scri = measures::evaluate(base_request(Kind::MSCRI, 2.0, kProduct2, kProduct2));
  REQUIRE_THAT(scri.value, Catch::Matchers::WithinAbs(-std::log(1.0 / 9.0), 1e-12));
  // Co-copula 1-(1-u)(1-v) and dual 1-uv both integrate to 11/18 squared.
  auto cocri = measures::evaluate(base_request(Kind::MCoCRI, 2.0, kProduct2, kProduct2));
  REQUIRE_THAT(cocri.value, Catch::Matchers::WithinAbs(-std::log(11.0 / 18.0), 1e-12));
  auto dcri = measures::evaluate(base_request(Kind::MDCRI, 2.0, kProduct2, kProduct2));
  REQUIRE_THAT(dcri.value, Catch::Matchers::WithinAbs(-std::log(11.0 / 18.0), 1e-12));
}

TEST_CASE("Kerridge-type inaccuracy of independence is a quarter", "[measures]") {
  // -Int uv log(uv); the log corner needs a couple of refinement rounds.
  auto creq = base_request(Kind::CCI, {}, kProduct2, kProduct2);
  auto sreq = base_request(Kind::SCI, {}, kProduct2, kProduct2);
  for (auto* req : {&creq, &sreq}) {
    req->integration.rel_tol = 1e-12;
    req->integration.max_refinements = 6;
  }
  auto v = measures::evaluate(creq);
  REQUIRE_THAT(v.value, Catch::Matchers::WithinAbs(0.25, 1e-12));
  REQUIRE(std::isnan(v.gamma));
  auto s = measures::evaluate(sreq);
  REQUIRE_THAT(s.value, Catch::Matchers::WithinAbs(0.25, 1e-12));
}

TEST_CASE("survival-scale distortion reduces to a hand integral", "[measures]") {
  // Product copulas, exp(1) truth vs exp(2) reference marginals. The
  // survival-scale map is u -> u^2 per coordinate, so the integrand is
  // u v (u^2 v^2)^{gamma-1} = u^3 v^3 at gamma 2, integrating to 1/16.
  MeasureRequest req = base_request(Kind::MSCRI, 2.0, kProduct2, kProduct2);
  auto f = MarginalModel::exponential(1.0);
  auto g = MarginalModel::exponential(2.0);
  req.distortion = marginals::build_distortion({f, f}, {g, g}, Scale::Survival);
  auto v = measures::evaluate(req);
  REQUIRE_THAT(v.value,
               Catch::Matchers::WithinAbs(-std::log(1.0 / 16.0), 1e-12));
}

TEST_CASE("identity profile and same-marginal profile agree", "[measures]") {
  const CopulaModel truth{Family::Frank, 2, 2.0};
  const CopulaModel ref{Family::GumbelHougaard, 2, 2.0};
  MeasureRequest a = base_request(Kind::MCCRI, 3.0, truth, ref);
  MeasureRequest b = a;
  auto f = MarginalModel::exponential(1.7);
  b.distortion = marginals::build_distortion({f, f}, {f, f}, Scale::Cdf);
  REQUIRE_THAT(measures::evaluate(a).value,
               Catch::Matchers::WithinAbs(measures::evaluate(b).value, 1e-10));
}

TEST_CASE("a more concordant reference lowers the inaccuracy", "[measures]") {
  // Reference surfaces ordered pointwise => measures ordered the same way in
  // both gamma regimes (the negative power and the sign of psi cancel).
  const CopulaModel truth{Family::FGM, 2, 0.5};
  for (double gamma : {0.5, 3.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double phi : {1.0, 1.5, 2.5}) {
      const CopulaModel ref{Family::GumbelHougaard, 2, phi};
      const double v =
          measures::evaluate(base_request(Kind::MCCRI, gamma, truth, ref)).value;
      REQUIRE(v < prev);
      prev = v;
    }
  }
  // Kerridge variant follows the same ordering.
  double loose = measures::evaluate(base_request(Kind::CCI, {}, truth, kProduct2)).value;
  double tight =
      measures::evaluate(
          base_request(Kind::CCI, {}, truth, CopulaModel{Family::GumbelHougaard, 2, 2.0}))
          .value;
  REQUIRE(tight < loose);
}

TEST_CASE("a more concordant truth flips direction with the regime", "[measures]") {
  const CopulaModel ref{Family::Frank, 2, 1.5};
  auto value = [&](double gamma, double phi) {
    return measures::evaluate(
               base_request(Kind::MCCRI, gamma, CopulaModel{Family::GumbelHougaard, 2, phi}, ref))
        .value;
  };
  REQUIRE(value(3.0, 2.5) < value(3.0, 1.2));   // psi < 0
  REQUIRE(value(0.5, 2.5) > value(0.5, 1.2));   // psi > 0
}

TEST_CASE("entropy sign tracks the gamma regime", "[measures]") {
  for (const CopulaModel m : {kProduct2, CopulaModel{Family::GumbelHougaard, 2, 2.0},
                              CopulaModel{Family::Clayton, 2, 1.5}}) {
    REQUIRE(measures::evaluate(base_request(Kind::MCCRE, 3.0, m, {})).value > 0.0);
    REQUIRE(measures::evaluate(base_request(Kind::MCCRE, 0.5, m, {})).value < 0.0);
    REQUIRE(measures::evaluate(base_request(Kind::MSCRE, 3.0, m, {})).value > 0.0);
    REQUIRE(measures::evaluate(base_request(Kind::MSCRE, 0.5, m, {})).value < 0.0);
  }
}

TEST_CASE("radially symmetric models give matching cdf and survival measures",
          "[measures]") {
  // FGM and Frank both satisfy the reflection identity, so the survival-scale
  // measure coincides with the cdf-scale one.
  const CopulaModel x{Family::FGM, 2, 0.6};
  const CopulaModel y{Family::Frank, 2, 2.0};
  for (double gamma : {0.5, 3.0}) {
    auto c = measures::evaluate(base_request(Kind::MCCRI, gamma, x, y));
    auto s = measures::evaluate(base_request(Kind::MSCRI, gamma, x, y));
    REQUIRE_THAT(c.value, Catch::Matchers::WithinAbs(s.value, 1e-9));
  }
}

TEST_CASE("near gamma=1 the scaled value approaches the log integral",
          "[measures]") {
  // (gamma-1) * MCCRI -> -log Int C_X as gamma -> 1.
  const CopulaModel truth{Family::FGM, 2, 0.5};
  const CopulaModel ref{Family::GumbelHougaard, 2, 2.0};
  MeasureRequest probe = base_request(Kind::MCCRI, 1.0 + 1e-4, truth, ref);
  const double scaled = 1e-4 * measures::evaluate(probe).value;
  // Int C_X = 1/4 + theta/36 for FGM.
  const double log_mass = std::log(0.25 + 0.5 / 36.0);
  REQUIRE_THAT(scaled, Catch::Matchers::WithinAbs(-log_mass, 1e-3));
}

TEST_CASE("kind names round-trip", "[measures]") {
  for (Kind k : {Kind::MCCRI, Kind::MSCRI, Kind::MCoCRI, Kind::MDCRI, Kind::CCI,
                 Kind::SCI, Kind::MCCRE, Kind::MSCRE}) {
    REQUIRE(measures::kind_from_name(measures::kind_name(k)) == k);
  }
  REQUIRE(measures::kind_from_name("MCoCRI") == Kind::MCoCRI);
  REQUIRE(measures::kind_from_name("mdcri") == Kind::MDCRI);
  REQUIRE_THROWS_AS(measures::kind_from_name("entropy"), std::invalid_argument);
}

TEST_CASE("request validation enforces the kind contracts", "[measures]") {
  // Renyi kinds need gamma.
  REQUIRE_THROWS_AS(
      measures::evaluate(base_request(Kind::MCCRI, {}, kProduct2, kProduct2)),
      std::invalid_argument);
  // gamma = 1 is excluded.
  REQUIRE_THROWS_AS(
      measures::evaluate(base_request(Kind::MCCRI, 1.0, kProduct2, kProduct2)),
      std::invalid_argument);
  // Kerridge kinds refuse gamma.
  REQUIRE_THROWS_AS(
      measures::evaluate(base_request(Kind::CCI, 2.0, kProduct2, kProduct2)),
      std::invalid_argument);
  // Entropy kinds refuse a reference.
  REQUIRE_THROWS_AS(
      measures::evaluate(base_request(Kind::MCCRE, 2.0, kProduct2, kProduct2)),
      std::invalid_argument);
  // Inaccuracy kinds need a reference.
  REQUIRE_THROWS_AS(
      measures::evaluate(base_request(Kind::MSCRI, 2.0, kProduct2, {})),
      std::invalid_argument);
  // Scale mismatch between distortion and kind.
  MeasureRequest req = base_request(Kind::MCCRI, 2.0, kProduct2, kProduct2);
  req.distortion = DistortionProfile::identity(2, Scale::Survival);
  REQUIRE_THROWS_AS(measures::evaluate(req), std::invalid_argument);
  // Dimension mismatch between copulas.
  REQUIRE_THROWS_AS(
      measures::evaluate(base_request(Kind::MCCRI, 2.0, kProduct2,
                                      CopulaModel{Family::Frank, 3, 2.0})),
      std::invalid_argument);
}
