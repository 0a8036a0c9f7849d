#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "coprenyi/copula.hpp"
#include "coprenyi/estimation.hpp"

using namespace coprenyi;
using copula::Family;
using estimation::DataMatrix;
using estimation::FitMethod;

namespace {

DataMatrix sampled(Family f, int dim, double theta, long rows, std::uint64_t seed) {
  copula::CopulaModel m{f, dim, theta};
  return DataMatrix::from_rows(rows, dim, copula::sample(m, rows, seed));
}

}  // namespace

TEST_CASE("pseudo-observations are average ranks over rows+1", "[estimation]") {
  // Column 0 is a permutation; column 1 carries a tie.
  std::vector<double> values;
  const std::vector<double> col0{3, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  for (int r = 0; r < 12; ++r) {
    values.push_back(col0[r]);
    values.push_back(r < 2 ? 0.5 : r + 1.0);  // rows 0 and 1 tie at 0.5
  }
  auto pobs = estimation::pseudo_observations(DataMatrix::from_rows(12, 2, values));
  REQUIRE_THAT(pobs.at(0, 0), Catch::Matchers::WithinAbs(3.0 / 13.0, 1e-15));
  REQUIRE_THAT(pobs.at(1, 0), Catch::Matchers::WithinAbs(1.0 / 13.0, 1e-15));
  REQUIRE_THAT(pobs.at(2, 0), Catch::Matchers::WithinAbs(2.0 / 13.0, 1e-15));
  REQUIRE_THAT(pobs.at(0, 1), Catch::Matchers::WithinAbs(1.5 / 13.0, 1e-15));
  REQUIRE_THAT(pobs.at(1, 1), Catch::Matchers::WithinAbs(1.5 / 13.0, 1e-15));
  REQUIRE_THAT(pobs.at(11, 1), Catch::Matchers::WithinAbs(12.0 / 13.0, 1e-15));
}

TEST_CASE("a constant column has no ranks", "[estimation]") {
  std::vector<double> values;
  for (int r = 0; r < 12; ++r) {
    values.push_back(r);
    values.push_back(7.0);
  }
  REQUIRE_THROWS_WITH(
      estimation::pseudo_observations(DataMatrix::from_rows(12, 2, values)),
      Catch::Matchers::ContainsSubstring("constant"));
}

TEST_CASE("data matrix validation", "[estimation]") {
  REQUIRE_THROWS_AS(DataMatrix::from_rows(5, 2, std::vector<double>(10, 0.5)),
                    std::invalid_argument);  // too few rows
  REQUIRE_THROWS_AS(DataMatrix::from_rows(12, 1, std::vector<double>(12, 0.5)),
                    std::invalid_argument);  // too few columns
  auto bad = std::vector<double>(24, 0.5);
  bad[7] = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(DataMatrix::from_rows(12, 2, bad), std::invalid_argument);
}

TEST_CASE("mpl recovers parameters from seeded draws", "[estimation]") {
  struct Case {
    Family family;
    int dim;
    double theta;
    double lo, hi;
  };
  for (const Case c : {Case{Family::GumbelHougaard, 2, 2.0, 1.90, 2.10},
                       Case{Family::Clayton, 2, 1.5, 1.35, 1.65},
                       Case{Family::Frank, 2, 4.0, 3.60, 4.40},
                       Case{Family::AMH, 2, 0.6, 0.45, 0.75},
                       Case{Family::Joe, 3, 1.5, 1.35, 1.70}}) {
    const long rows = c.dim == 3 ? 1500 : 4000;
    auto data = sampled(c.family, c.dim, c.theta, rows, 11);
    auto fit = estimation::fit_mpl(c.family, estimation::pseudo_observations(data));
    INFO(copula::family_name(c.family) << " got " << fit.theta_hat);
    REQUIRE(fit.converged);
    REQUIRE(fit.theta_hat >= c.lo);
    REQUIRE(fit.theta_hat <= c.hi);
    REQUIRE(fit.iterations > 0);
  }
}

TEST_CASE("mpl on independent data finds no FGM dependence", "[estimation]") {
  auto data = sampled(Family::Product, 2, 0.0, 4000, 5);
  auto fit = estimation::fit_mpl(Family::FGM, estimation::pseudo_observations(data));
  REQUIRE_THAT(fit.theta_hat, Catch::Matchers::WithinAbs(0.0, 0.12));
}

TEST_CASE("product family fits trivially", "[estimation]") {
  auto data = sampled(Family::GumbelHougaard, 2, 2.0, 200, 3);
  auto fit = estimation::fit_mpl(Family::Product, estimation::pseudo_observations(data));
  REQUIRE(fit.theta_hat == 0.0);
  REQUIRE(fit.log_pseudo_likelihood == 0.0);
  REQUIRE(fit.converged);
}

TEST_CASE("kendall tau on perfectly ordered data", "[estimation]") {
  std::vector<double> values;
  for (int r = 0; r < 12; ++r) {
    values.push_back(r);
    values.push_back(2.0 * r + 1.0);
  }
  REQUIRE(estimation::kendall_tau(DataMatrix::from_rows(12, 2, values)) == 1.0);
  values.clear();
  for (int r = 0; r < 12; ++r) {
    values.push_back(r);
    values.push_back(-r);
  }
  REQUIRE(estimation::kendall_tau(DataMatrix::from_rows(12, 2, values)) == -1.0);
}

TEST_CASE("tau links match closed forms", "[estimation]") {
  REQUIRE_THAT(estimation::tau_link(Family::GumbelHougaard, 2.0),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(estimation::tau_link(Family::Clayton, 2.0),
               Catch::Matchers::WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(estimation::tau_link(Family::FGM, 0.9),
               Catch::Matchers::WithinAbs(0.2, 1e-12));
  // Joe at theta=2: tau = 2 - pi^2/6.
  REQUIRE_THAT(estimation::tau_link(Family::Joe, 2.0),
               Catch::Matchers::WithinAbs(2.0 - std::numbers::pi * std::numbers::pi / 6.0,
                                          1e-8));
  // AMH closed form: 1 - 2(a + (1-a)^2 log(1-a)) / (3a^2).
  for (double a : {0.5, -1.0}) {
    const double expected =
        1.0 - 2.0 * (a + (1.0 - a) * (1.0 - a) * std::log1p(-a)) / (3.0 * a * a);
    REQUIRE_THAT(estimation::tau_link(Family::AMH, a),
                 Catch::Matchers::WithinAbs(expected, 1e-8));
  }
}

TEST_CASE("tau link inversion round-trips", "[estimation]") {
  struct Case {
    Family family;
    double theta;
  };
  for (const Case c : {Case{Family::GumbelHougaard, 2.5}, Case{Family::Clayton, 0.8},
                       Case{Family::Frank, 3.5}, Case{Family::Frank, -2.0},
                       Case{Family::Joe, 2.2}, Case{Family::AMH, 0.4},
                       Case{Family::AMH, -0.8}, Case{Family::FGM, 0.6}}) {
    const double tau = estimation::tau_link(c.family, c.theta);
    REQUIRE_THAT(estimation::tau_link_inverse(c.family, tau),
                 Catch::Matchers::WithinAbs(c.theta, 1e-6));
  }
}

TEST_CASE("tau inversion rejects unattainable values", "[estimation]") {
  REQUIRE_THROWS_AS(estimation::tau_link_inverse(Family::FGM, 0.3),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(estimation::tau_link_inverse(Family::AMH, 0.4),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(estimation::tau_link_inverse(Family::GumbelHougaard, -0.2),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(estimation::tau_link_inverse(Family::Frank, 0.0),
                    std::invalid_argument);
}

TEST_CASE("mpl and tau inversion agree on large samples", "[estimation]") {
  for (const auto& [family, theta] :
       {std::pair{Family::GumbelHougaard, 2.0}, std::pair{Family::Frank, 4.0},
        std::pair{Family::Clayton, 1.5}}) {
    auto data = sampled(family, 2, theta, 5000, 21);
    auto mpl = estimation::fit_mpl(family, estimation::pseudo_observations(data));
    auto tau = estimation::fit_tau_inversion(family, data);
    INFO(copula::family_name(family));
    REQUIRE(std::abs(mpl.theta_hat - tau.theta_hat) < 0.15);
    REQUIRE(tau.method == FitMethod::TauInversion);
  }
}

TEST_CASE("fits are invariant under strictly increasing transforms", "[estimation]") {
  auto data = sampled(Family::GumbelHougaard, 2, 2.0, 600, 17);
  std::vector<double> warped(data.values);
  for (long r = 0; r < data.rows; ++r) {
    warped[static_cast<std::size_t>(r) * 2] = std::exp(3.0 * data.at(r, 0));
    const double v = data.at(r, 1);
    warped[static_cast<std::size_t>(r) * 2 + 1] = v * v * v + 10.0 * v;
  }
  auto warped_data = DataMatrix::from_rows(data.rows, 2, warped);
  auto p1 = estimation::pseudo_observations(data);
  auto p2 = estimation::pseudo_observations(warped_data);
  REQUIRE(p1.values == p2.values);  // bit-identical
  auto f1 = estimation::fit_mpl(Family::GumbelHougaard, p1);
  auto f2 = estimation::fit_mpl(Family::GumbelHougaard, p2);
  REQUIRE(f1.theta_hat == f2.theta_hat);
  REQUIRE(f1.log_pseudo_likelihood == f2.log_pseudo_likelihood);
}

TEST_CASE("estimate_mccri of product families is exact", "[estimation]") {
  auto data = sampled(Family::GumbelHougaard, 2, 2.0, 500, 2);
  quadrature::IntegrationConfig cfg;
  cfg.nodes_per_axis = 32;
  auto v = estimation::estimate_mccri(Family::Product, Family::Product, data, 3.0, cfg);
  REQUIRE_THAT(v.value, Catch::Matchers::WithinAbs(std::log(4.0), 1e-10));
}

TEST_CASE("estimate_mccri approaches the population value", "[estimation]") {
  // Joe(1.5) truth, Gumbel(2) reference, trivariate.
  quadrature::IntegrationConfig cfg;
  cfg.nodes_per_axis = 32;
  cfg.max_refinements = 1;

  measures::MeasureRequest req;
  req.kind = measures::Kind::MCCRI;
  req.gamma = 3.0;
  req.truth_copula = copula::CopulaModel{Family::Joe, 3, 1.5};
  req.reference_copula = copula::CopulaModel{Family::GumbelHougaard, 3, 2.0};
  req.distortion = marginals::DistortionProfile::identity(3, marginals::Scale::Cdf);
  req.integration = cfg;
  const double population = measures::evaluate(req).value;

  auto data_x = sampled(Family::Joe, 3, 1.5, 2000, 31);
  auto data_y = sampled(Family::GumbelHougaard, 3, 2.0, 2000, 32);
  auto v = estimation::estimate_mccri(Family::Joe, data_x, Family::GumbelHougaard, data_y,
                                      3.0, cfg);
  REQUIRE(std::isfinite(v.value));
  REQUIRE_THAT(v.value, Catch::Matchers::WithinAbs(population, 0.08));
}
