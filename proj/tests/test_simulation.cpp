#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "coprenyi/copula.hpp"
#include "coprenyi/marginals.hpp"
#include "coprenyi/measures.hpp"
#include "coprenyi/simulation.hpp"

using namespace coprenyi;
using copula::CopulaModel;
using copula::Family;
using simulation::SimulationConfig;

namespace {

quadrature::IntegrationConfig cheap() {
  quadrature::IntegrationConfig cfg;
  cfg.nodes_per_axis = 24;
  cfg.max_refinements = 0;
  return cfg;
}

SimulationConfig smoke_config() {
  SimulationConfig cfg;
  cfg.truth_x = CopulaModel{Family::Clayton, 2, 1.5};
  cfg.truth_y = CopulaModel{Family::GumbelHougaard, 2, 2.0};
  cfg.gamma = 3.0;
  cfg.sample_sizes = {50, 100};
  cfg.replications = 6;
  cfg.master_seed = 42;
  cfg.integration = cheap();
  return cfg;
}

}  // namespace

TEST_CASE("study layout and cell identities", "[simulation]") {
  auto cfg = smoke_config();
  auto rep = simulation::run_study(cfg);

  REQUIRE(rep.cells.size() == 2);
  REQUIRE(rep.cells[0].sample_size == 50);
  REQUIRE(rep.cells[1].sample_size == 100);
  REQUIRE(std::isfinite(rep.reference_value));

  for (const auto& cell : rep.cells) {
    REQUIRE(cell.replications_used == 6);
    REQUIRE(cell.exclusions == 0);
    REQUIRE(cell.sd >= 0.0);
    REQUIRE(cell.ab >= 0.0);
    // mse = sd^2 + ab^2 holds exactly up to rounding
    REQUIRE_THAT(cell.mse,
                 Catch::Matchers::WithinAbs(cell.sd * cell.sd + cell.ab * cell.ab,
                                            1e-15));
  }
}

TEST_CASE("reference value matches the reduced measure of the truths", "[simulation]") {
  auto cfg = smoke_config();
  auto rep = simulation::run_study(cfg);

  measures::MeasureRequest req;
  req.kind = measures::Kind::MCCRI;
  req.gamma = cfg.gamma;
  req.truth_copula = cfg.truth_x;
  req.reference_copula = cfg.truth_y;
  req.distortion = marginals::DistortionProfile::identity(2, marginals::Scale::Cdf);
  // The study promotes its reference to a high-resolution pass; mirror it.
  req.integration = cfg.integration;
  req.integration.nodes_per_axis = 96;
  req.integration.rel_tol = 1e-8;
  req.integration.max_refinements = 2;
  REQUIRE_THAT(rep.reference_value,
               Catch::Matchers::WithinAbs(measures::evaluate(req).value, 1e-10));
}

TEST_CASE("product truths estimate exactly with zero spread", "[simulation]") {
  SimulationConfig cfg;
  cfg.truth_x = CopulaModel{Family::Product, 2, 0.0};
  cfg.truth_y = CopulaModel{Family::Product, 2, 0.0};
  cfg.gamma = 3.0;
  cfg.sample_sizes = {60};
  cfg.replications = 4;
  cfg.master_seed = 9;
  cfg.integration = cheap();
  auto rep = simulation::run_study(cfg);

  // Nothing is fitted, so every replication returns the population value.
  REQUIRE_THAT(rep.reference_value,
               Catch::Matchers::WithinAbs(std::log(4.0), 1e-9));
  REQUIRE(rep.cells[0].sd == 0.0);
  REQUIRE(rep.cells[0].ab < 1e-12);
  REQUIRE(rep.cells[0].mse < 1e-20);
}

TEST_CASE("studies are bit-reproducible", "[simulation]") {
  auto cfg = smoke_config();
  auto a = simulation::run_study(cfg);
  auto b = simulation::run_study(cfg);
  REQUIRE(a.reference_value == b.reference_value);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    REQUIRE(a.cells[i].mean_estimate == b.cells[i].mean_estimate);
    REQUIRE(a.cells[i].sd == b.cells[i].sd);
    REQUIRE(a.cells[i].ab == b.cells[i].ab);
    REQUIRE(a.cells[i].mse == b.cells[i].mse);
  }

  auto cfg2 = cfg;
  cfg2.master_seed = 43;
  auto c = simulation::run_study(cfg2);
  REQUIRE(a.cells[0].mean_estimate != c.cells[0].mean_estimate);
}

TEST_CASE("error shrinks as the sample grows", "[simulation]") {
  SimulationConfig cfg;
  cfg.truth_x = CopulaModel{Family::Clayton, 2, 1.5};
  cfg.truth_y = CopulaModel{Family::GumbelHougaard, 2, 2.0};
  cfg.gamma = 3.0;
  cfg.sample_sizes = {40, 640};  // 16x the data: sd should drop by ~4x
  cfg.replications = 30;
  cfg.master_seed = 5;
  cfg.integration = cheap();
  auto rep = simulation::run_study(cfg);

  REQUIRE(rep.cells[1].sd < rep.cells[0].sd);
  REQUIRE(rep.cells[1].mse < rep.cells[0].mse);
}

TEST_CASE("simulation config validation", "[simulation]") {
  auto cfg = smoke_config();
  cfg.truth_y.dimension = 3;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = smoke_config();
  cfg.replications = 1;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = smoke_config();
  cfg.sample_sizes = {50, 10};
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = smoke_config();
  cfg.sample_sizes.clear();
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = smoke_config();
  cfg.gamma = 1.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}
