#include "coprenyi/simulation.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "coprenyi/marginals.hpp"
#include "coprenyi/measures.hpp"
#include "coprenyi/rng.hpp"

namespace coprenyi::simulation {

namespace {

double population_reference(const SimulationConfig& cfg) {
  measures::MeasureRequest req;
  req.kind = measures::Kind::MCCRI;
  req.gamma = cfg.gamma;
  req.truth_copula = cfg.truth_x;
  req.reference_copula = cfg.truth_y;
  req.distortion = marginals::DistortionProfile::identity(
      cfg.truth_x.dimension, marginals::Scale::Cdf);
  req.integration = cfg.integration;
  // The reference must out-resolve the per-replication estimates; 1e-8
  // relative is orders below the study's sampling noise.
  req.integration.nodes_per_axis = std::max(req.integration.nodes_per_axis, 96);
  req.integration.rel_tol = std::min(req.integration.rel_tol, 1e-8);
  req.integration.max_refinements = std::max(req.integration.max_refinements, 2);
  return measures::evaluate(req).value;
}

}  // namespace

void SimulationConfig::validate() const {
  truth_x.validate();
  truth_y.validate();
  if (truth_x.dimension != truth_y.dimension)
    throw std::invalid_argument("truth copulas must share a dimension");
  if (!(gamma > 0.0) || std::abs(gamma - 1.0) <= 1e-9)
    throw std::invalid_argument("gamma must be > 0 and != 1");
  if (sample_sizes.empty())
    throw std::invalid_argument("at least one sample size is required");
  for (long n : sample_sizes)
    if (n < 20) throw std::invalid_argument("sample sizes must be >= 20");
  if (replications < 2)
    throw std::invalid_argument("replications must be >= 2");
  integration.validate();
}

SimulationReport run_study(const SimulationConfig& cfg) {
  cfg.validate();
  SimulationReport report;
  report.config = cfg;
  report.reference_value = population_reference(cfg);

  const int dim = cfg.truth_x.dimension;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t cell = 0; cell < cfg.sample_sizes.size(); ++cell) {
    const long n = cfg.sample_sizes[cell];
    std::vector<double> estimates(static_cast<std::size_t>(cfg.replications),
                                  nan);
    std::atomic<int> next{0};
    auto worker = [&] {
      quadrature::SerialSection serial;  // parallelism lives at the rep level
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= cfg.replications) return;
        const std::uint64_t base = rng::derive_seed(
            cfg.master_seed, static_cast<std::uint64_t>(cell),
            static_cast<std::uint64_t>(r));
        const std::uint64_t seed_x = rng::derive_seed(base, 1);
        const std::uint64_t seed_y = rng::derive_seed(base, 2);
        try {
          auto data_x = estimation::DataMatrix::from_rows(
              n, dim, copula::sample(cfg.truth_x, n, seed_x));
          auto data_y = estimation::DataMatrix::from_rows(
              n, dim, copula::sample(cfg.truth_y, n, seed_y));
          estimates[static_cast<std::size_t>(r)] =
              estimation::estimate_mccri(cfg.truth_x.family, data_x,
                                         cfg.truth_y.family, data_y, cfg.gamma,
                                         cfg.integration)
                  .value;
        } catch (...) {
          // slot stays NaN and is counted as an exclusion
        }
      }
    };
    const int workers =
        std::min(quadrature::worker_count(), cfg.replications);
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(workers));
      for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    CellReport cr;
    cr.sample_size = n;
    double sum = 0.0;
    for (double e : estimates) {
      if (std::isnan(e)) {
        ++cr.exclusions;
        continue;
      }
      sum += e;
      ++cr.replications_used;
    }
    if (cr.exclusions * 20 > cfg.replications) {
      std::ostringstream os;
      os << "cell n=" << n << ": " << cr.exclusions << " of "
         << cfg.replications << " replications failed to fit (> 5%)";
      throw std::runtime_error(os.str());
    }
    if (cr.replications_used == 0)
      throw std::runtime_error("no usable replications");
    cr.mean_estimate = sum / cr.replications_used;
    double var = 0.0, mse = 0.0;
    for (double e : estimates) {
      if (std::isnan(e)) continue;
      var += (e - cr.mean_estimate) * (e - cr.mean_estimate);
      mse += (e - report.reference_value) * (e - report.reference_value);
    }
    cr.sd = std::sqrt(var / cr.replications_used);
    cr.mse = mse / cr.replications_used;
    cr.ab = std::abs(cr.mean_estimate - report.reference_value);
    report.cells.push_back(cr);
  }
  return report;
}

}  // namespace coprenyi::simulation
