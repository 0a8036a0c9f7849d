#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Numerical integration over the open unit hypercube (0,1)^d.
//
// Two rules are provided: a tensor-product Gauss-Legendre rule with
// node-doubling refinement (deterministic, used up to dimension 4) and a
// seeded Monte Carlo mean for higher dimensions. Both evaluate the integrand
// only at strictly interior points and both reduce their sums in a fixed
// chunk order, so results are bit-identical regardless of how many worker
// threads participate. The environment variable COPRENYI_THREADS caps the
// worker count.

namespace coprenyi::quadrature {

enum class Method { TensorGauss, MonteCarlo };

struct IntegrationConfig {
  Method method = Method::TensorGauss;
  int nodes_per_axis = 64;       // TensorGauss starting resolution
  long mc_samples = 200000;      // MonteCarlo sample count
  std::uint64_t seed = 0;        // MonteCarlo stream seed
  double rel_tol = 1e-6;         // refinement stop: relative change between doublings
  int max_refinements = 4;       // refinement cap (node count doubles each time)

  void validate() const;  // throws std::invalid_argument on a bad field
};

struct IntegralEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // 0 for the deterministic rule
  int refinements_used = 0;
};

using Integrand = std::function<double(std::span<const double>)>;

// Gauss-Legendre nodes/weights for the interval (0,1); cached per count.
// Nodes are computed by Newton iteration on the Legendre recurrence.
const std::vector<double>& gauss_nodes(int n);
const std::vector<double>& gauss_weights(int n);

// Integrates f over (0,1)^d. TensorGauss doubles nodes_per_axis until the
// estimate moves by less than rel_tol relatively or max_refinements is
// reached; it refuses d > 4 (cost guard) - use MonteCarlo there. A non-finite
// integrand value aborts with the offending node in the message.
IntegralEstimate integrate(const Integrand& f, int d, const IntegrationConfig& cfg);

// Complete beta function via log-gamma; relative error below 1e-12.
double beta_function(double a, double b);

// Worker count for internal parallel loops: hardware concurrency capped by
// the COPRENYI_THREADS environment variable (values < 1 mean 1).
int worker_count();

// While alive on a thread, integrate() calls from that thread run
// single-threaded. Callers that parallelize at a coarser grain (e.g. one
// simulation replication per worker) use this to avoid nested thread pools.
class SerialSection {
 public:
  SerialSection() noexcept;
  ~SerialSection();
  SerialSection(const SerialSection&) = delete;
  SerialSection& operator=(const SerialSection&) = delete;
};

}  // namespace coprenyi::quadrature
