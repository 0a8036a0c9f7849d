#include "coprenyi/quadrature.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "coprenyi/rng.hpp"

namespace coprenyi::quadrature {

void IntegrationConfig::validate() const {
  if (nodes_per_axis < 2)
    throw std::invalid_argument("nodes_per_axis must be >= 2");
  if (mc_samples < 100) throw std::invalid_argument("mc_samples must be >= 100");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
  if (max_refinements < 0)
    throw std::invalid_argument("max_refinements must be >= 0");
}

namespace {
thread_local int g_serial_depth = 0;
}  // namespace

SerialSection::SerialSection() noexcept { ++g_serial_depth; }
SerialSection::~SerialSection() { --g_serial_depth; }

int worker_count() {
  if (g_serial_depth > 0) return 1;
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("COPRENYI_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env) n = cap < 1 ? 1 : std::min(n, static_cast<int>(cap));
  }
  return n;
}

namespace {

struct Rule {
  std::vector<double> nodes;    // on (0,1)
  std::vector<double> weights;  // sum to 1
};

// Newton iteration on P_n with the usual Chebyshev-like initial guess;
// standard-accuracy nodes are plenty for the counts used here (<= 4096).
Rule compute_rule(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.nodes[i] = 0.5 * (1.0 - x);  // descending x maps to ascending node
    r.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    r.weights[i] = 0.5 * w;
    r.weights[n - 1 - i] = 0.5 * w;
  }
  return r;
}

const Rule& cached_rule(int n) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

[[noreturn]] void throw_nonfinite(std::span<const double> u, double fu) {
  std::ostringstream os;
  os << "integrand returned non-finite value " << fu << " at (";
  for (std::size_t i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
  os << ")";
  throw std::runtime_error(os.str());
}

// Runs `chunks` units of work in parallel, then combines the per-chunk
// partial sums sequentially. Each chunk's internal loop is sequential, so the
// floating-point result does not depend on the thread count.
template <typename ChunkFn>
double chunked_sum(std::int64_t chunks, const ChunkFn& fn) {
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  const int workers = std::min<std::int64_t>(worker_count(), chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) partial[c] = fn(c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&] {
      for (;;) {
        const std::int64_t c = next.fetch_add(1);
        if (c >= chunks) return;
        try {
          partial[c] = fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double tensor_pass(const Integrand& f, int d, int n) {
  const Rule& rule = cached_rule(n);
  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  const std::int64_t chunk_len = 4096;
  const std::int64_t chunks = (total + chunk_len - 1) / chunk_len;
  return chunked_sum(chunks, [&](std::int64_t c) {
    const std::int64_t lo = c * chunk_len;
    const std::int64_t hi = std::min(lo + chunk_len, total);
    std::vector<double> u(d);
    double acc = 0.0;
    for (std::int64_t idx = lo; idx < hi; ++idx) {
      std::int64_t rem = idx;
      double w = 1.0;
      for (int k = d - 1; k >= 0; --k) {
        const int j = static_cast<int>(rem % n);
        rem /= n;
        u[k] = rule.nodes[j];
        w *= rule.weights[j];
      }
      const double fu = f(u);
      if (!std::isfinite(fu)) throw_nonfinite(u, fu);
      acc += w * fu;
    }
    return acc;
  });
}

IntegralEstimate integrate_tensor(const Integrand& f, int d,
                                  const IntegrationConfig& cfg) {
  if (d > 4)
    throw std::invalid_argument(
        "TensorGauss refused for dimension > 4; use MonteCarlo");
  int n = cfg.nodes_per_axis;
  double value = tensor_pass(f, d, n);
  int refinements = 0;
  while (refinements < cfg.max_refinements) {
    n *= 2;
    const double next = tensor_pass(f, d, n);
    ++refinements;
    const double scale = std::max(std::abs(next), 1e-300);
    const bool converged = std::abs(next - value) < cfg.rel_tol * scale;
    value = next;
    if (converged) break;
  }
  return IntegralEstimate{value, 0.0, refinements};
}

IntegralEstimate integrate_mc(const Integrand& f, int d,
                              const IntegrationConfig& cfg) {
  const std::int64_t n = cfg.mc_samples;
  const std::int64_t chunk_len = 8192;
  const std::int64_t chunks = (n + chunk_len - 1) / chunk_len;
  std::vector<double> sq(static_cast<std::size_t>(chunks), 0.0);
  const double sum = chunked_sum(chunks, [&](std::int64_t c) {
    const std::int64_t lo = c * chunk_len;
    const std::int64_t hi = std::min(lo + chunk_len, n);
    std::vector<double> u(d);
    double acc = 0.0, acc2 = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) {
      for (int k = 0; k < d; ++k)
        u[k] = rng::u01_at(cfg.seed, static_cast<std::uint64_t>(i) * d + k);
      const double fu = f(u);
      if (!std::isfinite(fu)) throw_nonfinite(u, fu);
      acc += fu;
      acc2 += fu * fu;
    }
    sq[static_cast<std::size_t>(c)] = acc2;
    return acc;
  });
  double sumsq = 0.0;
  for (double s : sq) sumsq += s;
  const double mean = sum / static_cast<double>(n);
  double var = sumsq / static_cast<double>(n) - mean * mean;
  if (var < 0.0) var = 0.0;
  const double se = std::sqrt(var / static_cast<double>(n));
  return IntegralEstimate{mean, se, 0};
}

}  // namespace

IntegralEstimate integrate(const Integrand& f, int d,
                           const IntegrationConfig& cfg) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  cfg.validate();
  return cfg.method == Method::TensorGauss ? integrate_tensor(f, d, cfg)
                                           : integrate_mc(f, d, cfg);
}

double beta_function(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("beta_function arguments must be > 0");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

const std::vector<double>& gauss_nodes(int n) {
  if (n < 1) throw std::invalid_argument("node count must be >= 1");
  return cached_rule(n).nodes;
}

const std::vector<double>& gauss_weights(int n) {
  if (n < 1) throw std::invalid_argument("node count must be >= 1");
  return cached_rule(n).weights;
}

}  // namespace coprenyi::quadrature
