#include "coprenyi/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace coprenyi::rng {

double Stream::next_exponential() noexcept { return -std::log(next_u01()); }

double Stream::next_normal() noexcept {
  // Box-Muller without spare caching: one normal always costs two uniforms,
  // which keeps the draw count easy to reason about.
  const double u1 = next_u01();
  const double u2 = next_u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Stream::next_gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back (Marsaglia-Tsang section 6).
    const double g = next_gamma(shape + 1.0);
    const double u = next_u01();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_u01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Stream::next_positive_stable(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("positive stable exponent must be in (0,1)");
  // Kanter's construction (the one-sided case of Chambers-Mallows-Stuck):
  // with T uniform on (0,pi) and W standard exponential,
  //   V = sin(alpha T) / sin(T)^(1/alpha) * (sin((1-alpha)T)/W)^((1-alpha)/alpha)
  // has Laplace transform exp(-t^alpha).
  const double t = M_PI * next_u01();
  const double w = next_exponential();
  const double ratio = (1.0 - alpha) / alpha;
  return std::sin(alpha * t) / std::pow(std::sin(t), 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * t) / w, ratio);
}

std::uint64_t Stream::next_log_series(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("log-series parameter must be in (0,1)");
  // Kemp's second accelerated generator: most draws resolve to 1 or 2 with a
  // single comparison; the general branch inverts via the tail exponent.
  const double r = std::log1p(-p);
  for (;;) {
    const double v = next_u01();
    if (v >= p) return 1;
    const double u = next_u01();
    const double q = -std::expm1(r * u);
    if (v <= q * q) {
      const double k = std::floor(1.0 + std::log(v) / std::log(q));
      if (k < 1.0 || k > 9.007e15) continue;  // guard degenerate corner
      return static_cast<std::uint64_t>(k);
    }
    return v >= q ? 1 : 2;
  }
}

std::uint64_t Stream::next_sibuya(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("Sibuya exponent must be in (0,1]");
  if (alpha == 1.0) return 1;
  // Exact inversion of the survival function
  //   G(n) = P(V > n) = prod_{k=1..n} (1 - alpha/k) = Gamma(n+1-alpha) /
  //          (Gamma(1-alpha) Gamma(n+1)),
  // so V = min{ n >= 1 : G(n) <= x } for x uniform. G(n) ~ n^-alpha /
  // Gamma(1-alpha) gives the starting guess; neighbouring values follow from
  // G(n)/G(n-1) = (n-alpha)/n, so the walk is exact.
  const double x = next_u01();
  const double lg1ma = std::lgamma(1.0 - alpha);
  double guess = std::pow(x * std::exp(lg1ma), -1.0 / alpha);
  if (!(guess >= 1.0)) guess = 1.0;
  if (guess > 1e15) guess = 1e15;
  std::uint64_t n = static_cast<std::uint64_t>(guess);
  auto log_surv = [&](std::uint64_t m) {
    return std::lgamma(static_cast<double>(m) + 1.0 - alpha) - lg1ma -
           std::lgamma(static_cast<double>(m) + 1.0);
  };
  const double logx = std::log(x);
  double ls = log_surv(n);
  while (ls > logx) {  // G(n) > x: move right
    ls += std::log1p(-alpha / static_cast<double>(n + 1));
    ++n;
  }
  while (n > 1) {  // ensure minimality: step left while G(n-1) <= x
    const double prev = ls - std::log1p(-alpha / static_cast<double>(n));
    if (prev > logx) break;
    ls = prev;
    --n;
  }
  return n;
}

}  // namespace coprenyi::rng
