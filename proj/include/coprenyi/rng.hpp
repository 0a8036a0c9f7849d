#pragma once

#include <cstdint>

// Counter-based pseudo-random utilities.
//
// All randomness in the library flows through a single fixed generator: the
// SplitMix64 output function applied to seed + (index+1) * golden-gamma.
// Because the draw at position i depends only on (seed, i), any consumer can
// either walk a Stream sequentially or address draws directly by index
// (u01_at), which is what the deterministic parallel reductions rely on.
// The algorithms below (Box-Muller, Marsaglia-Tsang, Kanter's positive-stable
// construction, Kemp's logarithmic-series sampler, Sibuya inversion) are fixed
// so that a given seed reproduces the same draws in every build of this
// library.

namespace coprenyi::rng {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGoldenGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stateless access to the counter sequence of `seed`; index 0 is the first
// draw a Stream with the same seed would produce.
constexpr std::uint64_t u64_at(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed + (index + 1) * kGoldenGamma);
}

// Uniform draw strictly inside (0,1): (k + 0.5) * 2^-53 with k the top 53 bits.
constexpr double to_u01(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double u01_at(std::uint64_t seed, std::uint64_t index) noexcept {
  return to_u01(u64_at(seed, index));
}

// Derives an independent child seed from a master seed and up to two indices
// (e.g. simulation cell and replication). Chained mixing keeps children from
// colliding for any practical index ranges.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t s = mix64(master ^ 0x9E6C63D0876A9ULL);
  s = mix64(s + a * 0xD1342543DE82EF95ULL);
  s = mix64(s + b * 0x2545F4914F6CDD1DULL);
  return s;
}

// Sequential view over one counter sequence plus scalar distribution samplers.
// Every sampler consumes a deterministic (though data-dependent, for the
// rejection methods) number of uniforms, so a fixed seed fixes the output.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t next_u64() noexcept { return u64_at(seed_, counter_++); }
  double next_u01() noexcept { return to_u01(next_u64()); }

  double next_exponential() noexcept;           // rate 1
  double next_normal() noexcept;                // Box-Muller (two uniforms)
  double next_gamma(double shape);              // Marsaglia-Tsang
  double next_positive_stable(double alpha);    // Laplace transform exp(-t^alpha)
  std::uint64_t next_log_series(double p);      // P(V=k) proportional to p^k/k
  std::uint64_t next_sibuya(double alpha);      // P(V>n) = prod_{k<=n}(1-alpha/k)

  std::uint64_t draws_used() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace coprenyi::rng
