#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

// Marginal distribution models and the coordinate distortion maps
// d_i(u) = G_i(F_i^{-1}(u)) (CDF scale) and d_i(u) = Gbar_i(Fbar_i^{-1}(u))
// (survival scale) that the measure integrands compose with copulas.

namespace coprenyi::marginals {

enum class Kind { Uniform01, Exponential, PRHRPower, Empirical };

struct MarginalModel {
  Kind kind = Kind::Uniform01;
  double rate = 1.0;           // Exponential
  double exponent = 1.0;       // PRHRPower: F = base^exponent
  std::shared_ptr<const MarginalModel> base;  // PRHRPower
  std::vector<double> sample;  // Empirical, kept sorted

  static MarginalModel uniform01();
  static MarginalModel exponential(double rate);
  static MarginalModel prhr_power(double exponent, MarginalModel base);
  static MarginalModel empirical(std::vector<double> sample);  // sorts

  void validate() const;  // throws std::invalid_argument

  double cdf(double x) const;
  double survival(double x) const;
  // Left-continuous generalized inverse (step function for Empirical).
  double quantile(double u) const;
  double survival_quantile(double u) const;
};

bool same_model(const MarginalModel& a, const MarginalModel& b);

enum class Scale { Cdf, Survival };

// One monotone map [0,1] -> [0,1] per coordinate, each fixing 0 and 1.
// Monotonicity is checked on a 1001-point grid at construction.
class DistortionProfile {
 public:
  // Empty placeholder (dimension 0); fill via identity/power/from_maps or
  // build_distortion before use.
  DistortionProfile() = default;

  Scale scale() const { return scale_; }
  int dimension() const { return static_cast<int>(maps_.size()); }
  bool is_identity() const { return identity_; }

  double apply(int coordinate, double u) const;
  void apply(std::span<const double> in, std::span<double> out) const;

  static DistortionProfile identity(int dimension, Scale scale);
  // Direct power maps u -> u^{e_i}; exponents must be positive.
  static DistortionProfile power(std::vector<double> exponents, Scale scale);
  static DistortionProfile from_maps(std::vector<std::function<double(double)>> maps,
                                     Scale scale);

 private:
  void validate_maps() const;
  Scale scale_ = Scale::Cdf;
  bool identity_ = false;
  std::vector<std::function<double(double)>> maps_;
  friend DistortionProfile build_distortion(const std::vector<MarginalModel>&,
                                            const std::vector<MarginalModel>&,
                                            Scale);
};

// Composes reference-through-truth maps coordinate by coordinate. Structural
// matches (identical models, power relations between CDFs or survivals)
// produce exact closed forms; anything else composes cdf/quantile
// numerically. Identical truth and reference give identity maps.
DistortionProfile build_distortion(const std::vector<MarginalModel>& truth,
                                   const std::vector<MarginalModel>& reference,
                                   Scale scale);

// Rank-based empirical CDF rescaled by n/(n+1): returns rank(x)/(n+1) with
// the rank clamped to [1, n], so values stay strictly inside (0,1).
// Right-continuous in x; sample must be sorted ascending.
double empirical_cdf(std::span<const double> sorted_sample, double x);

}  // namespace coprenyi::marginals
