#include "coprenyi/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace coprenyi::marginals {

namespace {

constexpr int kGridPoints = 1001;
constexpr double kMonotoneSlack = 1e-12;

double pin01(double u) { return std::clamp(u, 0.0, 1.0); }

}  // namespace

MarginalModel MarginalModel::uniform01() { return MarginalModel{}; }

MarginalModel MarginalModel::exponential(double rate) {
  MarginalModel m;
  m.kind = Kind::Exponential;
  m.rate = rate;
  m.validate();
  return m;
}

MarginalModel MarginalModel::prhr_power(double exponent, MarginalModel base) {
  MarginalModel m;
  m.kind = Kind::PRHRPower;
  m.exponent = exponent;
  m.base = std::make_shared<const MarginalModel>(std::move(base));
  m.validate();
  return m;
}

MarginalModel MarginalModel::empirical(std::vector<double> sample) {
  MarginalModel m;
  m.kind = Kind::Empirical;
  std::sort(sample.begin(), sample.end());
  m.sample = std::move(sample);
  m.validate();
  return m;
}

void MarginalModel::validate() const {
  switch (kind) {
    case Kind::Uniform01:
      break;
    case Kind::Exponential:
      if (!(rate > 0.0))
        throw std::invalid_argument("exponential rate must be > 0");
      break;
    case Kind::PRHRPower:
      if (!(exponent > 0.0))
        throw std::invalid_argument("PRHR exponent must be > 0");
      if (!base) throw std::invalid_argument("PRHR marginal needs a base");
      base->validate();
      break;
    case Kind::Empirical:
      if (sample.empty())
        throw std::invalid_argument("empirical sample must be nonempty");
      for (double x : sample)
        if (!std::isfinite(x))
          throw std::invalid_argument("empirical sample must be finite");
      break;
  }
}

double MarginalModel::cdf(double x) const {
  switch (kind) {
    case Kind::Uniform01:
      return pin01(x);
    case Kind::Exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-rate * x);
    case Kind::PRHRPower:
      return std::pow(base->cdf(x), exponent);
    case Kind::Empirical:
      return empirical_cdf(sample, x);
  }
  return 0.0;
}

double MarginalModel::survival(double x) const {
  switch (kind) {
    case Kind::Exponential:
      return x <= 0.0 ? 1.0 : std::exp(-rate * x);
    default:
      return 1.0 - cdf(x);
  }
}

double MarginalModel::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument("quantile argument outside [0,1]");
  switch (kind) {
    case Kind::Uniform01:
      return u;
    case Kind::Exponential:
      return -std::log1p(-u) / rate;
    case Kind::PRHRPower:
      return base->quantile(std::pow(u, 1.0 / exponent));
    case Kind::Empirical: {
      // smallest k with k/(n+1) >= u, clamped into the sample
      const auto n = static_cast<long>(sample.size());
      long k = static_cast<long>(std::ceil(u * (n + 1)));
      k = std::clamp(k, 1L, n);
      return sample[static_cast<std::size_t>(k - 1)];
    }
  }
  return 0.0;
}

double MarginalModel::survival_quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument("quantile argument outside [0,1]");
  switch (kind) {
    case Kind::Exponential:
      return u == 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::log(u) / rate;
    default:
      return quantile(1.0 - u);
  }
}

bool same_model(const MarginalModel& a, const MarginalModel& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Uniform01:
      return true;
    case Kind::Exponential:
      return a.rate == b.rate;
    case Kind::PRHRPower:
      return a.exponent == b.exponent && same_model(*a.base, *b.base);
    case Kind::Empirical:
      return a.sample == b.sample;
  }
  return false;
}

double empirical_cdf(std::span<const double> sorted_sample, double x) {
  if (sorted_sample.empty())
    throw std::invalid_argument("empirical sample must be nonempty");
  const auto n = static_cast<long>(sorted_sample.size());
  long rank = std::upper_bound(sorted_sample.begin(), sorted_sample.end(), x) -
              sorted_sample.begin();
  rank = std::clamp(rank, 1L, n);
  return static_cast<double>(rank) / static_cast<double>(n + 1);
}

double DistortionProfile::apply(int coordinate, double u) const {
  return maps_[static_cast<std::size_t>(coordinate)](u);
}

void DistortionProfile::apply(std::span<const double> in,
                              std::span<double> out) const {
  if (in.size() != maps_.size() || out.size() != maps_.size())
    throw std::invalid_argument("distortion applied to wrong dimension");
  for (std::size_t i = 0; i < maps_.size(); ++i) out[i] = maps_[i](in[i]);
}

void DistortionProfile::validate_maps() const {
  for (const auto& map : maps_) {
    double prev = map(0.0);
    if (std::abs(prev) > 1e-12)
      throw std::invalid_argument("distortion map must fix 0");
    for (int k = 1; k < kGridPoints; ++k) {
      const double u = static_cast<double>(k) / (kGridPoints - 1);
      const double v = map(u);
      if (v < prev - kMonotoneSlack)
        throw std::invalid_argument("distortion map must be nondecreasing");
      prev = v;
    }
    if (std::abs(prev - 1.0) > 1e-12)
      throw std::invalid_argument("distortion map must fix 1");
  }
}

DistortionProfile DistortionProfile::identity(int dimension, Scale scale) {
  if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  DistortionProfile p;
  p.scale_ = scale;
  p.identity_ = true;
  for (int i = 0; i < dimension; ++i)
    p.maps_.emplace_back([](double u) { return pin01(u); });
  return p;
}

DistortionProfile DistortionProfile::power(std::vector<double> exponents,
                                           Scale scale) {
  if (exponents.empty()) throw std::invalid_argument("dimension must be >= 1");
  DistortionProfile p;
  p.scale_ = scale;
  p.identity_ = std::all_of(exponents.begin(), exponents.end(),
                            [](double e) { return e == 1.0; });
  for (double e : exponents) {
    if (!(e > 0.0)) throw std::invalid_argument("power exponent must be > 0");
    p.maps_.emplace_back([e](double u) {
      u = pin01(u);
      return u == 0.0 ? 0.0 : u == 1.0 ? 1.0 : std::pow(u, e);
    });
  }
  p.validate_maps();
  return p;
}

DistortionProfile DistortionProfile::from_maps(
    std::vector<std::function<double(double)>> maps, Scale scale) {
  if (maps.empty()) throw std::invalid_argument("dimension must be >= 1");
  DistortionProfile p;
  p.scale_ = scale;
  p.identity_ = false;
  p.maps_ = std::move(maps);
  p.validate_maps();
  return p;
}

namespace {

// Structural relation between two marginals: G = F^e (CDF power) or
// Gbar = Fbar^e (survival power). Either gives an exact distortion map on
// both scales without numeric inversion.
struct PowerRelation {
  enum { CdfPower, SurvivalPower } which;
  double exponent;
};

// Peels PRHRPower wrappers: model = core^accumulated.
std::pair<const MarginalModel*, double> peel(const MarginalModel& m) {
  const MarginalModel* cur = &m;
  double acc = 1.0;
  while (cur->kind == Kind::PRHRPower) {
    acc *= cur->exponent;
    cur = cur->base.get();
  }
  return {cur, acc};
}

std::optional<PowerRelation> power_relation(const MarginalModel& truth,
                                            const MarginalModel& reference) {
  const auto [tc, te] = peel(truth);
  const auto [rc, re] = peel(reference);
  if (tc->kind == Kind::Exponential && rc->kind == Kind::Exponential) {
    // Fbar = e^{-lambda x}: survival power with exponent ratio, provided the
    // PRHR layers are trivial (a power of an exponential CDF is neither a
    // CDF power nor a survival power of the other).
    if (te == 1.0 && re == 1.0)
      return PowerRelation{PowerRelation::SurvivalPower, rc->rate / tc->rate};
    if (same_model(*tc, *rc))
      return PowerRelation{PowerRelation::CdfPower, re / te};
    return std::nullopt;
  }
  if (same_model(*tc, *rc))
    return PowerRelation{PowerRelation::CdfPower, re / te};
  return std::nullopt;
}

std::function<double(double)> exact_power_map(PowerRelation rel, Scale scale) {
  const double e = rel.exponent;
  const bool direct = (rel.which == PowerRelation::CdfPower) ==
                      (scale == Scale::Cdf);
  if (direct) {
    // d(u) = u^e on the matching scale
    return [e](double u) {
      u = pin01(u);
      return u == 0.0 ? 0.0 : u == 1.0 ? 1.0 : std::pow(u, e);
    };
  }
  // opposite scale: d(u) = 1 - (1-u)^e
  return [e](double u) {
    u = pin01(u);
    return u == 0.0 ? 0.0
           : u == 1.0
               ? 1.0
               : -std::expm1(e * std::log1p(-u));
  };
}

std::function<double(double)> numeric_map(const MarginalModel& truth,
                                          const MarginalModel& reference,
                                          Scale scale) {
  if (scale == Scale::Cdf) {
    return [truth, reference](double u) {
      u = pin01(u);
      if (u == 0.0) return 0.0;
      if (u == 1.0) return 1.0;
      return pin01(reference.cdf(truth.quantile(u)));
    };
  }
  return [truth, reference](double u) {
    u = pin01(u);
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    return pin01(reference.survival(truth.survival_quantile(u)));
  };
}

}  // namespace

DistortionProfile build_distortion(const std::vector<MarginalModel>& truth,
                                   const std::vector<MarginalModel>& reference,
                                   Scale scale) {
  if (truth.size() != reference.size())
    throw std::invalid_argument(
        "truth and reference marginal lists must have equal length");
  if (truth.empty()) throw std::invalid_argument("dimension must be >= 1");

  DistortionProfile p;
  p.scale_ = scale;
  p.identity_ = true;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    truth[i].validate();
    reference[i].validate();
    if (same_model(truth[i], reference[i])) {
      p.maps_.emplace_back([](double u) { return pin01(u); });
      continue;
    }
    p.identity_ = false;
    if (auto rel = power_relation(truth[i], reference[i]))
      p.maps_.push_back(exact_power_map(*rel, scale));
    else
      p.maps_.push_back(numeric_map(truth[i], reference[i], scale));
  }
  p.validate_maps();
  return p;
}

}  // namespace coprenyi::marginals
