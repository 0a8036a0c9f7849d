#include "coprenyi/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "coprenyi/marginals.hpp"

namespace coprenyi::estimation {

namespace {

constexpr double kThetaTol = 1e-8;
constexpr int kMaxIters = 200;

struct Bracket {
  double lo, hi;
};

Bracket default_bracket(copula::Family f, int dim) {
  using copula::Family;
  switch (f) {
    case Family::Joe:
    case Family::GumbelHougaard:
      return {1.0, 30.0};
    case Family::Clayton:
      return {1e-4, 30.0};
    case Family::Frank:
      return dim == 2 ? Bracket{-35.0, 35.0} : Bracket{1e-4, 40.0};
    case Family::FGM:
    case Family::AMH:
      return {-1.0, 1.0};
    case Family::Product:
      return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

double log_pseudo_likelihood(copula::Family f, double theta,
                             const DataMatrix& pseudo) {
  // Frank's parameter space excludes 0; a bracket crossing 0 treats that
  // point as independence, which is the continuous limit.
  if (f == copula::Family::Frank && theta == 0.0) return 0.0;
  const copula::CopulaModel m{f, pseudo.cols, theta};
  double total = 0.0;
  std::vector<double> row(static_cast<std::size_t>(pseudo.cols));
  for (long r = 0; r < pseudo.rows; ++r) {
    for (int c = 0; c < pseudo.cols; ++c) row[static_cast<std::size_t>(c)] = pseudo.at(r, c);
    const double dens = copula::density(m, row);
    total += std::log(std::max(dens, 1e-300));
  }
  return total;
}

// Brent's minimizer on [lo, hi]; returns (x, f(x), iterations).
struct BrentOut {
  double x, fx;
  int iterations;
};

template <typename F>
BrentOut brent_minimize(F f, double lo, double hi, double tol, int max_iter) {
  const double gold = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1 && std::isfinite(fx) && std::isfinite(fw) &&
        std::isfinite(fv)) {
      // parabolic fit through (x,fx),(w,fw),(v,fv)
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x < m ? b : a) - x;
      d = gold * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, it};
}

double generator_tau(copula::Family f, double theta) {
  // tau = 1 + 4 Int phi/phi' via 200-node Gauss-Legendre.
  using copula::Family;
  auto ratio = [&](double t) -> double {
    switch (f) {
      case Family::Frank: {
        const double num = -std::log(std::expm1(-theta * t) / std::expm1(-theta));
        const double dphi = theta * std::exp(-theta * t) / std::expm1(-theta * t);
        return num / dphi;
      }
      case Family::Joe: {
        const double p = std::exp(theta * std::log1p(-t));  // (1-t)^theta
        const double phi = -std::log1p(-p);
        const double dphi = -theta * p / ((1.0 - t) * (1.0 - p));
        return phi / dphi;
      }
      case Family::AMH: {
        // phi = log1p(a(1-t)/t) with a = 1-theta; the a -> 0 limit of
        // phi/phi' is -t(1-t) (generators are scale-equivalent).
        const double a = 1.0 - theta;
        if (std::abs(a) < 1e-12) return -t * (1.0 - t);
        const double z = a * (1.0 - t) / t;
        const double dphi = -a / (t * (t + a * (1.0 - t)));
        return std::log1p(z) / dphi;
      }
      default:
        throw std::logic_error("generator_tau: family has a closed link");
    }
  };
  const auto& xs = quadrature::gauss_nodes(200);
  const auto& ws = quadrature::gauss_weights(200);
  double acc = 0.0;
  for (int i = 0; i < 200; ++i) acc += ws[i] * ratio(xs[i]);
  return 1.0 + 4.0 * acc;
}

double invert_monotone_tau(copula::Family f, double tau, double lo, double hi) {
  double flo = tau_link(f, lo), fhi = tau_link(f, hi);
  if (tau < flo - 1e-12 || tau > fhi + 1e-12) {
    std::ostringstream os;
    os << "tau " << tau << " outside attainable range [" << flo << ", " << fhi
       << "] for " << copula::family_name(f);
    throw std::invalid_argument(os.str());
  }
  for (int i = 0; i < 200 && hi - lo > kThetaTol; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tau_link(f, mid) < tau ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void DataMatrix::validate() const {
  if (rows < 10) throw std::invalid_argument("data needs at least 10 rows");
  if (cols < 2) throw std::invalid_argument("data needs at least 2 columns");
  if (values.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("data shape does not match value count");
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("data must be finite (no missing values)");
}

DataMatrix DataMatrix::from_rows(long rows, int cols,
                                 std::vector<double> values) {
  DataMatrix d{rows, cols, std::move(values)};
  d.validate();
  return d;
}

DataMatrix pseudo_observations(const DataMatrix& data) {
  data.validate();
  DataMatrix out{data.rows, data.cols,
                 std::vector<double>(data.values.size())};
  std::vector<long> idx(static_cast<std::size_t>(data.rows));
  for (int c = 0; c < data.cols; ++c) {
    std::iota(idx.begin(), idx.end(), 0L);
    std::sort(idx.begin(), idx.end(), [&](long a, long b) {
      return data.at(a, c) < data.at(b, c);
    });
    if (data.at(idx.front(), c) == data.at(idx.back(), c)) {
      std::ostringstream os;
      os << "column " << c << " is constant; ranks are undefined";
      throw std::invalid_argument(os.str());
    }
    // average ranks over tie runs, 1-based, then divide by rows+1
    long i = 0;
    while (i < data.rows) {
      long j = i;
      while (j + 1 < data.rows &&
             data.at(idx[static_cast<std::size_t>(j + 1)], c) ==
                 data.at(idx[static_cast<std::size_t>(i)], c))
        ++j;
      const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
      const double u = avg_rank / static_cast<double>(data.rows + 1);
      for (long k = i; k <= j; ++k)
        out.values[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]) *
                       data.cols +
                   c] = u;
      i = j + 1;
    }
  }
  return out;
}

EstimationResult fit_mpl(copula::Family family, const DataMatrix& pseudo_obs) {
  const auto br = default_bracket(family, pseudo_obs.cols);
  return fit_mpl(family, pseudo_obs, br.lo, br.hi);
}

EstimationResult fit_mpl(copula::Family family, const DataMatrix& pseudo_obs,
                         double lo, double hi) {
  pseudo_obs.validate();
  EstimationResult res;
  res.family = family;
  res.method = FitMethod::MPL;
  if (family == copula::Family::Product) {
    res.theta_hat = 0.0;
    res.log_pseudo_likelihood = 0.0;
    res.converged = true;
    return res;
  }
  if (!(lo < hi))
    throw std::invalid_argument("search interval must satisfy lo < hi");
  // Endpoints must be admissible (Frank's bracket may cross its excluded 0).
  copula::CopulaModel{family, pseudo_obs.cols, lo}.validate();
  copula::CopulaModel{family, pseudo_obs.cols, hi}.validate();

  auto neg = [&](double t) {
    return -log_pseudo_likelihood(family, t, pseudo_obs);
  };
  const auto out = brent_minimize(neg, lo, hi, kThetaTol, kMaxIters);
  res.theta_hat = out.x;
  res.log_pseudo_likelihood = -out.fx;
  res.iterations = out.iterations;
  res.converged = std::isfinite(out.fx) && out.iterations < kMaxIters;
  if (family == copula::Family::Frank && std::abs(res.theta_hat) < 1e-6) {
    // An essentially-independent fit sits on Frank's excluded point; nudge
    // to the nearest admissible value.
    res.theta_hat = res.theta_hat < 0.0 ? -1e-6 : 1e-6;
  }
  return res;
}

double kendall_tau(const DataMatrix& data) {
  data.validate();
  double total = 0.0;
  int pairs = 0;
  for (int c1 = 0; c1 < data.cols; ++c1)
    for (int c2 = c1 + 1; c2 < data.cols; ++c2) {
      long long conc = 0, disc = 0;
      for (long i = 0; i < data.rows; ++i)
        for (long j = i + 1; j < data.rows; ++j) {
          const double du = data.at(i, c1) - data.at(j, c1);
          const double dv = data.at(i, c2) - data.at(j, c2);
          const double s = du * dv;
          if (s > 0) ++conc;
          else if (s < 0) ++disc;
        }
      const double denom = 0.5 * static_cast<double>(data.rows) *
                           static_cast<double>(data.rows - 1);
      total += static_cast<double>(conc - disc) / denom;
      ++pairs;
    }
  return total / pairs;
}

double tau_link(copula::Family family, double theta) {
  using copula::Family;
  switch (family) {
    case Family::GumbelHougaard:
      return 1.0 - 1.0 / theta;
    case Family::Clayton:
      return theta / (theta + 2.0);
    case Family::FGM:
      return 2.0 * theta / 9.0;
    case Family::Frank:
    case Family::Joe:
    case Family::AMH:
      return generator_tau(family, theta);
    case Family::Product:
      return 0.0;
  }
  return 0.0;
}

double tau_link_inverse(copula::Family family, double tau) {
  using copula::Family;
  switch (family) {
    case Family::GumbelHougaard:
      if (!(tau >= 0.0 && tau < 1.0))
        throw std::invalid_argument("Gumbel-Hougaard requires tau in [0, 1)");
      return 1.0 / (1.0 - tau);
    case Family::Clayton:
      if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("Clayton requires tau in (0, 1)");
      return 2.0 * tau / (1.0 - tau);
    case Family::FGM:
      if (std::abs(tau) > 2.0 / 9.0 + 1e-12)
        throw std::invalid_argument("FGM attains |tau| <= 2/9 only");
      return std::clamp(4.5 * tau, -1.0, 1.0);
    case Family::Frank:
      if (tau == 0.0)
        throw std::invalid_argument("Frank tau = 0 is the excluded independence point");
      return tau > 0.0 ? invert_monotone_tau(family, tau, 1e-6, 35.0)
                       : invert_monotone_tau(family, tau, -35.0, -1e-6);
    case Family::Joe:
      if (!(tau > 0.0))
        throw std::invalid_argument("Joe requires tau > 0");
      return invert_monotone_tau(family, tau, 1.0, 30.0);
    case Family::AMH:
      return invert_monotone_tau(family, tau, -1.0, 1.0);
    case Family::Product:
      return 0.0;
  }
  return 0.0;
}

EstimationResult fit_tau_inversion(copula::Family family,
                                   const DataMatrix& data) {
  data.validate();
  const double tau = kendall_tau(data);
  EstimationResult res;
  res.family = family;
  res.method = FitMethod::TauInversion;
  res.theta_hat = tau_link_inverse(family, tau);
  res.converged = true;
  if (family != copula::Family::Product && data.cols <= 3) {
    const auto pseudo = pseudo_observations(data);
    res.log_pseudo_likelihood =
        log_pseudo_likelihood(family, res.theta_hat, pseudo);
  }
  return res;
}

namespace {

measures::MeasureValue reduced_mccri(const copula::CopulaModel& x,
                                     const copula::CopulaModel& y, double gamma,
                                     const quadrature::IntegrationConfig& integration) {
  measures::MeasureRequest req;
  req.kind = measures::Kind::MCCRI;
  req.gamma = gamma;
  req.truth_copula = x;
  req.reference_copula = y;
  req.distortion = marginals::DistortionProfile::identity(
      x.dimension, marginals::Scale::Cdf);
  req.integration = integration;
  return measures::evaluate(req);
}

}  // namespace

measures::MeasureValue estimate_mccri(copula::Family family_x,
                                      copula::Family family_y,
                                      const DataMatrix& data, double gamma,
                                      const quadrature::IntegrationConfig& integration) {
  const auto pseudo = pseudo_observations(data);
  const auto fx = fit_mpl(family_x, pseudo);
  const auto fy = fit_mpl(family_y, pseudo);
  return reduced_mccri({family_x, data.cols, fx.theta_hat},
                       {family_y, data.cols, fy.theta_hat}, gamma, integration);
}

measures::MeasureValue estimate_mccri(copula::Family family_x,
                                      const DataMatrix& data_x,
                                      copula::Family family_y,
                                      const DataMatrix& data_y, double gamma,
                                      const quadrature::IntegrationConfig& integration) {
  if (data_x.cols != data_y.cols)
    throw std::invalid_argument("samples must have equal column counts");
  const auto fx = fit_mpl(family_x, pseudo_observations(data_x));
  const auto fy = fit_mpl(family_y, pseudo_observations(data_y));
  return reduced_mccri({family_x, data_x.cols, fx.theta_hat},
                       {family_y, data_y.cols, fy.theta_hat}, gamma, integration);
}

}  // namespace coprenyi::estimation
