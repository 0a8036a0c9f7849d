#pragma once

#include <vector>

#include "coprenyi/copula.hpp"
#include "coprenyi/measures.hpp"
#include "coprenyi/quadrature.hpp"

// Semiparametric copula fitting: rank-based pseudo-observations, maximum
// pseudo-likelihood (MPL) for the one-parameter families, Kendall-tau
// inversion as a cross-check, and the plug-in inaccuracy estimator that fits
// truth and reference families and evaluates the reduced-form MCCRI
// integral.

namespace coprenyi::estimation {

struct DataMatrix {
  long rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major, rows*cols finite reals

  double at(long r, int c) const {
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  // >= 10 rows, >= 2 columns, every value finite.
  void validate() const;

  static DataMatrix from_rows(long rows, int cols, std::vector<double> values);
};

// Column-wise average ranks divided by rows+1, so every entry lies strictly
// inside (0,1). Throws if any column is constant (ranks carry no
// information).
DataMatrix pseudo_observations(const DataMatrix& data);

enum class FitMethod { MPL, TauInversion };

struct EstimationResult {
  copula::Family family = copula::Family::Product;
  double theta_hat = 0.0;
  double log_pseudo_likelihood = 0.0;
  FitMethod method = FitMethod::MPL;
  int iterations = 0;
  bool converged = false;
};

// Maximizes sum log c_theta over the pseudo-observations by Brent's method
// (golden section with parabolic acceleration), tolerance 1e-8 on theta.
// The one-argument form uses a family bracket: Joe/Gumbel [1, 30], Clayton
// [1e-4, 30], Frank [-35, 35] bivariate / [1e-4, 40] otherwise, FGM/AMH
// [-1, 1]. Product has nothing to fit and returns immediately.
EstimationResult fit_mpl(copula::Family family, const DataMatrix& pseudo_obs);
EstimationResult fit_mpl(copula::Family family, const DataMatrix& pseudo_obs,
                         double lo, double hi);

// Sample Kendall tau; for more than two columns, the mean over column pairs.
double kendall_tau(const DataMatrix& data);

// Population tau of a family at a given parameter. Closed links for
// Gumbel (1 - 1/phi), Clayton (theta/(theta+2)) and FGM (2 theta/9);
// Frank/Joe/AMH integrate the Archimedean identity
// tau = 1 + 4 Int_0^1 phi(t)/phi'(t) dt.
double tau_link(copula::Family family, double theta);

// Inverts tau_link by bisection (tolerance 1e-8). Throws when tau is outside
// the family's attainable range (FGM |tau| <= 2/9, Gumbel/Clayton/Joe
// tau > 0, Frank |tau| below the bracket limit, AMH [-0.1817, 1/3)).
double tau_link_inverse(copula::Family family, double tau);

// Kendall tau of the data inverted through the family link; ranks only, so
// raw data and pseudo-observations give the same estimate.
EstimationResult fit_tau_inversion(copula::Family family,
                                   const DataMatrix& data);

// Fits family_x and family_y by MPL on the pseudo-observations of `data`,
// then evaluates psi(gamma) log Int C_X(u) C_Y(u)^{gamma-1} du with the
// fitted models (reduced form: both copulas read the same argument).
measures::MeasureValue estimate_mccri(copula::Family family_x,
                                      copula::Family family_y,
                                      const DataMatrix& data, double gamma,
                                      const quadrature::IntegrationConfig& integration);

// Two-sample form: the truth family is fitted on data_x and the reference
// family on data_y (equal column counts required).
measures::MeasureValue estimate_mccri(copula::Family family_x,
                                      const DataMatrix& data_x,
                                      copula::Family family_y,
                                      const DataMatrix& data_y, double gamma,
                                      const quadrature::IntegrationConfig& integration);

}  // namespace coprenyi::estimation
