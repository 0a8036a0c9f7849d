#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Parametric copula families: evaluation, survival/co-/dual transforms,
// analytic densities, seeded sampling, and pointwise-dominance checks.
//
// Families and admissible parameters:
//   FGM              |theta| <= 1, dimension 2 only
//   AMH              |alpha| <= 1, dimension 2 only
//   Joe              theta >= 1, any dimension
//   GumbelHougaard   phi >= 1, any dimension
//   Frank            theta != 0 (theta > 0 when dimension >= 3), any dimension
//   Clayton          theta > 0, any dimension
//   Product          no parameter, any dimension
// Boundary parameters (Joe/Gumbel at 1, FGM/AMH at 0, |Frank theta| below
// 1e-10) evaluate through the Product formulas to avoid 0/0.

namespace coprenyi::copula {

enum class Family { FGM, AMH, Joe, GumbelHougaard, Frank, Clayton, Product };

const char* family_name(Family f);
Family family_from_name(const std::string& name);  // case-insensitive

struct CopulaModel {
  Family family = Family::Product;
  int dimension = 2;
  double parameter = 0.0;  // ignored for Product

  // Throws std::invalid_argument when the parameter leaves the admissible
  // range or the family does not support the dimension.
  void validate() const;

  static CopulaModel make(Family f, int dimension, double parameter = 0.0);
};

// C(u); grounded, uniform margins.
double cdf(const CopulaModel& m, std::span<const double> u);

// Survival copula C^(u) = P(U_1 > 1-u_1, ..., U_n > 1-u_n). Dimension 2 uses
// u+v-1+C(1-u,1-v); higher dimensions use inclusion-exclusion over the
// margins of C (exchangeable families reuse the generator at lower
// dimension).
double survival_copula(const CopulaModel& m, std::span<const double> u);

// Co-copula C*(u) = 1 - C(1-u_1, ..., 1-u_n).
double co_copula(const CopulaModel& m, std::span<const double> u);

// Dual copula C~(u) = 1 - C^(1-u_1, ..., 1-u_n); equals u+v-C(u,v) at n=2.
double dual_copula(const CopulaModel& m, std::span<const double> u);

// Copula density c(u) = d^n C / du_1...du_n, analytic: bivariate closed
// forms for every family, generator-derivative formulas for trivariate
// Archimedean families. Evaluation points are clamped to [1e-12, 1-1e-12]
// because the Joe and Gumbel densities are unbounded at the corners.
// Throws for family/dimension combinations without an analytic formula.
double density(const CopulaModel& m, std::span<const double> u);

// count i.i.d. rows with copula m, row-major, all entries strictly in (0,1).
// Deterministic given (m, count, seed). Bivariate FGM/AMH use conditional
// inversion; Archimedean families use Marshall-Olkin frailties (positive
// stable for Gumbel, Sibuya for Joe, logarithmic series for Frank, gamma for
// Clayton).
std::vector<double> sample(const CopulaModel& m, std::int64_t count,
                           std::uint64_t seed);

enum class DominanceMode { Cdf, Survival };
enum class DominanceVerdict { a_dominates, b_dominates, equivalent, incomparable };

struct DominanceReport {
  DominanceVerdict verdict = DominanceVerdict::equivalent;
  // Largest pointwise excess in each direction over the grid (<= 0 means the
  // direction holds everywhere).
  double max_b_minus_a = 0.0;
  double max_a_minus_b = 0.0;
  // Smallest uniform shift that would make one surface dominate.
  double max_violation = 0.0;
};

// Evaluates both surfaces on the uniform grid with grid_per_axis points per
// axis (endpoints included) and reports the pointwise order.
DominanceReport check_pointwise_dominance(const CopulaModel& a,
                                          const CopulaModel& b,
                                          int grid_per_axis, DominanceMode mode);

}  // namespace coprenyi::copula
