#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "nlirf/model.hpp"

namespace nlirf {

/// Gamma(h)(i, j) = Cov(y_{i,t}, y_{j,t-h}).
struct AutocovSet {
  std::vector<int> lags;
  std::vector<Matrix> gammas;

  /// Throws DomainError when `lag` is absent.
  const Matrix& at(int lag) const;
};

/// Demeaned sample autocovariances with divisor T. Throws DegenerateVarianceError
/// for a constant column.
AutocovSet sample_autocov(const Matrix& series, const std::vector<int>& lags);

/// Autocovariances of y = A x for independent AR(1) sources x_j with coefficient
/// rho_j and innovation sd sigma_j: Gamma(h) = A diag(sigma_j^2 rho_j^h / (1 - rho_j^2)) A'.
AutocovSet population_autocov_ar1(const Vector& rho, const Vector& sigma, const Matrix& a,
                                  const std::vector<int>& lags);

/// Simulates independent AR(1) sources from zero with a 1000-step burn-in.
Matrix simulate_ar1_sources(const Vector& rho, const Vector& sigma, std::size_t T,
                            std::uint64_t seed);

struct MixingRegression {
  double alpha = 0.0;  // a21 / (1 + a12 a21)
  double beta = 0.0;   // a12 / (1 + a12 a21)
  double residual_norm = 0.0;
};

struct MixingEstimate {
  std::vector<double> roots;       // candidate a12 values
  std::vector<double> a21;         // implied a21 per root
  std::vector<Matrix> candidates;  // unit-diagonal mixing matrices
  MixingRegression regression;
  double smallest_singular_value = 0.0;
  double condition_diag = 0.0;     // smallest / largest singular value of the regressors
  bool underidentified = false;    // condition_diag < 1e-6
  bool triangular = false;         // a12 = 0 or a21 = 0 special case
  bool unidentified = false;       // some candidate has |1 + a12 a21| < 1e-8
  std::vector<std::string> warnings;
};

/// Regresses the symmetrized cross autocovariance (gamma_12 + gamma_21) / 2 on
/// (gamma_11, gamma_22) over the lags h >= 1 and solves the implied quadratic
/// d c a^2 - c a + d = 0 (c = alpha / beta, d = alpha) for a12.
/// Throws NoRealRootError on a negative discriminant.
MixingEstimate estimate_mixing(const AutocovSet& acs);

/// x_t = A^{-1} y_t for every row.
Matrix demix(const Matrix& series, const Matrix& a);
/// y_t = A x_t for every row.
Matrix mix(const Matrix& sources, const Matrix& a);

nlohmann::json mixing_to_json(const MixingEstimate& est);

// ---- Nonlinear covariance restrictions -------------------------------------------

struct TransformPair {
  std::string name;
  std::function<double(double)> a;
  std::function<double(double)> b;
};

/// {(x, x)}, {(x^2, x^2)}, ...: the same power on both sides for each listed power.
std::vector<TransformPair> power_transforms(const std::vector<int>& powers);

using ResidualFn = std::function<Matrix(const Vector& params, const Matrix& series)>;

/// params = (a12, a21, rho1, rho2): residuals x_t - diag(rho) x_{t-1} of the
/// demixed series x = A^{-1} y.
Matrix ar1_source_residuals(const Vector& params, const Matrix& series);

/// Sum of squared sample covariances Cov[a(e_{i,t}), b(e_{j,t-k})] over transform
/// pairs, lags k and component pairs (i != j when k = 0). Residual columns are
/// standardized first, so the value does not depend on residual scale.
double gcov_objective(const ResidualFn& resid, const Vector& params, const Matrix& series,
                      const std::vector<TransformPair>& transforms, const std::vector<int>& lags);

struct GcovTracePoint {
  std::size_t evaluation = 0;
  double objective = 0.0;
  Vector params;
};

struct GcovResult {
  Vector params;
  double objective = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
  std::vector<GcovTracePoint> trace;  // accepted improvements
  /// Smallest / largest eigenvalue of a finite-difference Hessian at the optimum.
  double curvature_ratio = 0.0;
  bool flat = false;                  // curvature_ratio < 1e-3
};

struct GcovOptions {
  std::size_t budget = 4000;
  double initial_step = 0.05;
  double tolerance = 1e-6;
};

/// Coordinate search with step halving; stops when the step falls below the
/// tolerance or the evaluation budget is spent (converged = false).
GcovResult gcov_estimate(const ResidualFn& resid, const Vector& init, const Matrix& series,
                         const std::vector<TransformPair>& transforms, const std::vector<int>& lags,
                         const GcovOptions& options = {});

struct RateCondition {
  Vector eta2;          // horizon-h conditional variances
  Vector slopes;        // rho_j^h / eta2_j, slope of the score in the lagged value
  Vector persistence;   // rho_j^h
  bool independent = false;
  bool degraded = false;  // max |rho_j^h| < 1e-6: the condition is numerically vacuous
};

/// Gaussian AR(1) sources at horizon h. `independent` compares rho_1^h and
/// rho_2^h (relative 1e-10), the scale-free part of the two slopes.
RateCondition source_rate_condition(double rho1, double rho2, double sigma1, double sigma2, int h);

}  // namespace nlirf
