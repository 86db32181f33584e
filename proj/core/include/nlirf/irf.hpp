#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nlirf/model.hpp"

namespace nlirf {

enum class ShockKind { kInnovation, kObservable };

/// Innovation shock delta (added to eps_t) or observable shock Delta (added to y_t),
/// with horizon budget H >= 0.
struct ShockSpec {
  ShockKind kind = ShockKind::kInnovation;
  Vector vector;
  int horizon = 0;
};

enum class IrfKind { kSingleDraw, kEirfMean, kCirfCov };

struct IRFResult {
  Matrix per_horizon;               // (H+1) x n; for kCirfCov the per-horizon variances
  IrfKind kind = IrfKind::kSingleDraw;
  std::optional<Matrix> mc_stderr;  // (H+1) x n, Monte Carlo results only
  std::size_t n_replicates = 1;
  Vector conditioning_state;
  /// kCirfCov: one (H+1) x (H+1) covariance across horizons per component.
  std::vector<Matrix> covariance;
};

/// Replicates are processed in fixed chunks and merged in chunk order, so the
/// result does not depend on `workers` (0 means hardware concurrency).
struct McOptions {
  std::size_t replicates = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Row h is y^(delta)_{t+h} - y_{t+h}: both paths start from g(y_prev, eps_t [+ delta])
/// and share eps_{t+1..t+H}. eps_stream has H+1 rows.
IRFResult irf_single(const ModelSpec& model, const Vector& y_prev, const Matrix& eps_stream,
                     const ShockSpec& shock);

/// Mean of irf_single over replicate streams CounterRng(seed, r, kIrfReplicate).normal(h, i).
IRFResult eirf(const ModelSpec& model, const Vector& y_prev, const ShockSpec& shock,
               const McOptions& mc);

/// Across-horizon covariance of the same replicate IRFs as eirf.
IRFResult cirf(const ModelSpec& model, const Vector& y_prev, const ShockSpec& shock,
               const McOptions& mc);

/// Both summaries from one pass.
std::pair<IRFResult, IRFResult> eirf_cirf(const ModelSpec& model, const Vector& y_prev,
                                          const ShockSpec& shock, const McOptions& mc);

/// Row 0 is Delta; row h >= 1 advances both y_t and y_t + Delta with eps_stream row h-1.
/// eps_stream has H rows.
IRFResult pirf_single(const ModelSpec& model, const Vector& y_t, const ShockSpec& shock,
                      const Matrix& eps_stream);

/// E[y_{t+h} | y_t + Delta] - E[y_{t+h} | y_t] by common random numbers.
IRFResult pirf_expectation(const ModelSpec& model, const Vector& y_t, const ShockSpec& shock,
                           const McOptions& mc);

/// Rows Phi^h D delta, h = 0..H.
Matrix var1_irf_closed_form(const Matrix& phi, const Matrix& d, const Vector& delta, int horizon);

/// Rows (Id + Phi + ... + Phi^h) D delta, h = 0..H: the running sum of the VAR IRF.
Matrix cumulated_irf(const Matrix& phi, const Matrix& d, const Vector& delta, int horizon);

struct MaxIrfResult {
  double value = 0.0;
  Vector delta_star;
};

/// max over unit delta of a' Phi^h D delta. Throws DegenerateDirectionError
/// when |D' Phi'^h a| < 1e-12.
MaxIrfResult max_irf(const Matrix& phi, const Matrix& d, const Vector& a, int h);

/// Observable y = mixing(x) driven by independent source models stacked in x.
struct FactorModel {
  std::function<Vector(const Vector&)> mixing;
  std::vector<ModelSpec> sources;

  int source_dim() const;
  /// One transition of every source on its own slice of x and eps.
  Vector step(const Vector& x_prev, const Vector& eps) const;
};

/// The linear map x -> A x.
std::function<Vector(const Vector&)> linear_mixing(const Matrix& a);

/// EIRF of mixing(x^(delta)) - mixing(x) where delta shocks the stacked source
/// innovations; streams CounterRng(seed, r, kFactorReplicate).normal(h, i).
IRFResult factor_irf(const FactorModel& factor, const Vector& x_prev, const ShockSpec& shock,
                     const McOptions& mc);

/// `h,component,value,stderr` with 1-based components; stderr is 0 for single draws.
void write_irf_csv(std::ostream& out, const IRFResult& irf);

/// Term-structure plot, one curve per component with a +-2 stderr band when available.
std::string render_irf_svg(const IRFResult& irf, const std::string& title);

}  // namespace nlirf
