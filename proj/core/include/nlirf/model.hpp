#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nlirf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// |y| above this marks a simulated path as diverged.
inline constexpr double kDivergenceThreshold = 1e12;

enum class Family {
  kGaussianVar1,
  kDar1,
  kVectorDar,
  kThresholdAr1,
  kCondGaussian,
  kEulerDiffusion,
};

std::string_view family_name(Family f) noexcept;
Family family_from_name(std::string_view name);

/// y_t = Phi y_{t-1} + D eps_t
struct GaussianVar1Params {
  Matrix phi;
  Matrix d;
};

/// y_t = gamma y_{t-1} + sqrt(alpha + beta y_{t-1}^2) eps_t
struct Dar1Params {
  double gamma = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
};

/// y_t = Phi y_{t-1} + diag(h_t)^{1/2} eps_t,  h_t = a + B (y_{t-1} .^ 2)
struct VectorDarParams {
  Matrix phi;
  Vector a;
  Matrix b;
};

/// y_t = alpha 1{y_{t-1} > 0} + sigma eps_t   (y_{t-1} = 0 counts as the lower regime)
struct ThresholdAr1Params {
  double alpha = 0.0;
  double sigma = 1.0;
};

/// y_t = m(y_{t-1}) + D(y_{t-1}) eps_t with
///   m(y) = Phi y + psi .* tanh(y),
///   D(y) = sqrt(1 + kappa (1 - exp(-|y|^2))) D0.
struct CondGaussianParams {
  Matrix phi;
  Vector psi;
  Matrix d0;
  double kappa = 0.0;
};

/// dy = K (mu - y) dtau + diag(sqrt(sigma0^2 + sigma1^2 y^2)) dW over one unit of
/// time, integrated with `substeps` Euler steps along the linearly interpolated
/// Brownian path W(tau) = tau * eps_t.
struct EulerDiffusionParams {
  Matrix k;
  Vector mu;
  Vector sigma0;
  Vector sigma1;
  int substeps = 16;
};

/// A parameterized first-order Markov transition y_t = g(y_{t-1}; eps_t),
/// eps_t ~ N(0, Id). Immutable once constructed; construction validates.
class ModelSpec {
 public:
  using Params = std::variant<GaussianVar1Params, Dar1Params, VectorDarParams,
                              ThresholdAr1Params, CondGaussianParams,
                              EulerDiffusionParams>;

  explicit ModelSpec(Params params);

  static ModelSpec gaussian_var1(Matrix phi, Matrix d);
  static ModelSpec dar1(double gamma, double alpha, double beta);
  static ModelSpec vector_dar(Matrix phi, Vector a, Matrix b);
  static ModelSpec threshold_ar1(double alpha, double sigma);
  static ModelSpec cond_gaussian(Matrix phi, Vector psi, Matrix d0, double kappa);
  static ModelSpec euler_diffusion(Matrix k, Vector mu, Vector sigma0, Vector sigma1,
                                   int substeps = 16);

  Family family() const noexcept;
  int dim() const noexcept { return n_; }
  const Params& params() const noexcept { return params_; }

  template <class P>
  const P& as() const {
    return std::get<P>(params_);
  }

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& doc);

  /// "<family>:<16 hex digits>" content hash of the JSON document.
  std::string id() const;

 private:
  Params params_;
  int n_ = 1;
};

/// Gaussian one-step conditional law of y_t given y_{t-1}. Exact for every family
/// except euler_diffusion with more than one substep, where it is the single-step
/// Euler approximation.
struct GaussianLaw {
  Vector mean;
  Matrix cov;
};

GaussianLaw conditional_law(const ModelSpec& model, const Vector& y_prev);

/// True when conditional_law is the exact transition law.
bool has_exact_conditional(const ModelSpec& model) noexcept;

/// Conditional mean and per-component variance of y_{t+h-1} given y_{t-1}.
/// horizon 1 covers every family with an exact one-step law; horizon 2 is
/// available for gaussian_var1, dar1 and threshold_ar1.
struct ConditionalMoments {
  Vector mean;
  Vector variance;
};
ConditionalMoments conditional_moments(const ModelSpec& model, const Vector& y_prev,
                                       int horizon = 1);

Vector transition_step(const ModelSpec& model, const Vector& y_prev, const Vector& eps);

struct Trajectory {
  Matrix states;  // T x n, row t holds y_{t+1}
  Vector y0;
  std::uint64_t seed = 0;
  std::optional<Matrix> innovations;  // T x n Gaussian innovations, when recorded
};

/// Iterates transition_step with N(0, Id) draws from CounterRng(seed).normal(t, i).
Trajectory simulate_path(const ModelSpec& model, const Vector& y0, std::size_t T,
                         std::uint64_t seed);

/// Advances `y0` through the given innovation rows.
Trajectory simulate_path_with(const ModelSpec& model, const Vector& y0,
                              const Matrix& innovations);

/// Recursive (Rosenblatt) ordering of components; empty means 0..n-1.
using ComponentOrder = std::vector<int>;

/// Conditional law of one component given the lagged state and the components
/// earlier in the recursive ordering.
class RecursiveConditional {
 public:
  RecursiveConditional(const ModelSpec& model, const Vector& y_prev,
                       const ComponentOrder& order = {});

  /// Component index at position k of the ordering.
  int component(int k) const { return order_[static_cast<std::size_t>(k)]; }
  int size() const noexcept { return static_cast<int>(order_.size()); }

  /// Mean and standard deviation of the component at position k given `prefix`
  /// (values of the components at positions 0..k-1).
  std::pair<double, double> mean_sd(int k, std::span<const double> prefix) const;

  double cdf(int k, double y, std::span<const double> prefix) const;
  double quantile(int k, double u, std::span<const double> prefix) const;

 private:
  ComponentOrder order_;
  Vector mean_;  // permuted
  Matrix chol_;  // lower Cholesky factor of the permuted covariance
};

/// F_i(y_i | prefix, y_prev); `i` is the 0-based position in `order`.
double conditional_cdf(const ModelSpec& model, int i, double y_i,
                       std::span<const double> prefix, const Vector& y_prev,
                       const ComponentOrder& order = {});

/// Inverse of conditional_cdf in y_i, u in (0, 1).
double conditional_quantile(const ModelSpec& model, int i, double u,
                            std::span<const double> prefix, const Vector& y_prev,
                            const ComponentOrder& order = {});

/// Quantile of a monotone CDF by exponential bracket expansion from `start`
/// followed by bisection to 1e-12 (relative to max(1, |x|)).
double solve_quantile(const std::function<double(double)>& cdf, double u,
                      double start, double scale);

struct LyapunovReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_draws = 0;
  bool stationary = false;       // estimate + 3 std_error < 0
  bool finite_variance = false;  // gamma^2 + beta < 1
};

/// Monte Carlo estimate of E log|gamma + sqrt(beta) eps|.
LyapunovReport lyapunov_check(double gamma, double beta, std::size_t n_draws,
                              std::uint64_t seed);

/// alpha / (1 - gamma^2 - beta); throws DomainError when gamma^2 + beta >= 1.
double dar1_stationary_variance(double gamma, double alpha, double beta);

}  // namespace nlirf
