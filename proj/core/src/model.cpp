#include "nlirf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nlirf/errors.hpp"
#include "nlirf/io.hpp"
#include "nlirf/normal.hpp"
#include "nlirf/rng.hpp"

namespace nlirf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

void require_square(const Matrix& m, int n, const char* name) {
  require(m.rows() == n && m.cols() == n,
          std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  require(all_finite(m), std::string(name) + " must be finite");
}

void require_invertible(const Matrix& d, const char* name) {
  const double det = d.determinant();
  const double scale = std::pow(std::max(1.0, d.norm()), static_cast<double>(d.rows()));
  require(std::abs(det) > 64.0 * std::numeric_limits<double>::epsilon() * scale,
          std::string(name) + " must be invertible");
}

int validate(const GaussianVar1Params& p) {
  const int n = static_cast<int>(p.phi.rows());
  require(n >= 1, "gaussian_var1: n must be >= 1");
  require_square(p.phi, n, "gaussian_var1.Phi");
  require_square(p.d, n, "gaussian_var1.D");
  require_invertible(p.d, "gaussian_var1.D");
  return n;
}

int validate(const Dar1Params& p) {
  require(std::isfinite(p.gamma) && std::isfinite(p.alpha) && std::isfinite(p.beta),
          "dar1: parameters must be finite");
  require(p.alpha > 0.0, "dar1: alpha must be > 0");
  require(p.beta >= 0.0, "dar1: beta must be >= 0");
  return 1;
}

int validate(const VectorDarParams& p) {
  const int n = static_cast<int>(p.phi.rows());
  require(n >= 1, "vector_dar: n must be >= 1");
  require_square(p.phi, n, "vector_dar.Phi");
  require_square(p.b, n, "vector_dar.B");
  require(p.a.size() == n && p.a.allFinite(), "vector_dar.a must be a finite n-vector");
  require((p.a.array() > 0.0).all(), "vector_dar.a must be > 0");
  require((p.b.array() >= 0.0).all(), "vector_dar.B must be >= 0 entrywise");
  return n;
}

int validate(const ThresholdAr1Params& p) {
  require(std::isfinite(p.alpha) && std::isfinite(p.sigma), "threshold_ar1: parameters must be finite");
  require(p.sigma > 0.0, "threshold_ar1: sigma must be > 0");
  return 1;
}

int validate(const CondGaussianParams& p) {
  const int n = static_cast<int>(p.phi.rows());
  require(n >= 1, "cond_gaussian: n must be >= 1");
  require_square(p.phi, n, "cond_gaussian.Phi");
  require_square(p.d0, n, "cond_gaussian.D0");
  require_invertible(p.d0, "cond_gaussian.D0");
  require(p.psi.size() == n && p.psi.allFinite(), "cond_gaussian.psi must be a finite n-vector");
  require(std::isfinite(p.kappa) && p.kappa >= 0.0, "cond_gaussian.kappa must be >= 0");
  return n;
}

int validate(const EulerDiffusionParams& p) {
  const int n = static_cast<int>(p.k.rows());
  require(n >= 1, "euler_diffusion: n must be >= 1");
  require_square(p.k, n, "euler_diffusion.K");
  require(p.mu.size() == n && p.mu.allFinite(), "euler_diffusion.mu must be a finite n-vector");
  require(p.sigma0.size() == n && (p.sigma0.array() > 0.0).all() && p.sigma0.allFinite(),
          "euler_diffusion.sigma0 must be a positive n-vector");
  require(p.sigma1.size() == n && (p.sigma1.array() >= 0.0).all() && p.sigma1.allFinite(),
          "euler_diffusion.sigma1 must be a nonnegative n-vector");
  require(p.substeps >= 1, "euler_diffusion.substeps must be >= 1");
  return n;
}

double cond_gaussian_scale(const CondGaussianParams& p, const Vector& y) {
  return std::sqrt(1.0 + p.kappa * (1.0 - std::exp(-y.squaredNorm())));
}

Vector euler_volatility(const EulerDiffusionParams& p, const Vector& y) {
  return (p.sigma0.array().square() + p.sigma1.array().square() * y.array().square()).sqrt();
}

void require_state(const ModelSpec& m, const Vector& v, const char* what) {
  if (v.size() != m.dim()) {
    throw DomainError(std::string(what) + " must have dimension " + std::to_string(m.dim()));
  }
  if (!v.allFinite()) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

// ---- Family names ----------------------------------------------------------------

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::kGaussianVar1: return "gaussian_var1";
    case Family::kDar1: return "dar1";
    case Family::kVectorDar: return "vector_dar";
    case Family::kThresholdAr1: return "threshold_ar1";
    case Family::kCondGaussian: return "cond_gaussian";
    case Family::kEulerDiffusion: return "euler_diffusion";
  }
  return "unknown";
}

Family family_from_name(std::string_view name) {
  for (Family f : {Family::kGaussianVar1, Family::kDar1, Family::kVectorDar,
                   Family::kThresholdAr1, Family::kCondGaussian, Family::kEulerDiffusion}) {
    if (family_name(f) == name) return f;
  }
  throw SchemaError("family", "unknown model family '" + std::string(name) + "'");
}

// ---- ModelSpec -------------------------------------------------------------------

ModelSpec::ModelSpec(Params params) : params_(std::move(params)) {
  n_ = std::visit([](const auto& p) { return validate(p); }, params_);
}

ModelSpec ModelSpec::gaussian_var1(Matrix phi, Matrix d) {
  return ModelSpec(GaussianVar1Params{std::move(phi), std::move(d)});
}
ModelSpec ModelSpec::dar1(double gamma, double alpha, double beta) {
  return ModelSpec(Dar1Params{gamma, alpha, beta});
}
ModelSpec ModelSpec::vector_dar(Matrix phi, Vector a, Matrix b) {
  return ModelSpec(VectorDarParams{std::move(phi), std::move(a), std::move(b)});
}
ModelSpec ModelSpec::threshold_ar1(double alpha, double sigma) {
  return ModelSpec(ThresholdAr1Params{alpha, sigma});
}
ModelSpec ModelSpec::cond_gaussian(Matrix phi, Vector psi, Matrix d0, double kappa) {
  return ModelSpec(CondGaussianParams{std::move(phi), std::move(psi), std::move(d0), kappa});
}
ModelSpec ModelSpec::euler_diffusion(Matrix k, Vector mu, Vector sigma0, Vector sigma1,
                                     int substeps) {
  return ModelSpec(EulerDiffusionParams{std::move(k), std::move(mu), std::move(sigma0),
                                        std::move(sigma1), substeps});
}

Family ModelSpec::family() const noexcept {
  return static_cast<Family>(params_.index());
}

nlohmann::json ModelSpec::to_json() const {
  nlohmann::json params = std::visit(
      Overloaded{
          [](const GaussianVar1Params& p) {
            return nlohmann::json{{"Phi", matrix_to_json(p.phi)}, {"D", matrix_to_json(p.d)}};
          },
          [](const Dar1Params& p) {
            return nlohmann::json{{"gamma", p.gamma}, {"alpha", p.alpha}, {"beta", p.beta}};
          },
          [](const VectorDarParams& p) {
            return nlohmann::json{{"Phi", matrix_to_json(p.phi)},
                                  {"a", vector_to_json(p.a)},
                                  {"B", matrix_to_json(p.b)}};
          },
          [](const ThresholdAr1Params& p) {
            return nlohmann::json{{"alpha", p.alpha}, {"sigma", p.sigma}};
          },
          [](const CondGaussianParams& p) {
            return nlohmann::json{{"Phi", matrix_to_json(p.phi)},
                                  {"psi", vector_to_json(p.psi)},
                                  {"D0", matrix_to_json(p.d0)},
                                  {"kappa", p.kappa}};
          },
          [](const EulerDiffusionParams& p) {
            return nlohmann::json{{"K", matrix_to_json(p.k)},
                                  {"mu", vector_to_json(p.mu)},
                                  {"sigma0", vector_to_json(p.sigma0)},
                                  {"sigma1", vector_to_json(p.sigma1)},
                                  {"substeps", p.substeps}};
          },
      },
      params_);
  return nlohmann::json{{"family", std::string(family_name(family()))}, {"n", n_}, {"params", params}};
}

ModelSpec ModelSpec::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("model", "expected an object");
  if (!doc.contains("family") || !doc["family"].is_string()) {
    throw SchemaError("model.family", "missing or not a string");
  }
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw SchemaError("model.n", "missing or not an integer");
  }
  const int n = doc["n"].get<int>();
  if (n < 1) throw SchemaError("model.n", "must be >= 1");
  if (!doc.contains("params") || !doc["params"].is_object()) {
    throw SchemaError("model.params", "missing or not an object");
  }
  const auto& p = doc["params"];
  const std::string pp = "model.params";
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!p.contains(key)) throw SchemaError(pp + "." + key, "missing required field");
    return p[key];
  };
  const Family fam = family_from_name(doc["family"].get<std::string>());
  auto require_scalar_family = [&] {
    if (n != 1) throw SchemaError("model.n", "family is scalar; n must be 1");
  };
  try {
    switch (fam) {
      case Family::kGaussianVar1:
        return gaussian_var1(matrix_from_json(field("Phi"), pp + ".Phi", n, n),
                             matrix_from_json(field("D"), pp + ".D", n, n));
      case Family::kDar1:
        require_scalar_family();
        return dar1(number_from_json(p, "gamma", pp), number_from_json(p, "alpha", pp),
                    number_from_json(p, "beta", pp));
      case Family::kVectorDar:
        return vector_dar(matrix_from_json(field("Phi"), pp + ".Phi", n, n),
                          vector_from_json(field("a"), pp + ".a", n),
                          matrix_from_json(field("B"), pp + ".B", n, n));
      case Family::kThresholdAr1:
        require_scalar_family();
        return threshold_ar1(number_from_json(p, "alpha", pp), number_from_json(p, "sigma", pp));
      case Family::kCondGaussian:
        return cond_gaussian(matrix_from_json(field("Phi"), pp + ".Phi", n, n),
                             vector_from_json(field("psi"), pp + ".psi", n),
                             matrix_from_json(field("D0"), pp + ".D0", n, n),
                             number_from_json(p, "kappa", pp));
      case Family::kEulerDiffusion: {
        int substeps = 16;
        if (p.contains("substeps")) {
          if (!p["substeps"].is_number_integer()) {
            throw SchemaError(pp + ".substeps", "expected an integer");
          }
          substeps = p["substeps"].get<int>();
        }
        return euler_diffusion(matrix_from_json(field("K"), pp + ".K", n, n),
                               vector_from_json(field("mu"), pp + ".mu", n),
                               vector_from_json(field("sigma0"), pp + ".sigma0", n),
                               vector_from_json(field("sigma1"), pp + ".sigma1", n), substeps);
      }
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const DomainError& e) {
    throw SchemaError(pp, e.what());
  }
  throw SchemaError("model.family", "unhandled family");
}

std::string ModelSpec::id() const {
  return std::string(family_name(family())) + ":" + hex64(fnv1a64(to_json().dump()));
}

// ---- Transition ------------------------------------------------------------------

Vector transition_step(const ModelSpec& model, const Vector& y_prev, const Vector& eps) {
  require_state(model, y_prev, "transition_step: y_prev");
  require_state(model, eps, "transition_step: eps");
  return std::visit(
      Overloaded{
          [&](const GaussianVar1Params& p) -> Vector { return p.phi * y_prev + p.d * eps; },
          [&](const Dar1Params& p) -> Vector {
            const double y = y_prev(0);
            return Vector::Constant(1, p.gamma * y + std::sqrt(p.alpha + p.beta * y * y) * eps(0));
          },
          [&](const VectorDarParams& p) -> Vector {
            const Vector h = p.a + p.b * y_prev.array().square().matrix();
            return p.phi * y_prev + (h.array().sqrt() * eps.array()).matrix();
          },
          [&](const ThresholdAr1Params& p) -> Vector {
            const double regime = y_prev(0) > 0.0 ? 1.0 : 0.0;
            return Vector::Constant(1, p.alpha * regime + p.sigma * eps(0));
          },
          [&](const CondGaussianParams& p) -> Vector {
            const Vector mean = p.phi * y_prev + (p.psi.array() * y_prev.array().tanh()).matrix();
            return mean + cond_gaussian_scale(p, y_prev) * (p.d0 * eps);
          },
          [&](const EulerDiffusionParams& p) -> Vector {
            const double dt = 1.0 / p.substeps;
            Vector z = y_prev;
            for (int s = 0; s < p.substeps; ++s) {
              const Vector drift = p.k * (p.mu - z);
              const Vector vol = euler_volatility(p, z);
              z += dt * (drift + (vol.array() * eps.array()).matrix());
            }
            return z;
          },
      },
      model.params());
}

Trajectory simulate_path_with(const ModelSpec& model, const Vector& y0, const Matrix& innovations) {
  require_state(model, y0, "simulate_path: y0");
  if (innovations.cols() != model.dim()) {
    throw DomainError("simulate_path: innovations must have n columns");
  }
  const auto T = innovations.rows();
  Trajectory traj;
  traj.y0 = y0;
  traj.states.resize(T, model.dim());
  Vector y = y0;
  for (Eigen::Index t = 0; t < T; ++t) {
    y = transition_step(model, y, innovations.row(t).transpose());
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
      throw DivergedPathError(static_cast<std::size_t>(t),
                              "simulate_path: path diverged at t=" + std::to_string(t));
    }
    traj.states.row(t) = y.transpose();
  }
  traj.innovations = innovations;
  return traj;
}

Trajectory simulate_path(const ModelSpec& model, const Vector& y0, std::size_t T,
                         std::uint64_t seed) {
  if (T < 1) throw DomainError("simulate_path: T must be >= 1");
  const int n = model.dim();
  const CounterRng rng(seed, 0, StreamPurpose::kInnovation);
  Matrix eps(static_cast<Eigen::Index>(T), n);
  for (std::size_t t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      eps(static_cast<Eigen::Index>(t), i) = rng.normal(t, static_cast<std::uint32_t>(i));
    }
  }
  Trajectory traj = simulate_path_with(model, y0, eps);
  traj.seed = seed;
  return traj;
}

// ---- Conditional laws ------------------------------------------------------------

GaussianLaw conditional_law(const ModelSpec& model, const Vector& y_prev) {
  require_state(model, y_prev, "conditional_law: y_prev");
  return std::visit(
      Overloaded{
          [&](const GaussianVar1Params& p) {
            return GaussianLaw{p.phi * y_prev, p.d * p.d.transpose()};
          },
          [&](const Dar1Params& p) {
            const double y = y_prev(0);
            return GaussianLaw{Vector::Constant(1, p.gamma * y),
                               Matrix::Constant(1, 1, p.alpha + p.beta * y * y)};
          },
          [&](const VectorDarParams& p) {
            const Vector h = p.a + p.b * y_prev.array().square().matrix();
            return GaussianLaw{p.phi * y_prev, Matrix(h.asDiagonal())};
          },
          [&](const ThresholdAr1Params& p) {
            return GaussianLaw{Vector::Constant(1, y_prev(0) > 0.0 ? p.alpha : 0.0),
                               Matrix::Constant(1, 1, p.sigma * p.sigma)};
          },
          [&](const CondGaussianParams& p) {
            const double s = cond_gaussian_scale(p, y_prev);
            return GaussianLaw{p.phi * y_prev + (p.psi.array() * y_prev.array().tanh()).matrix(),
                               s * s * (p.d0 * p.d0.transpose())};
          },
          [&](const EulerDiffusionParams& p) {
            const Vector vol = euler_volatility(p, y_prev);
            return GaussianLaw{y_prev + p.k * (p.mu - y_prev),
                               Matrix(vol.array().square().matrix().asDiagonal())};
          },
      },
      model.params());
}

bool has_exact_conditional(const ModelSpec& model) noexcept {
  if (model.family() != Family::kEulerDiffusion) return true;
  return model.as<EulerDiffusionParams>().substeps == 1;
}

ConditionalMoments conditional_moments(const ModelSpec& model, const Vector& y_prev, int horizon) {
  if (horizon == 1) {
    if (!has_exact_conditional(model)) {
      throw UnsupportedFamilyError(
          "conditional_moments: euler_diffusion with substeps > 1 has no closed-form law");
    }
    const GaussianLaw law = conditional_law(model, y_prev);
    return {law.mean, law.cov.diagonal()};
  }
  if (horizon != 2) throw DomainError("conditional_moments: horizon must be 1 or 2");
  require_state(model, y_prev, "conditional_moments: y_prev");
  switch (model.family()) {
    case Family::kGaussianVar1: {
      const auto& p = model.as<GaussianVar1Params>();
      const Matrix sigma = p.d * p.d.transpose();
      const Matrix cov2 = p.phi * sigma * p.phi.transpose() + sigma;
      return {p.phi * (p.phi * y_prev), cov2.diagonal()};
    }
    case Family::kDar1: {
      const auto& p = model.as<Dar1Params>();
      const double y = y_prev(0);
      const double v1 = p.alpha + p.beta * y * y;
      const double ey2 = p.gamma * p.gamma * y * y + v1;
      const double v2 = p.gamma * p.gamma * v1 + p.alpha + p.beta * ey2;
      return {Vector::Constant(1, p.gamma * p.gamma * y), Vector::Constant(1, v2)};
    }
    case Family::kThresholdAr1: {
      const auto& p = model.as<ThresholdAr1Params>();
      const double m1 = y_prev(0) > 0.0 ? p.alpha : 0.0;
      const double prob = normal_cdf(m1 / p.sigma);  // P(y_t > 0 | y_{t-1})
      const double mean = p.alpha * prob;
      const double var = p.alpha * p.alpha * prob * (1.0 - prob) + p.sigma * p.sigma;
      return {Vector::Constant(1, mean), Vector::Constant(1, var)};
    }
    default:
      throw UnsupportedFamilyError("conditional_moments: horizon 2 not available for " +
                                   std::string(family_name(model.family())));
  }
}

// ---- Recursive conditional -------------------------------------------------------

RecursiveConditional::RecursiveConditional(const ModelSpec& model, const Vector& y_prev,
                                           const ComponentOrder& order) {
  const int n = model.dim();
  if (order.empty()) {
    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), 0);
  } else {
    order_ = order;
    ComponentOrder sorted = order;
    std::sort(sorted.begin(), sorted.end());
    bool ok = static_cast<int>(sorted.size()) == n;
    for (int i = 0; ok && i < n; ++i) ok = sorted[static_cast<std::size_t>(i)] == i;
    if (!ok) throw DomainError("component order must be a permutation of 0..n-1");
  }
  const GaussianLaw law = conditional_law(model, y_prev);
  mean_.resize(n);
  Matrix cov(n, n);
  for (int a = 0; a < n; ++a) {
    mean_(a) = law.mean(order_[static_cast<std::size_t>(a)]);
    for (int b = 0; b < n; ++b) {
      cov(a, b) = law.cov(order_[static_cast<std::size_t>(a)], order_[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw DomainError("conditional covariance is not positive definite");
  }
  chol_ = llt.matrixL();
}

std::pair<double, double> RecursiveConditional::mean_sd(int k, std::span<const double> prefix) const {
  if (k < 0 || k >= size()) throw DomainError("component position out of range");
  if (static_cast<int>(prefix.size()) != k) {
    throw DomainError("prefix must hold exactly the earlier components");
  }
  // z_j are the standardized innovations of the prefix components.
  double mean = mean_(k);
  Eigen::VectorXd z(k);
  for (int j = 0; j < k; ++j) {
    double r = prefix[static_cast<std::size_t>(j)] - mean_(j);
    for (int l = 0; l < j; ++l) r -= chol_(j, l) * z(l);
    z(j) = r / chol_(j, j);
    mean += chol_(k, j) * z(j);
  }
  return {mean, chol_(k, k)};
}

double RecursiveConditional::cdf(int k, double y, std::span<const double> prefix) const {
  const auto [m, sd] = mean_sd(k, prefix);
  if (y == std::numeric_limits<double>::infinity()) return 1.0;
  if (y == -std::numeric_limits<double>::infinity()) return 0.0;
  return normal_cdf((y - m) / sd);
}

double RecursiveConditional::quantile(int k, double u, std::span<const double> prefix) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("conditional_quantile: u must lie in (0,1)");
  const auto [m, sd] = mean_sd(k, prefix);
  return m + sd * normal_quantile(u);
}

double conditional_cdf(const ModelSpec& model, int i, double y_i, std::span<const double> prefix,
                       const Vector& y_prev, const ComponentOrder& order) {
  return RecursiveConditional(model, y_prev, order).cdf(i, y_i, prefix);
}

double conditional_quantile(const ModelSpec& model, int i, double u, std::span<const double> prefix,
                            const Vector& y_prev, const ComponentOrder& order) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("conditional_quantile: u must lie in (0,1)");
  return RecursiveConditional(model, y_prev, order).quantile(i, u, prefix);
}

double solve_quantile(const std::function<double(double)>& cdf, double u, double start,
                      double scale) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("solve_quantile: u must lie in (0,1)");
  if (!(scale > 0.0) || !std::isfinite(start)) throw DomainError("solve_quantile: bad bracket seed");
  double lo = start, hi = start;
  double step = scale;
  int guard = 0;
  while (cdf(lo) > u) {
    lo -= step;
    step *= 2.0;
    if (++guard > 200) throw DomainError("solve_quantile: lower bracket not found");
  }
  step = scale;
  guard = 0;
  while (cdf(hi) < u) {
    hi += step;
    step *= 2.0;
    if (++guard > 200) throw DomainError("solve_quantile: upper bracket not found");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid))) return mid;
    if (cdf(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---- Lyapunov ----------------------------------------------------------------------

LyapunovReport lyapunov_check(double gamma, double beta, std::size_t n_draws, std::uint64_t seed) {
  if (!std::isfinite(gamma) || !std::isfinite(beta) || beta < 0.0) {
    throw DomainError("lyapunov_check: gamma must be finite and beta >= 0");
  }
  if (gamma == 0.0 && beta == 0.0) {
    throw DomainError("lyapunov_check: gamma = beta = 0 gives log 0");
  }
  if (n_draws < 1000) throw DomainError("lyapunov_check: n_draws must be >= 1000");
  const CounterRng rng(seed, 0, StreamPurpose::kLyapunov);
  const double sb = std::sqrt(beta);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < n_draws; ++k) {
    const double x = std::log(std::abs(gamma + sb * rng.normal(k)));
    const double d = x - mean;
    mean += d / static_cast<double>(k + 1);
    m2 += d * (x - mean);
  }
  LyapunovReport r;
  r.n_draws = n_draws;
  r.estimate = mean;
  r.std_error = std::sqrt(m2 / static_cast<double>(n_draws - 1) / static_cast<double>(n_draws));
  r.stationary = r.estimate + 3.0 * r.std_error < 0.0;
  r.finite_variance = gamma * gamma + beta < 1.0;
  return r;
}

double dar1_stationary_variance(double gamma, double alpha, double beta) {
  const double denom = 1.0 - gamma * gamma - beta;
  if (!(denom > 0.0)) throw DomainError("dar1: gamma^2 + beta must be < 1 for a finite variance");
  return alpha / denom;
}

}  // namespace nlirf
