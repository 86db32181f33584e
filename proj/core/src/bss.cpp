#include "nlirf/bss.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "nlirf/errors.hpp"
#include "nlirf/rng.hpp"

namespace nlirf {

const Matrix& AutocovSet::at(int lag) const {
  for (std::size_t k = 0; k < lags.size(); ++k) {
    if (lags[k] == lag) return gammas[k];
  }
  throw DomainError("autocovariance lag " + std::to_string(lag) + " not available");
}

AutocovSet sample_autocov(const Matrix& series, const std::vector<int>& lags) {
  if (lags.empty()) throw DomainError("sample_autocov: no lags requested");
  const auto T = series.rows();
  const int max_lag = *std::max_element(lags.begin(), lags.end());
  if (*std::min_element(lags.begin(), lags.end()) < 0) throw DomainError("sample_autocov: negative lag");
  if (T <= max_lag + 1) throw DomainError("sample_autocov: series shorter than max lag + 2");
  if (!series.allFinite()) throw DomainError("sample_autocov: series must be finite");
  const Matrix c = series.rowwise() - series.colwise().mean();
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    if (c.col(j).cwiseAbs().maxCoeff() == 0.0) {
      throw DegenerateVarianceError("sample_autocov: column " + std::to_string(j + 1) + " is constant");
    }
  }
  AutocovSet out;
  out.lags = lags;
  for (int h : lags) {
    const Matrix g = c.bottomRows(T - h).transpose() * c.topRows(T - h) / static_cast<double>(T);
    out.gammas.push_back(g);
  }
  return out;
}

AutocovSet population_autocov_ar1(const Vector& rho, const Vector& sigma, const Matrix& a,
                                  const std::vector<int>& lags) {
  const auto n = rho.size();
  if (sigma.size() != n || a.rows() != n || a.cols() != n) {
    throw DomainError("population_autocov_ar1: dimension mismatch");
  }
  if ((rho.array().abs() >= 1.0).any() || (sigma.array() <= 0.0).any()) {
    throw DomainError("population_autocov_ar1: need |rho| < 1 and sigma > 0");
  }
  AutocovSet out;
  out.lags = lags;
  for (int h : lags) {
    if (h < 0) throw DomainError("population_autocov_ar1: negative lag");
    Vector g(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      g(j) = sigma(j) * sigma(j) * std::pow(rho(j), h) / (1.0 - rho(j) * rho(j));
    }
    out.gammas.push_back(a * g.asDiagonal() * a.transpose());
  }
  return out;
}

Matrix simulate_ar1_sources(const Vector& rho, const Vector& sigma, std::size_t T, std::uint64_t seed) {
  constexpr std::size_t kBurn = 1000;
  const auto n = rho.size();
  if (sigma.size() != n || T < 1) throw DomainError("simulate_ar1_sources: bad arguments");
  const CounterRng rng(seed, 0, StreamPurpose::kSampling);
  Matrix out(static_cast<Eigen::Index>(T), n);
  Vector x = Vector::Zero(n);
  for (std::size_t t = 0; t < T + kBurn; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      x(j) = rho(j) * x(j) + sigma(j) * rng.normal(t, static_cast<std::uint32_t>(j));
    }
    if (t >= kBurn) out.row(static_cast<Eigen::Index>(t - kBurn)) = x.transpose();
  }
  return out;
}

MixingEstimate estimate_mixing(const AutocovSet& acs) {
  std::vector<std::size_t> use;
  for (std::size_t k = 0; k < acs.lags.size(); ++k) {
    if (acs.lags[k] >= 1) use.push_back(k);
    if (acs.gammas[k].rows() != 2 || acs.gammas[k].cols() != 2) {
      throw DomainError("estimate_mixing: bivariate autocovariances required");
    }
  }
  if (use.size() < 2) throw DomainError("estimate_mixing: need at least two lags h >= 1");

  const auto m = static_cast<Eigen::Index>(use.size());
  Matrix x(m, 2);
  Vector y(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Matrix& g = acs.gammas[use[static_cast<std::size_t>(r)]];
    x(r, 0) = g(0, 0);
    x(r, 1) = g(1, 1);
    y(r) = 0.5 * (g(0, 1) + g(1, 0));
  }

  MixingEstimate est;
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  est.smallest_singular_value = sv(1);
  est.condition_diag = sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
  est.underidentified = est.condition_diag < 1e-6;
  if (est.underidentified) {
    est.warnings.push_back("autocovariance sequences of the two series are nearly proportional; "
                           "the mixing matrix is underidentified");
  }
  svd.setThreshold(1e-10);
  const Vector coef = svd.solve(y);
  est.regression.alpha = coef(0);
  est.regression.beta = coef(1);
  est.regression.residual_norm = (x * coef - y).norm();

  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  const double alpha = est.regression.alpha, beta = est.regression.beta;
  auto add = [&](double a12, double a21) {
    Matrix a(2, 2);
    a << 1.0, a12, a21, 1.0;
    est.roots.push_back(a12);
    est.a21.push_back(a21);
    est.candidates.push_back(a);
    if (std::abs(1.0 + a12 * a21) < 1e-8) est.unidentified = true;
  };

  if (std::abs(beta) <= 1e-10 * scale) {
    // a12 = 0: gamma_12 = a21 gamma_11, so alpha is a21 directly.
    est.triangular = true;
    add(0.0, alpha);
  } else if (std::abs(alpha) <= 1e-10 * scale) {
    est.triangular = true;
    add(beta, 0.0);
  } else {
    const double c = alpha / beta, d = alpha;
    const double qa = d * c, qb = -c, qc = d;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) {
      throw NoRealRootError(est.regression.residual_norm,
                            "estimate_mixing: quadratic for a12 has no real root");
    }
    // Stable quadratic roots.
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    double r1 = q / qa, r2 = qc / q;
    if (r1 > r2) std::swap(r1, r2);
    add(r1, c * r1);
    add(r2, c * r2);
  }
  if (est.unidentified) {
    est.warnings.push_back("a candidate has a12 a21 = -1; not identified by this method");
  }
  return est;
}

Matrix demix(const Matrix& series, const Matrix& a) {
  if (a.rows() != a.cols() || a.cols() != series.cols()) throw DomainError("demix: dimension mismatch");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw DomainError("demix: mixing matrix is singular");
  return lu.solve(series.transpose()).transpose();
}

Matrix mix(const Matrix& sources, const Matrix& a) {
  if (a.rows() != a.cols() || a.cols() != sources.cols()) throw DomainError("mix: dimension mismatch");
  return sources * a.transpose();
}

nlohmann::json mixing_to_json(const MixingEstimate& est) {
  nlohmann::json cands = nlohmann::json::array();
  for (std::size_t k = 0; k < est.candidates.size(); ++k) {
    const Matrix& a = est.candidates[k];
    cands.push_back({{"a12", est.roots[k]},
                     {"a21", est.a21[k]},
                     {"A", {{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}}}});
  }
  return {{"roots", est.roots},
          {"candidates", cands},
          {"regression",
           {{"alpha", est.regression.alpha},
            {"beta", est.regression.beta},
            {"residual_norm", est.regression.residual_norm}}},
          {"smallest_singular_value", est.smallest_singular_value},
          {"condition_diag", est.condition_diag},
          {"underidentified", est.underidentified},
          {"triangular", est.triangular},
          {"unidentified", est.unidentified},
          {"warnings", est.warnings}};
}

// ---- Nonlinear covariance restrictions -------------------------------------------

std::vector<TransformPair> power_transforms(const std::vector<int>& powers) {
  std::vector<TransformPair> out;
  for (int p : powers) {
    if (p < 1) throw DomainError("power_transforms: powers must be >= 1");
    auto f = [p](double x) { return std::pow(x, p); };
    out.push_back({p == 1 ? "x" : "x^" + std::to_string(p), f, f});
  }
  return out;
}

Matrix ar1_source_residuals(const Vector& params, const Matrix& series) {
  if (params.size() != 4 || series.cols() != 2) {
    throw DomainError("ar1_source_residuals: need params (a12, a21, rho1, rho2) and a T x 2 series");
  }
  Matrix a(2, 2);
  a << 1.0, params(0), params(1), 1.0;
  const Matrix x = demix(series, a);
  const auto T = x.rows();
  Matrix e(T - 1, 2);
  for (int j = 0; j < 2; ++j) {
    e.col(j) = x.col(j).tail(T - 1) - params(2 + j) * x.col(j).head(T - 1);
  }
  return e;
}

double gcov_objective(const ResidualFn& resid, const Vector& params, const Matrix& series,
                      const std::vector<TransformPair>& transforms, const std::vector<int>& lags) {
  if (transforms.empty() || lags.empty()) throw DomainError("gcov_objective: no restrictions given");
  Matrix e = resid(params, series);
  const auto T = e.rows(), n = e.cols();
  const int max_lag = *std::max_element(lags.begin(), lags.end());
  if (T <= max_lag + 2) throw DomainError("gcov_objective: residual series too short");
  if (!e.allFinite()) return std::numeric_limits<double>::infinity();
  e = e.rowwise() - e.colwise().mean();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double sd = std::sqrt(e.col(j).squaredNorm() / static_cast<double>(T));
    if (!(sd > 0.0)) return std::numeric_limits<double>::infinity();
    e.col(j) /= sd;
  }
  double total = 0.0;
  for (const auto& tp : transforms) {
    Matrix fa = e.unaryExpr(tp.a);
    Matrix fb = e.unaryExpr(tp.b);
    fa = fa.rowwise() - fa.colwise().mean();
    fb = fb.rowwise() - fb.colwise().mean();
    for (int k : lags) {
      if (k < 0) throw DomainError("gcov_objective: negative lag");
      const Matrix c = fa.bottomRows(T - k).transpose() * fb.topRows(T - k) / static_cast<double>(T);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (k == 0 && i == j) continue;
          total += c(i, j) * c(i, j);
        }
      }
    }
  }
  return total;
}

GcovResult gcov_estimate(const ResidualFn& resid, const Vector& init, const Matrix& series,
                         const std::vector<TransformPair>& transforms, const std::vector<int>& lags,
                         const GcovOptions& options) {
  if (init.size() < 1 || !init.allFinite()) throw DomainError("gcov_estimate: bad initial parameters");
  GcovResult out;
  auto eval = [&](const Vector& p) {
    ++out.evaluations;
    return gcov_objective(resid, p, series, transforms, lags);
  };
  Vector best = init;
  double best_f = eval(best);
  out.trace.push_back({out.evaluations, best_f, best});
  double step = options.initial_step;
  while (step >= options.tolerance) {
    bool improved = false;
    for (Eigen::Index i = 0; i < best.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        if (out.evaluations >= options.budget) break;
        Vector trial = best;
        trial(i) += sign * step;
        const double f = eval(trial);
        if (f < best_f) {
          best = trial;
          best_f = f;
          improved = true;
          out.trace.push_back({out.evaluations, best_f, best});
          break;
        }
      }
    }
    if (out.evaluations >= options.budget) break;
    if (!improved) step *= 0.5;
  }
  out.converged = step < options.tolerance;
  out.params = best;
  out.objective = best_f;

  // Curvature of the objective around the optimum.
  const auto p = best.size();
  const double h = 1e-3;
  Matrix hess(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      auto shifted = [&](double si, double sj) {
        Vector q = best;
        q(i) += si * h;
        q(j) += sj * h;
        return gcov_objective(resid, q, series, transforms, lags);
      };
      const double v = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4.0 * h * h);
      hess(i, j) = hess(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
  const Vector ev = es.eigenvalues().cwiseAbs();
  out.curvature_ratio = ev.maxCoeff() > 0.0 ? ev.minCoeff() / ev.maxCoeff() : 0.0;
  out.flat = out.curvature_ratio < 1e-3;
  return out;
}

RateCondition source_rate_condition(double rho1, double rho2, double sigma1, double sigma2, int h) {
  if (std::abs(rho1) >= 1.0 || std::abs(rho2) >= 1.0) throw DomainError("rate condition: need |rho| < 1");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw DomainError("rate condition: need sigma > 0");
  if (h < 1) throw DomainError("rate condition: horizon must be >= 1");
  RateCondition out;
  out.eta2.resize(2);
  out.slopes.resize(2);
  out.persistence.resize(2);
  const double rho[2] = {rho1, rho2}, sig[2] = {sigma1, sigma2};
  for (int j = 0; j < 2; ++j) {
    const double rh = std::pow(rho[j], h);
    out.persistence(j) = rh;
    out.eta2(j) = sig[j] * sig[j] * (1.0 - rh * rh) / (1.0 - rho[j] * rho[j]);
    out.slopes(j) = rh / out.eta2(j);
  }
  const double scale = std::max(std::abs(out.persistence(0)), std::abs(out.persistence(1)));
  out.independent = std::abs(out.persistence(0) - out.persistence(1)) >
                    1e-10 * std::max(scale, std::numeric_limits<double>::min());
  out.degraded = scale < 1e-6;
  return out;
}

}  // namespace nlirf
