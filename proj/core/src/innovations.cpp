#include "nlirf/innovations.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlirf/errors.hpp"
#include "nlirf/io.hpp"
#include "nlirf/normal.hpp"

namespace nlirf {

namespace {

// Row t-1 of the state matrix is the lagged state of row t.
Vector lagged_state(const Trajectory& traj, Eigen::Index t) {
  return t == 0 ? traj.y0 : Vector(traj.states.row(t - 1).transpose());
}

void check_traj(const ModelSpec& model, const Trajectory& traj) {
  if (traj.states.cols() != model.dim() || traj.y0.size() != model.dim()) {
    throw DomainError("trajectory dimension does not match the model");
  }
  if (!traj.states.allFinite() || !traj.y0.allFinite()) {
    throw DomainError("trajectory must be finite");
  }
}

// Standardized positions z such that F = Phi(z), one row per time step.
Matrix standardized(const ModelSpec& model, const Trajectory& traj, const ComponentOrder& order) {
  check_traj(model, traj);
  const int n = model.dim();
  Matrix z(traj.states.rows(), n);
  std::vector<double> prefix;
  prefix.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < traj.states.rows(); ++t) {
    const RecursiveConditional rc(model, lagged_state(traj, t), order);
    prefix.clear();
    for (int k = 0; k < n; ++k) {
      const double y = traj.states(t, rc.component(k));
      const auto [m, sd] = rc.mean_sd(k, prefix);
      const double zk = (y - m) / sd;
      if (normal_cdf(-std::abs(zk)) <= 0.0) {
        throw SaturationError(static_cast<std::size_t>(t), static_cast<std::size_t>(k),
                              "conditional CDF saturated at t=" + std::to_string(t) +
                                  ", component position " + std::to_string(k));
      }
      z(t, k) = zk;
      prefix.push_back(y);
    }
  }
  return z;
}

}  // namespace

InnovationMatrix extract_gaussian_innovations(const ModelSpec& model, const Trajectory& traj,
                                              const ComponentOrder& order) {
  // For conditionally Gaussian components Phi^{-1}(F(y)) is the standardized
  // value itself; computing it directly avoids the round trip through (0, 1).
  return {standardized(model, traj, order), InnovationKind::kGaussian, model.id()};
}

InnovationMatrix extract_uniform_innovations(const ModelSpec& model, const Trajectory& traj,
                                             const ComponentOrder& order) {
  Matrix u = standardized(model, traj, order);
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
      const double p = normal_cdf(u(t, k));
      if (p <= 0.0 || p >= 1.0) {
        throw SaturationError(static_cast<std::size_t>(t), static_cast<std::size_t>(k),
                              "uniform innovation rounds to 0 or 1 at t=" + std::to_string(t));
      }
      u(t, k) = p;
    }
  }
  return {std::move(u), InnovationKind::kUniform, model.id()};
}

Trajectory reconstruct_path(const ModelSpec& model, const Vector& y0, const InnovationMatrix& eps,
                            const ComponentOrder& order) {
  if (eps.kind != InnovationKind::kGaussian) {
    throw DomainError("reconstruct_path expects Gaussian innovations");
  }
  const int n = model.dim();
  if (eps.values.cols() != n) throw DomainError("innovation matrix must have n columns");
  if (y0.size() != n || !y0.allFinite()) throw DomainError("y0 must be a finite n-vector");
  if (!eps.values.allFinite()) throw DomainError("innovations must be finite");

  Trajectory traj;
  traj.y0 = y0;
  traj.states.resize(eps.values.rows(), n);
  Vector y_prev = y0;
  std::vector<double> prefix;
  prefix.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < eps.values.rows(); ++t) {
    const RecursiveConditional rc(model, y_prev, order);
    prefix.clear();
    Vector y(n);
    for (int k = 0; k < n; ++k) {
      const auto [m, sd] = rc.mean_sd(k, prefix);
      const double v = m + sd * eps.values(t, k);
      y(rc.component(k)) = v;
      prefix.push_back(v);
    }
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
      throw DivergedPathError(static_cast<std::size_t>(t), "reconstruct_path: path diverged");
    }
    traj.states.row(t) = y.transpose();
    y_prev = y;
  }
  if (order.empty()) traj.innovations = eps.values;
  return traj;
}

Matrix gauss_to_uniform(const Matrix& eps) {
  if (!eps.allFinite()) throw DomainError("gauss_to_uniform: entries must be finite");
  return eps.unaryExpr([](double x) { return normal_cdf(x); });
}

Matrix uniform_to_gauss(const Matrix& u, bool clamp) {
  static constexpr double kEdge = 1e-15;
  return u.unaryExpr([clamp](double p) {
    if (clamp && !std::isnan(p)) p = std::clamp(p, kEdge, 1.0 - kEdge);
    return normal_quantile(p);
  });
}

Matrix standardized_residual(const ModelSpec& model, const Trajectory& traj, int horizon) {
  check_traj(model, traj);
  if (horizon < 1) throw DomainError("standardized_residual: horizon must be >= 1");
  const Eigen::Index rows = traj.states.rows() / horizon;
  Matrix out(rows, model.dim());
  Vector x = traj.y0;
  for (Eigen::Index j = 0; j < rows; ++j) {
    const Vector y = traj.states.row((j + 1) * horizon - 1).transpose();
    const ConditionalMoments cm = conditional_moments(model, x, horizon);
    if ((cm.variance.array() <= 0.0).any()) {
      throw DomainError("standardized_residual: zero conditional variance");
    }
    out.row(j) = ((y - cm.mean).array() / cm.variance.array().sqrt()).matrix().transpose();
    x = y;
  }
  return out;
}

void write_innovations_csv(std::ostream& out, const InnovationMatrix& eps) {
  write_indexed_csv(out, eps.values, "eps_");
}

}  // namespace nlirf
