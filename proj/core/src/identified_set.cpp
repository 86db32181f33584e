#include "nlirf/identified_set.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nlirf/errors.hpp"
#include "nlirf/normal.hpp"
#include "nlirf/rng.hpp"

namespace nlirf {

namespace {

void require_skew(const Matrix& b) {
  if (b.rows() != b.cols()) throw DomainError("skew_exp: matrix must be square");
  if (!b.allFinite()) throw DomainError("skew_exp: matrix must be finite");
  if ((b + b.transpose()).norm() >= 1e-12) throw DomainError("skew_exp: matrix is not skew-symmetric");
}

Matrix planar_rotation(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Matrix q(2, 2);
  q << c, -s, s, c;
  return q;
}

}  // namespace

Matrix skew_exp(const Matrix& b) {
  require_skew(b);
  const auto n = b.rows();
  if (n == 1) return Matrix::Identity(1, 1);
  if (n == 2) return planar_rotation(b(1, 0));
  if (n == 3) {
    const double wx = b(2, 1), wy = b(0, 2), wz = b(1, 0);
    const double theta2 = wx * wx + wy * wy + wz * wz;
    const double theta = std::sqrt(theta2);
    double f1, f2;  // sin(t)/t, (1 - cos(t))/t^2
    if (theta < 1e-4) {
      f1 = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
      f2 = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
    } else {
      f1 = std::sin(theta) / theta;
      f2 = (1.0 - std::cos(theta)) / theta2;
    }
    return Matrix::Identity(3, 3) + f1 * b + f2 * (b * b);
  }

  // Scaling and squaring with a truncated Taylor series.
  const double norm = b.norm();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix a = b / std::ldexp(1.0, squarings);
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-14 * result.norm()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

PolarDecomposition polar_decompose(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) throw DomainError("polar_decompose: matrix must be square");
  if (!a.allFinite()) throw DomainError("polar_decompose: matrix must be finite");
  const auto n = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(n - 1) <= 0.0 || sv(0) / sv(n - 1) > 1e12) {
    throw ConditioningError("polar_decompose: matrix is near singular");
  }
  const double det = a.determinant();
  if (!(det > 0.0)) throw DomainError("polar_decompose: determinant must be positive");

  PolarDecomposition out;
  out.lambda = std::pow(det, 1.0 / static_cast<double>(n));
  // A = U S V' gives Q = U V' and Omega = V S V' / lambda.
  const Matrix& v = svd.matrixV();
  out.q = svd.matrixU() * v.transpose();
  out.omega = v * (sv / out.lambda).asDiagonal() * v.transpose();
  out.omega = 0.5 * (out.omega + out.omega.transpose());
  return out;
}

// ---- RadialRotationSpec ------------------------------------------------------------

RadialRotationSpec RadialRotationSpec::planar(AngleFn angle, std::string description) {
  if (!angle) throw DomainError("RadialRotationSpec: empty angle function");
  RadialRotationSpec s;
  s.n_ = 2;
  s.angle_ = std::move(angle);
  s.description_ = std::move(description);
  return s;
}

RadialRotationSpec RadialRotationSpec::general(int n, GeneratorFn generator, std::string description) {
  if (n < 2) throw DomainError("RadialRotationSpec: n must be >= 2");
  if (!generator) throw DomainError("RadialRotationSpec: empty generator");
  RadialRotationSpec s;
  s.n_ = n;
  s.generator_ = std::move(generator);
  s.description_ = std::move(description);
  return s;
}

RadialRotationSpec RadialRotationSpec::constant_angle(double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "a(rho)=%g", a);
  return planar([a](double) { return a; }, buf);
}

RadialRotationSpec RadialRotationSpec::linear_angle(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "a(rho)=%g*rho", c);
  return planar([c](double rho) { return c * rho; }, buf);
}

RadialRotationSpec RadialRotationSpec::scaled_random(int n, double c, std::uint64_t seed) {
  if (n < 2) throw DomainError("RadialRotationSpec: n must be >= 2");
  const CounterRng rng(seed, 0, StreamPurpose::kGeneric);
  Matrix b0 = Matrix::Zero(n, n);
  std::uint64_t t = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      b0(i, j) = rng.normal(t++);
      b0(j, i) = -b0(i, j);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "B(rho^2)=%g*rho^2*B0 (seed %llu)", c,
                static_cast<unsigned long long>(seed));
  return general(n, [b0, c](double rho2) -> Matrix { return c * rho2 * b0; }, buf);
}

double RadialRotationSpec::angle(double rho) const {
  if (!angle_) throw DomainError("RadialRotationSpec: angle() requires a planar spec");
  return angle_(rho);
}

Matrix RadialRotationSpec::generator(double rho2) const {
  if (angle_) {
    const double a = angle_(std::sqrt(rho2));
    Matrix b(2, 2);
    b << 0.0, -a, a, 0.0;
    return b;
  }
  Matrix b = generator_(rho2);
  if (b.rows() != n_ || b.cols() != n_) throw DomainError("RadialRotationSpec: generator has wrong shape");
  require_skew(b);
  return b;
}

RadialRotationSpec RadialRotationSpec::inverse() const {
  RadialRotationSpec s = *this;
  if (angle_) {
    s.angle_ = [f = angle_](double rho) { return -f(rho); };
  } else {
    s.generator_ = [g = generator_](double rho2) -> Matrix { return -g(rho2); };
  }
  s.description_ = "inverse of " + description_;
  return s;
}

// ---- Transforms ------------------------------------------------------------------

Vector radial_rotation_gauss(const Vector& eps, const RadialRotationSpec& spec) {
  if (eps.size() != spec.dim()) throw DomainError("radial rotation: dimension mismatch");
  if (!eps.allFinite()) throw DomainError("radial rotation: input must be finite");
  const double rho2 = eps.squaredNorm();
  if (rho2 == 0.0) return eps;
  if (spec.is_planar()) return planar_rotation(spec.angle(std::sqrt(rho2))) * eps;
  return skew_exp(spec.generator(rho2)) * eps;
}

Vector radial_rotation_uniform(const Vector& u, const RadialRotationSpec& spec) {
  if (u.size() != spec.dim()) throw DomainError("radial rotation: dimension mismatch");
  Vector eps(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) eps(i) = normal_quantile(u(i));
  const Vector eta = radial_rotation_gauss(eps, spec);
  Vector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = normal_cdf(eta(i));
  return out;
}

Vector radial_rotation_uniform_polar(const Vector& u, const RadialRotationSpec& spec) {
  if (!spec.is_planar() || u.size() != 2) {
    throw DomainError("radial_rotation_uniform_polar: planar rotation and 2-vector required");
  }
  const double e1 = normal_quantile(u(0));
  const double e2 = normal_quantile(u(1));
  const double rho = std::hypot(e1, e2);
  if (rho == 0.0) return u;
  const double theta = std::atan2(e2, e1) + spec.angle(rho);
  Vector out(2);
  out << normal_cdf(rho * std::cos(theta)), normal_cdf(rho * std::sin(theta));
  return out;
}

Vector reflection_transform(const Vector& eps, double c, int component) {
  if (!(c > 0.0)) throw DomainError("reflection_transform: c must be > 0");
  if (component < 0 || component >= eps.size()) {
    throw DomainError("reflection_transform: component out of range");
  }
  Vector out = eps;
  if (std::abs(out(component)) > c) out(component) = -out(component);
  return out;
}

JacobianReport jacobian_det_check(const std::function<Vector(const Vector&)>& transform,
                                  const std::vector<Vector>& points, double tolerance) {
  JacobianReport rep;
  rep.n_points = points.size();
  bool planar = true;
  for (const Vector& u : points) {
    const auto n = u.size();
    planar = planar && n == 2;
    Matrix jac(n, n);
    bool ok = true;
    try {
      for (Eigen::Index j = 0; j < n && ok; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(u(j)));
        Vector up = u, dn = u;
        up(j) += h;
        dn(j) -= h;
        const Vector fu = transform(up);
        const Vector fd = transform(dn);
        if (fu.size() != n || fd.size() != n || !fu.allFinite() || !fd.allFinite()) {
          ok = false;
          break;
        }
        jac.col(j) = (fu - fd) / (up(j) - dn(j));
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      ++rep.n_skipped;
      continue;
    }
    ++rep.n_evaluated;
    rep.max_abs_det_minus_one = std::max(rep.max_abs_det_minus_one, std::abs(jac.determinant() - 1.0));
    if (n == 2) {
      const double r = std::abs(jac(0, 0) - jac(1, 1)) + std::abs(jac(0, 1) + jac(1, 0));
      rep.max_structure_residual = std::max(rep.max_structure_residual, r);
    }
  }
  if (!planar || rep.n_evaluated == 0) rep.max_structure_residual = std::numeric_limits<double>::quiet_NaN();
  rep.flagged = rep.max_abs_det_minus_one > tolerance;
  return rep;
}

// ---- Grid deformation ------------------------------------------------------------

namespace {

double gap(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

std::vector<GridCurve> grid_deformation(const RadialRotationSpec& spec, const GridOptions& options) {
  if (spec.dim() != 2) throw DomainError("grid_deformation: spec must be planar (n = 2)");
  if (options.segments < 1 || options.samples < 2) throw DomainError("grid_deformation: bad grid size");
  if (!(options.edge > 0.0 && options.edge < 0.5)) throw DomainError("grid_deformation: edge must be in (0, 0.5)");
  const double lo = options.edge, hi = 1.0 - options.edge;
  const double gauss_gap = 3.0 * options.max_gap;

  std::vector<GridCurve> uniform, gaussian;
  const int lines = options.segments + 1;
  for (int dir = 0; dir < 2; ++dir) {
    for (int k = 0; k < lines; ++k) {
      const double fixed = std::clamp(static_cast<double>(k) / options.segments, lo, hi);
      auto source = [&](double s) {
        Vector u(2);
        if (dir == 0) {
          u << fixed, s;
        } else {
          u << s, fixed;
        }
        return u;
      };
      // Parameter values along the line, refined where either image jumps.
      std::vector<double> params;
      for (int i = 0; i < options.samples; ++i) {
        params.push_back(lo + (hi - lo) * i / (options.samples - 1));
      }
      std::vector<Point2> up, gp;
      for (int pass = 0; pass <= options.max_refine; ++pass) {
        up.clear();
        gp.clear();
        for (double s : params) {
          const Vector u = source(s);
          const Vector us = radial_rotation_uniform(u, spec);
          Vector e(2);
          e << normal_quantile(u(0)), normal_quantile(u(1));
          const Vector es = radial_rotation_gauss(e, spec);
          up.push_back({us(0), us(1)});
          gp.push_back({es(0), es(1)});
        }
        std::vector<double> next;
        bool refined = false;
        for (std::size_t i = 0; i + 1 < params.size(); ++i) {
          next.push_back(params[i]);
          if (gap(up[i], up[i + 1]) > options.max_gap || gap(gp[i], gp[i + 1]) > gauss_gap) {
            next.push_back(0.5 * (params[i] + params[i + 1]));
            refined = true;
          }
        }
        next.push_back(params.back());
        if (!refined || pass == options.max_refine) break;
        params = std::move(next);
      }
      const int id = dir * lines + k;
      uniform.push_back({id, true, up});
      gaussian.push_back({id, false, gp});
    }
  }
  uniform.insert(uniform.end(), gaussian.begin(), gaussian.end());
  return uniform;
}

void write_grid_csv(std::ostream& out, const std::vector<GridCurve>& curves) {
  out << "curve_id,point_id,x,y,space\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      out << c.id << ',' << i << ',' << format_real(c.points[i].x) << ','
          << format_real(c.points[i].y) << ',' << (c.uniform_space ? "uniform" : "gaussian") << '\n';
    }
  }
}

std::string render_grid_svg(const std::vector<GridCurve>& curves, bool uniform_space,
                            const std::string& title) {
  double lim = 1.0;
  if (!uniform_space) {
    lim = 0.0;
    for (const auto& c : curves) {
      if (c.uniform_space) continue;
      for (const auto& p : c.points) lim = std::max({lim, std::abs(p.x), std::abs(p.y)});
    }
    lim = std::ceil(lim * 1.05 * 2.0) / 2.0;
  }
  SvgCanvas svg(560, 560, uniform_space ? 0.0 : -lim, lim, uniform_space ? 0.0 : -lim, lim);
  svg.title(title);
  const char* color = uniform_space ? "#d62728" : "#1f3fbf";
  for (const auto& c : curves) {
    if (c.uniform_space == uniform_space) svg.polyline(c.points, color, 0.5);
  }
  svg.frame();
  svg.axes_ticks(4, 4);
  return svg.str();
}

}  // namespace nlirf
