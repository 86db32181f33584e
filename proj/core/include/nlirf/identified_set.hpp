#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "nlirf/io.hpp"
#include "nlirf/model.hpp"

namespace nlirf {

/// Matrix exponential of a skew-symmetric matrix (special orthogonal result).
/// Throws DomainError when |B + B'|_F >= 1e-12.
Matrix skew_exp(const Matrix& b);

/// A = lambda * Q * Omega with lambda > 0, Q special orthogonal and Omega
/// symmetric positive definite with unit determinant.
struct PolarDecomposition {
  double lambda = 1.0;
  Matrix q;
  Matrix omega;
};

/// Throws DomainError when det A <= 0, ConditioningError when cond(A) > 1e12.
PolarDecomposition polar_decompose(const Matrix& a);

/// Rotation whose generator depends on the squared radius: eps -> Exp(B(|eps|^2)) eps.
/// In the plane the generator is given by an angle function rho -> a(rho).
class RadialRotationSpec {
 public:
  using AngleFn = std::function<double(double)>;
  using GeneratorFn = std::function<Matrix(double)>;

  static RadialRotationSpec planar(AngleFn angle, std::string description);
  static RadialRotationSpec general(int n, GeneratorFn generator, std::string description);

  /// a(rho) = a
  static RadialRotationSpec constant_angle(double a);
  /// a(rho) = c * rho
  static RadialRotationSpec linear_angle(double c);
  /// B(rho^2) = c * rho^2 * B0, B0 a fixed skew matrix with N(0,1) entries drawn from `seed`.
  static RadialRotationSpec scaled_random(int n, double c, std::uint64_t seed);

  int dim() const noexcept { return n_; }
  bool is_planar() const noexcept { return static_cast<bool>(angle_); }
  const std::string& description() const noexcept { return description_; }

  /// Planar only.
  double angle(double rho) const;
  /// B(rho^2); checked skew-symmetric to 1e-12.
  Matrix generator(double rho2) const;

  /// Same rotation family with negated generator; composing the two is the identity.
  RadialRotationSpec inverse() const;

 private:
  int n_ = 2;
  AngleFn angle_;
  GeneratorFn generator_;
  std::string description_;
};

/// eta = Exp(B(|eps|^2)) eps; in the plane (rho, theta) -> (rho, theta + a(rho)).
Vector radial_rotation_gauss(const Vector& eps, const RadialRotationSpec& spec);

/// u* = Phi(radial_rotation_gauss(Phi^{-1}(u))). Throws DomainError outside (0,1)^n.
Vector radial_rotation_uniform(const Vector& u, const RadialRotationSpec& spec);

/// Planar closed form in polar coordinates:
/// u*_1 = Phi(rho cos(theta + a(rho))), u*_2 = Phi(rho sin(theta + a(rho))).
Vector radial_rotation_uniform_polar(const Vector& u, const RadialRotationSpec& spec);

/// Flips the sign of eps[component] when |eps[component]| > c. Discontinuous at |eps| = c.
Vector reflection_transform(const Vector& eps, double c, int component);

struct JacobianReport {
  std::size_t n_points = 0;
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;
  double max_abs_det_minus_one = 0.0;
  /// max of |J11 - J22| + |J12 + J21| (plane only, NaN otherwise): distance from
  /// the local-rotation structure of a unit-determinant planar Jacobian.
  double max_structure_residual = 0.0;
  /// max |det - 1| exceeded the tolerance.
  bool flagged = false;
};

/// Central finite-difference Jacobian with step 1e-6 * max(1, |u_j|). Points where
/// the transform throws or returns non-finite values are skipped and counted.
JacobianReport jacobian_det_check(const std::function<Vector(const Vector&)>& transform,
                                  const std::vector<Vector>& points, double tolerance = 1e-5);

struct GridCurve {
  int id = 0;
  bool uniform_space = true;  // false: Gaussian-space image
  std::vector<Point2> points;
};

struct GridOptions {
  int segments = 75;
  int samples = 200;       // initial samples per grid line
  double edge = 1e-3;      // grid lines span [edge, 1 - edge] in the uniform square
  double max_gap = 0.01;   // refinement target for uniform-space spacing (3x in Gaussian space)
  int max_refine = 12;     // maximum midpoint-insertion passes
};

/// Images of the segments+1 vertical and segments+1 horizontal lines of the unit
/// square under the uniform-space rotation, followed by the Gaussian-space images
/// of the same lines. Curve ids are shared between the two spaces.
std::vector<GridCurve> grid_deformation(const RadialRotationSpec& spec,
                                        const GridOptions& options = {});

/// `curve_id,point_id,x,y,space`
void write_grid_csv(std::ostream& out, const std::vector<GridCurve>& curves);

/// One panel for the curves of one space (red uniform, blue Gaussian).
std::string render_grid_svg(const std::vector<GridCurve>& curves, bool uniform_space,
                            const std::string& title);

}  // namespace nlirf
