#pragma once

#include <ostream>
#include <string>

#include "nlirf/model.hpp"

namespace nlirf {

enum class InnovationKind { kGaussian, kUniform };

/// T x n innovations. Column k belongs to position k of the component ordering
/// used at extraction (the component index itself under the default order).
struct InnovationMatrix {
  Matrix values;
  InnovationKind kind = InnovationKind::kGaussian;
  std::string model_id;
};

/// eps_{k,t} = Phi^{-1}(F_k(y_{k,t} | earlier components at t, y_{t-1})), starting from traj.y0.
/// Throws SaturationError when the conditional CDF (or its complement) underflows to 0.
InnovationMatrix extract_gaussian_innovations(const ModelSpec& model, const Trajectory& traj,
                                              const ComponentOrder& order = {});

/// u_{k,t} = F_k(y_{k,t} | ...). Throws SaturationError when u rounds to 0 or 1.
InnovationMatrix extract_uniform_innovations(const ModelSpec& model, const Trajectory& traj,
                                             const ComponentOrder& order = {});

/// Inverse of extract_gaussian_innovations: y_t = Q(Phi(eps_t) | y_{t-1}).
Trajectory reconstruct_path(const ModelSpec& model, const Vector& y0, const InnovationMatrix& eps,
                            const ComponentOrder& order = {});

Matrix gauss_to_uniform(const Matrix& eps);

/// Entries must lie in (0, 1). With `clamp`, entries are first clamped to
/// [1e-15, 1 - 1e-15] instead of raising DomainError on 0 or 1.
Matrix uniform_to_gauss(const Matrix& u, bool clamp = false);

/// Componentwise standardized residual (y - E[y | x]) / sqrt(V[y | x]) on the
/// series sampled every `horizon` steps (x is the previous sampled state,
/// starting at traj.y0). Row j is the residual of the (j+1)-th sampled state.
Matrix standardized_residual(const ModelSpec& model, const Trajectory& traj, int horizon = 1);

/// Header `t,eps_1,...,eps_n`, t starting at 1.
void write_innovations_csv(std::ostream& out, const InnovationMatrix& eps);

}  // namespace nlirf
