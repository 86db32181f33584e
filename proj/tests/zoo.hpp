#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "nlirf/model.hpp"

namespace nlirf::testing {

// One representative model per family, plus a typical starting state.
struct ZooEntry {
  std::string name;
  ModelSpec model;
  Vector y0;
};

inline std::vector<ZooEntry> zoo() {
  std::vector<ZooEntry> out;
  {
    Matrix phi(2, 2), d(2, 2);
    phi << 0.5, 0.1, -0.2, 0.4;
    d << 1.0, 0.0, 0.5, 1.0;
    out.push_back({"gaussian_var1", ModelSpec::gaussian_var1(phi, d), Vector::Constant(2, 0.3)});
  }
  out.push_back({"dar1", ModelSpec::dar1(0.5, 1.0, 0.5), Vector::Constant(1, 0.5)});
  {
    Matrix phi(2, 2), b(2, 2);
    phi << 0.3, 0.1, 0.0, 0.2;
    b << 0.2, 0.1, 0.05, 0.3;
    Vector a(2);
    a << 1.0, 0.5;
    out.push_back({"vector_dar", ModelSpec::vector_dar(phi, a, b), Vector::Zero(2)});
  }
  out.push_back({"threshold_ar1", ModelSpec::threshold_ar1(1.5, 1.0), Vector::Constant(1, 0.2)});
  {
    Matrix phi(2, 2), d0(2, 2);
    phi << 0.4, 0.0, 0.1, 0.3;
    d0 << 1.0, 0.0, 0.4, 0.8;
    Vector psi(2);
    psi << 0.3, -0.2;
    out.push_back({"cond_gaussian", ModelSpec::cond_gaussian(phi, psi, d0, 0.5), Vector::Zero(2)});
  }
  {
    Matrix k(2, 2);
    k << 0.5, 0.1, 0.0, 0.8;
    Vector mu(2), s0(2), s1(2);
    mu << 1.0, -0.5;
    s0 << 0.4, 0.3;
    s1 << 0.2, 0.1;
    out.push_back({"euler_diffusion", ModelSpec::euler_diffusion(k, mu, s0, s1, 16), mu});
  }
  return out;
}

// Standard normal CDF written independently of the library.
inline double phi_oracle(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace nlirf::testing
