#include "nlirf/normal.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

#include "nlirf/errors.hpp"

namespace nlirf {

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("normal_quantile: probability must lie in (0,1)");
  }
  // erfc_inv keeps full relative accuracy in the lower tail; reflect the upper one.
  if (u <= 0.5) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
  }
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * (1.0 - u));
}

}  // namespace nlirf
