#pragma once

namespace nlirf {

/// Standard normal density.
double normal_pdf(double x) noexcept;

/// Standard normal CDF, accurate in both tails.
double normal_cdf(double x) noexcept;

/// Inverse of normal_cdf on (0, 1). Throws DomainError outside the open interval.
double normal_quantile(double u);

}  // namespace nlirf
