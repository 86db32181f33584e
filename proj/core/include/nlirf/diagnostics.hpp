#pragma once

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlirf/model.hpp"

namespace nlirf {

struct TestReport {
  std::string test;
  double statistic = 0.0;
  std::optional<double> p_value;
  double level = 0.05;
  bool reject = false;
  std::size_t n_obs = 0;
  std::string dictionary;
  std::size_t n_moments = 0;
  std::size_t n_resamples = 0;
  std::size_t n_skipped = 0;
  std::vector<std::pair<std::string, double>> details;
  std::vector<std::string> notes;
};

nlohmann::json report_to_json(const TestReport& r);
/// Fixed-width summary, one line per report.
std::string format_report_table(const std::vector<TestReport>& reports);

struct ScalarFn {
  std::string name;
  std::function<double(double)> f;
};

/// x, x^2, x^3, ...
std::vector<ScalarFn> power_functions(int max_power);

// ---- Markov test ---------------------------------------------------------------------

/// a applies to y_t, b to y_{t-2}, c to y_{t-1} (componentwise, same component).
struct MarkovTriple {
  ScalarFn a, b, c;
};

/// {x, x^2} x {x, x^2} x {x}
std::vector<MarkovTriple> default_markov_dictionary();

struct MarkovOptions {
  double level = 0.05;
  std::size_t resamples = 499;
  std::uint64_t seed = 0;
};

/// Tests E[(a(y_t) - E[a(y_t)|y_{t-1}]) (b(y_{t-2}) - E[b(y_{t-2})|y_{t-1}]) c(y_{t-1})] = 0.
/// Conditional expectations are projections on a cubic polynomial sieve in y_{t-1}
/// (with pairwise products). The studentized quadratic form of the moment vector is
/// calibrated by a stationary bootstrap with mean block length ceil(T^{1/3}).
/// Throws DomainError for T < 50, an empty dictionary, or a constant a or b.
/// Triples producing non-finite values are skipped and counted.
TestReport markov_test(const Matrix& series, const std::vector<MarkovTriple>& dictionary,
                       const MarkovOptions& options = {});

// ---- Strong white noise --------------------------------------------------------------

struct WhiteNoiseOptions {
  double level = 0.05;
  std::size_t permutations = 199;
  std::uint64_t seed = 0;
};

/// T times the sum of squared sample correlations corr(f_p(e_{i,t}), f_q(e_{j,t-k}))
/// over transform pairs (p, q), components i, j and lags k = 1..max_lag, plus
/// k = 0 for i < j. Calibrated by permuting each component's time index.
TestReport strong_white_noise_test(const Matrix& eps, const std::vector<ScalarFn>& transforms,
                                   int max_lag, const WhiteNoiseOptions& options = {});

// ---- Distribution invariance ---------------------------------------------------------

struct InvarianceOptions {
  double level = 0.05;
  std::size_t permutations = 199;
  std::uint64_t seed = 0;
};

/// Two-sample KS per marginal plus the Frobenius distance between sample
/// covariances (pooled permutation p-value); Bonferroni over the n + 1 p-values.
TestReport distribution_invariance_test(const Matrix& before, const Matrix& after,
                                        const InvarianceOptions& options = {});

// ---- Kolmogorov-Smirnov ----------------------------------------------------------------

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// sup |F_n - F| for a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic p-value with the (sqrt(n) + 0.12 + 0.11 / sqrt(n)) finite-sample adjustment.
double ks_pvalue(double d, double n_effective);

double ks_normal_pvalue(const std::vector<double>& sample);
double ks_uniform_pvalue(const std::vector<double>& sample);
/// Two-sample statistic and p-value.
std::pair<double, double> ks_two_sample(std::vector<double> x, std::vector<double> y);

}  // namespace nlirf
