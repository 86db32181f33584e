#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nlirf/diagnostics.hpp"
#include "nlirf/errors.hpp"
#include "nlirf/identified_set.hpp"
#include "nlirf/innovations.hpp"
#include "nlirf/rng.hpp"
#include "zoo.hpp"

using namespace nlirf;
using nlirf::testing::phi_oracle;

namespace {

Matrix ar2(double p1, double p2, int T, std::uint64_t seed) {
  const CounterRng rng(seed, 0, StreamPurpose::kSampling);
  Matrix y(T, 1);
  double a = 0.0, b = 0.0;
  for (int t = -500; t < T; ++t) {
    const double x = p1 * a + p2 * b + rng.normal(static_cast<std::uint64_t>(t + 500), 0);
    b = a;
    a = x;
    if (t >= 0) y(t, 0) = x;
  }
  return y;
}

Matrix iid_normal(int T, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(T, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(gen);
  return m;
}

Matrix arch(double a, int T, std::uint64_t seed) {
  const CounterRng rng(seed, 0, StreamPurpose::kSampling);
  Matrix e(T, 1);
  double prev = 0.0;
  for (int t = 0; t < T; ++t) {
    prev = std::sqrt(1.0 - a + a * prev * prev) * rng.normal(static_cast<std::uint64_t>(t), 0);
    e(t, 0) = prev;
  }
  return e;
}

}  // namespace

TEST(Kolmogorov, TableCriticalValues) {
  EXPECT_NEAR(kolmogorov_survival(1.2239), 0.10, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-4);
  EXPECT_DOUBLE_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_LT(kolmogorov_survival(10.0), 1e-80);
}

TEST(Kolmogorov, StatisticMatchesBruteForce) {
  const std::vector<double> s = {0.1, 0.7, 0.35, 0.9, 0.2};
  const auto cdf = [](double x) { return x; };
  // Brute force: sup over a fine grid of |F_n(x) - x| including left limits at the data.
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    d = std::max(d, std::abs((i + 1.0) / 5.0 - sorted[i]));
    d = std::max(d, std::abs(static_cast<double>(i) / 5.0 - sorted[i]));
  }
  EXPECT_NEAR(ks_statistic(s, cdf), d, 1e-15);
  EXPECT_NEAR(ks_statistic(s, cdf), 0.25, 1e-15);
}

TEST(Kolmogorov, TwoSampleMatchesBruteForce) {
  const std::vector<double> x = {0.2, 1.4, 2.2, 3.1, 0.9};
  const std::vector<double> y = {1.0, 2.5, 3.3, 4.0};
  double d = 0.0;
  std::vector<double> pooled = x;
  pooled.insert(pooled.end(), y.begin(), y.end());
  for (double p : pooled) {
    const double fx = std::count_if(x.begin(), x.end(), [&](double v) { return v <= p; }) / 5.0;
    const double fy = std::count_if(y.begin(), y.end(), [&](double v) { return v <= p; }) / 4.0;
    d = std::max(d, std::abs(fx - fy));
  }
  const auto [stat, p] = ks_two_sample(x, y);
  EXPECT_NEAR(stat, d, 1e-15);
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
}

TEST(Kolmogorov, NormalAndUniformPValues) {
  std::vector<double> z;
  const Matrix m = iid_normal(5000, 1, 4);
  for (Eigen::Index i = 0; i < m.rows(); ++i) z.push_back(m(i, 0));
  EXPECT_GT(ks_normal_pvalue(z), 0.01);
  std::vector<double> u;
  for (double v : z) u.push_back(phi_oracle(v));
  EXPECT_GT(ks_uniform_pvalue(u), 0.01);
  for (double& v : z) v += 0.2;
  EXPECT_LT(ks_normal_pvalue(z), 1e-6);
}

TEST(MarkovTest, InputValidation) {
  const Matrix y = ar2(0.5, 0.0, 200, 1);
  EXPECT_THROW(markov_test(y.topRows(49), default_markov_dictionary()), DomainError);
  EXPECT_THROW(markov_test(y, {}), DomainError);
  const ScalarFn one{"1", [](double) { return 1.0; }};
  const ScalarFn id{"x", [](double x) { return x; }};
  EXPECT_THROW(markov_test(y, {{one, id, id}}), DomainError);
  EXPECT_THROW(markov_test(y, {{id, one, id}}), DomainError);
  MarkovOptions opts;
  opts.resamples = 5;
  EXPECT_THROW(markov_test(y, default_markov_dictionary(), opts), DomainError);
}

TEST(MarkovTest, SeedReproducibleAndRelabelingInvariant) {
  const Matrix y = ar2(0.5, 0.0, 600, 2);
  MarkovOptions opts;
  opts.seed = 11;
  const TestReport a = markov_test(y, default_markov_dictionary(), opts);
  const TestReport b = markov_test(y, default_markov_dictionary(), opts);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.p_value, b.p_value);
  auto dict = default_markov_dictionary();
  std::reverse(dict.begin(), dict.end());
  const TestReport c = markov_test(y, dict, opts);
  EXPECT_NEAR(c.statistic, a.statistic, 1e-8 * std::max(1.0, a.statistic));
  EXPECT_NEAR(*c.p_value, *a.p_value, 1e-12);
  EXPECT_EQ(a.n_moments, 4u);
  EXPECT_EQ(a.n_resamples, 499u);
  EXPECT_EQ(a.reject, *a.p_value <= a.level);
}

TEST(MarkovTest, OverflowingTripleIsSkipped) {
  const Matrix y = ar2(0.5, 0.0, 300, 3);
  auto dict = default_markov_dictionary();
  dict.push_back({{"exp(1000x)", [](double x) { return std::exp(1000.0 * x); }},
                  {"x", [](double x) { return x; }},
                  {"x", [](double x) { return x; }}});
  const TestReport r = markov_test(y, dict);
  EXPECT_EQ(r.n_skipped, 1u);
  EXPECT_EQ(r.n_moments, 4u);
  EXPECT_TRUE(std::isfinite(r.statistic));
}

TEST(MarkovTest, IidPValuesAreUniform) {
  std::vector<double> ps;
  MarkovOptions opts;
  opts.resamples = 199;
  for (int r = 0; r < 200; ++r) {
    opts.seed = 3000 + static_cast<std::uint64_t>(r);
    ps.push_back(*markov_test(iid_normal(500, 1, 100 + static_cast<std::uint64_t>(r)), default_markov_dictionary(), opts).p_value);
  }
  // Resampling p-values live on the grid k / 200; compare against the matching discrete uniform.
  std::sort(ps.begin(), ps.end());
  double d = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    d = std::max(d, std::abs((i + 1.0) / ps.size() - ps[i]));
    d = std::max(d, std::abs(static_cast<double>(i) / ps.size() - ps[i]));
  }
  EXPECT_GT(ks_pvalue(d, static_cast<double>(ps.size())), 0.01);
}

TEST(MarkovTest, PowerAgainstSecondOrderDependence) {
  int rejections = 0;
  MarkovOptions opts;
  for (int r = 0; r < 40; ++r) {
    opts.seed = 9000 + static_cast<std::uint64_t>(r);
    rejections += markov_test(ar2(0.3, 0.4, 2000, 500 + static_cast<std::uint64_t>(r)), default_markov_dictionary(), opts).reject;
  }
  EXPECT_GT(rejections, 20);
}

TEST(WhiteNoise, InputValidationAndReport) {
  const Matrix e = iid_normal(300, 2, 5);
  EXPECT_THROW(strong_white_noise_test(e.topRows(49), power_functions(2), 3), DomainError);
  EXPECT_THROW(strong_white_noise_test(e, {}, 3), DomainError);
  EXPECT_THROW(strong_white_noise_test(e, power_functions(2), 0), DomainError);
  const TestReport r = strong_white_noise_test(e, power_functions(2), 3);
  ASSERT_TRUE(r.p_value.has_value());
  EXPECT_GE(*r.p_value, 0.0);
  EXPECT_LE(*r.p_value, 1.0);
  // 2 x 2 transform pairs x (3 lags x 4 component pairs + 1 contemporaneous pair)
  EXPECT_EQ(r.n_moments, 4u * (3u * 4u + 1u));
  EXPECT_EQ(r.n_obs, 300u);
}

TEST(WhiteNoise, IidSizeNearNominal) {
  int rejections = 0;
  const int reps = 300;
  WhiteNoiseOptions opts;
  for (int r = 0; r < reps; ++r) {
    opts.seed = 400 + static_cast<std::uint64_t>(r);
    rejections += strong_white_noise_test(iid_normal(400, 2, 800 + static_cast<std::uint64_t>(r)), power_functions(3), 3, opts).reject;
  }
  // Binomial(300, 0.05) stays within 3 standard deviations.
  const double sd = std::sqrt(reps * 0.05 * 0.95);
  EXPECT_NEAR(rejections, reps * 0.05, 3.0 * sd);
}

TEST(WhiteNoise, SquareTransformDetectsConditionalHeteroskedasticity) {
  int linear = 0, squares = 0;
  const int reps = 100;
  WhiteNoiseOptions opts;
  for (int r = 0; r < reps; ++r) {
    opts.seed = static_cast<std::uint64_t>(r);
    const Matrix e = arch(0.3, 1000, static_cast<std::uint64_t>(r));
    linear += strong_white_noise_test(e, power_functions(1), 5, opts).reject;
    squares += strong_white_noise_test(e, power_functions(2), 5, opts).reject;
  }
  EXPECT_LT(linear, 20);
  EXPECT_GT(squares, 80);
}

TEST(WhiteNoise, StandardizedResidualDependsOnLaggedRegime) {
  const auto m = ModelSpec::threshold_ar1(1.5, 1.0);
  const Trajectory tr = simulate_path(m, Vector::Zero(1), 400000, 60);
  const Matrix r = standardized_residual(m, tr, 2);
  std::vector<double> lo, hi;
  for (Eigen::Index j = 0; j < r.rows(); ++j) {
    const double prev = j == 0 ? tr.y0(0) : tr.states(2 * j - 1, 0);
    (prev > 0.0 ? hi : lo).push_back(r(j, 0));
  }
  const Matrix a = Eigen::Map<const Vector>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  const Matrix b = Eigen::Map<const Vector>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  const TestReport rep = distribution_invariance_test(a, b);
  EXPECT_TRUE(rep.reject);
  EXPECT_LT(*rep.p_value, 1e-4);
  // The exact one-step innovations of the same path do not depend on the regime.
  const Matrix e = *tr.innovations;
  std::vector<double> elo, ehi;
  for (Eigen::Index t = 1; t < e.rows(); ++t) (tr.states(t - 1, 0) > 0.0 ? ehi : elo).push_back(e(t, 0));
  const TestReport ok = distribution_invariance_test(Eigen::Map<const Vector>(elo.data(), static_cast<Eigen::Index>(elo.size())),
                                                     Eigen::Map<const Vector>(ehi.data(), static_cast<Eigen::Index>(ehi.size())));
  EXPECT_GT(*ok.p_value, 0.01);
}

TEST(Invariance, IdenticalShiftedAndRotated) {
  const Matrix x = iid_normal(2000, 2, 1);
  const TestReport same = distribution_invariance_test(x, x);
  EXPECT_FALSE(same.reject);
  EXPECT_DOUBLE_EQ(*same.p_value, 1.0);

  Matrix a = iid_normal(10000, 1, 2), b = iid_normal(10000, 1, 3);
  b.array() += 0.5;
  EXPECT_TRUE(distribution_invariance_test(a, b).reject);

  const auto spec = RadialRotationSpec::linear_angle(0.2);
  const Matrix src = iid_normal(10000, 2, 4);
  Matrix rot(src.rows(), 2);
  for (Eigen::Index t = 0; t < src.rows(); ++t) rot.row(t) = radial_rotation_gauss(src.row(t).transpose(), spec).transpose();
  InvarianceOptions opts;
  opts.level = 0.01;
  EXPECT_FALSE(distribution_invariance_test(rot, iid_normal(10000, 2, 5), opts).reject);
}

TEST(Reports, JsonAndTable) {
  const TestReport r = strong_white_noise_test(iid_normal(100, 1, 1), power_functions(2), 2);
  const nlohmann::json j = report_to_json(r);
  EXPECT_EQ(j["test"], r.test);
  EXPECT_EQ(j["decision"], r.reject ? "reject" : "accept");
  EXPECT_EQ(j["n_obs"], 100);
  EXPECT_TRUE(j.contains("p_value"));
  EXPECT_TRUE(j.contains("dictionary"));
  const std::string table = format_report_table({r, r});
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
}

TEST(Diagnostics, PowerFunctionNames) {
  const auto f = power_functions(3);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_DOUBLE_EQ(f[2].f(2.0), 8.0);
  EXPECT_EQ(default_markov_dictionary().size(), 4u);
}
