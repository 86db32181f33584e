#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlirf/bss.hpp"
#include "nlirf/errors.hpp"
#include "nlirf/rng.hpp"

using namespace nlirf;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix mixing_a() {
  Matrix a(2, 2);
  a << 1.0, 0.5, 0.3, 1.0;
  return a;
}

const std::vector<int> kLags = {1, 2, 3, 4, 5};

Matrix iid_normal(int T, int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(T, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(gen);
  return m;
}

double corr_lag(const Matrix& x, int i, int j, int k) {
  const Eigen::Index T = x.rows();
  const Vector a = x.col(i).tail(T - k).array() - x.col(i).tail(T - k).mean();
  const Vector b = x.col(j).head(T - k).array() - x.col(j).head(T - k).mean();
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

Matrix identity_residuals(const Vector&, const Matrix& s) { return s; }

}  // namespace

TEST(SampleAutocov, WhiteNoiseStandardizedAndDuplicate) {
  const int T = 20000;
  const Matrix x = iid_normal(T, 2, 1);
  const AutocovSet acs = sample_autocov(x, {0, 1});
  EXPECT_LT(acs.at(1).cwiseAbs().maxCoeff(), 3.0 / std::sqrt(T));
  EXPECT_LT((acs.at(0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 4.0 * std::sqrt(2.0 / T));
  Matrix dup(T, 2);
  dup.col(0) = x.col(0);
  dup.col(1) = x.col(0);
  const AutocovSet d = sample_autocov(dup, {1, 2});
  EXPECT_EQ(d.at(1)(0, 1), d.at(1)(0, 0));
  EXPECT_EQ(d.at(2)(0, 1), d.at(2)(0, 0));
  EXPECT_THROW(d.at(7), DomainError);
}

TEST(SampleAutocov, DefinitionAndErrors) {
  Matrix y(4, 2);
  y << 1, 2, 3, 0, 2, 5, 6, 1;
  const AutocovSet acs = sample_autocov(y, {1});
  const Vector m = y.colwise().mean();
  double g12 = 0;
  for (int t = 1; t < 4; ++t) g12 += (y(t, 0) - m(0)) * (y(t - 1, 1) - m(1));
  EXPECT_NEAR(acs.at(1)(0, 1), g12 / 4.0, 1e-15);
  Matrix c = y;
  c.col(1).setConstant(3.0);
  EXPECT_THROW(sample_autocov(c, {1}), DegenerateVarianceError);
  EXPECT_THROW(sample_autocov(y, {3}), DomainError);
}

TEST(PopulationAutocov, MatchesArFormula) {
  const AutocovSet acs = population_autocov_ar1(v2(0.9, 0.2), v2(1.0, 2.0), Matrix::Identity(2, 2), {0, 3});
  EXPECT_NEAR(acs.at(3)(0, 0), std::pow(0.9, 3) / (1 - 0.81), 1e-14);
  EXPECT_NEAR(acs.at(3)(1, 1), 4.0 * std::pow(0.2, 3) / (1 - 0.04), 1e-14);
  EXPECT_EQ(acs.at(0)(0, 1), 0.0);
}

TEST(EstimateMixing, PopulationQuadraticRoots) {
  const AutocovSet acs = population_autocov_ar1(v2(0.9, 0.2), v2(1.0, 1.0), mixing_a(), kLags);
  const MixingEstimate est = estimate_mixing(acs);
  EXPECT_NEAR(est.regression.alpha, 0.3 / 1.15, 1e-12);
  EXPECT_NEAR(est.regression.beta, 0.5 / 1.15, 1e-12);
  EXPECT_NEAR(est.regression.alpha / est.regression.beta, 0.6, 1e-12);
  EXPECT_NEAR(est.regression.residual_norm, 0.0, 1e-12);
  // d c a^2 - c a + d = 0 with c = 0.6 and d = 0.3 / 1.15.
  const double c = 0.6, d = 0.3 / 1.15;
  const double disc = std::sqrt(c * c - 4 * d * c * d);
  const double r1 = (c - disc) / (2 * d * c), r2 = (c + disc) / (2 * d * c);
  EXPECT_NEAR(r1, 0.5, 1e-12);
  EXPECT_NEAR(r2, 10.0 / 3.0, 1e-12);
  ASSERT_EQ(est.roots.size(), 2u);
  std::vector<double> roots = est.roots;
  std::sort(roots.begin(), roots.end());
  EXPECT_NEAR(roots[0], r1, 1e-9);
  EXPECT_NEAR(roots[1], r2, 1e-9);
  for (std::size_t k = 0; k < 2; ++k) {
    const Matrix& a = est.candidates[k];
    EXPECT_EQ(a(0, 0), 1.0);
    EXPECT_EQ(a(1, 1), 1.0);
    EXPECT_EQ(a(0, 1), est.roots[k]);
    EXPECT_EQ(a(1, 0), est.a21[k]);
    EXPECT_NEAR(est.a21[k], c * est.roots[k], 1e-12);
  }
  EXPECT_FALSE(est.underidentified);
  EXPECT_FALSE(est.unidentified);
}

TEST(EstimateMixing, CandidatesAreColumnPermutationsUpToScale) {
  const MixingEstimate est = estimate_mixing(population_autocov_ar1(v2(0.9, 0.2), v2(1.0, 1.0), mixing_a(), kLags));
  const Matrix& a = est.candidates[0];
  const Matrix& b = est.candidates[1];
  // b = a P S for the swap P and a diagonal S.
  Matrix swapped(2, 2);
  swapped.col(0) = a.col(1);
  swapped.col(1) = a.col(0);
  for (int j = 0; j < 2; ++j) {
    const double s = b(j, j) / swapped(j, j);
    EXPECT_LT((b.col(j) - s * swapped.col(j)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(EstimateMixing, RecoversTrueA12OnRandomDesigns) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> rho(-0.9, 0.9), coef(-0.8, 0.8), sd(0.5, 2.0);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const double r1 = rho(gen), r2 = rho(gen);
    if (std::abs(r1 - r2) < 0.2 || std::abs(r1) < 0.1 || std::abs(r2) < 0.1) continue;
    Matrix a(2, 2);
    a << 1.0, coef(gen), coef(gen), 1.0;
    if (std::abs(a(0, 1)) < 0.05 || std::abs(a(1, 0)) < 0.05) continue;
    const MixingEstimate est = estimate_mixing(population_autocov_ar1(v2(r1, r2), v2(sd(gen), sd(gen)), a, kLags));
    double best = 1e300;
    for (double r : est.roots) best = std::min(best, std::abs(r - a(0, 1)));
    EXPECT_LT(best, 1e-9) << r1 << " " << r2 << " " << a;
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(EstimateMixing, NoMixingAndTriangular) {
  const MixingEstimate id = estimate_mixing(population_autocov_ar1(v2(0.9, 0.2), v2(1, 1), Matrix::Identity(2, 2), kLags));
  EXPECT_NEAR(id.regression.alpha, 0.0, 1e-14);
  EXPECT_NEAR(id.regression.beta, 0.0, 1e-14);
  EXPECT_TRUE(id.triangular);
  ASSERT_FALSE(id.candidates.empty());
  EXPECT_LT((id.candidates[0] - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);

  Matrix lower(2, 2);
  lower << 1.0, 0.0, 0.4, 1.0;
  const MixingEstimate tri = estimate_mixing(population_autocov_ar1(v2(0.9, 0.2), v2(1, 1), lower, kLags));
  EXPECT_TRUE(tri.triangular);
  bool found = false;
  for (const auto& c : tri.candidates) found |= (c - lower).cwiseAbs().maxCoeff() < 1e-9;
  EXPECT_TRUE(found);
}

TEST(EstimateMixing, ProportionalAutocovariancesAreUnderidentified) {
  const MixingEstimate est = estimate_mixing(population_autocov_ar1(v2(0.6, 0.6), v2(1.0, 2.0), mixing_a(), kLags));
  EXPECT_LT(est.condition_diag, 1e-6);
  EXPECT_TRUE(est.underidentified);
  EXPECT_FALSE(est.warnings.empty());
}

TEST(EstimateMixing, NegativeDiscriminantReportsResidual) {
  // gamma_12 = 2 gamma_11 + 2 gamma_22 gives c = 1, d = 2 and c^2 - 4 d^2 c < 0.
  AutocovSet acs;
  for (int h : kLags) {
    Matrix g(2, 2);
    const double g11 = std::pow(0.9, h), g22 = std::pow(0.2, h);
    g << g11, 2 * g11 + 2 * g22, 2 * g11 + 2 * g22, g22;
    acs.lags.push_back(h);
    acs.gammas.push_back(g);
  }
  try {
    estimate_mixing(acs);
    FAIL() << "expected NoRealRootError";
  } catch (const NoRealRootError& e) {
    EXPECT_NEAR(e.regression_residual(), 0.0, 1e-12);
  }
  AutocovSet one;
  one.lags = {1};
  one.gammas = {Matrix::Identity(2, 2)};
  EXPECT_THROW(estimate_mixing(one), DomainError);
}

TEST(EstimateMixing, CandidatesNeverHitProductMinusOne) {
  // A root a of d c a^2 - c a + d = 0 with a21 = c a and 1 + c a^2 = 0 would force a = 0.
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int rep = 0; rep < 500; ++rep) {
    AutocovSet acs;
    const double al = coef(gen), be = coef(gen);
    for (int h : kLags) {
      const double g11 = std::pow(0.9, h), g22 = std::pow(-0.5, h);
      Matrix g(2, 2);
      g << g11, al * g11 + be * g22, al * g11 + be * g22, g22;
      acs.lags.push_back(h);
      acs.gammas.push_back(g);
    }
    try {
      const MixingEstimate est = estimate_mixing(acs);
      EXPECT_FALSE(est.unidentified);
      for (std::size_t k = 0; k < est.roots.size(); ++k) {
        EXPECT_GT(std::abs(1.0 + est.roots[k] * est.a21[k]), 1e-8);
      }
    } catch (const NoRealRootError&) {
    }
  }
}

TEST(Demix, RoundTripAndIdentity) {
  const Matrix x = iid_normal(100, 2, 3);
  EXPECT_LT((demix(x, Matrix::Identity(2, 2)) - x).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((demix(mix(x, mixing_a()), mixing_a()) - x).cwiseAbs().maxCoeff(), 1e-12);
  Matrix sing(2, 2);
  sing << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(demix(x, sing), DomainError);
}

TEST(Demix, EstimatedCandidatesSeparateSimulatedSources) {
  const int T = 20000;
  const Matrix x = simulate_ar1_sources(v2(0.9, 0.2), v2(1.0, 1.0), T, 17);
  const Matrix y = mix(x, mixing_a());
  const MixingEstimate est = estimate_mixing(sample_autocov(y, kLags));
  ASSERT_EQ(est.candidates.size(), 2u);
  std::vector<Matrix> recovered;
  for (const auto& a : est.candidates) recovered.push_back(demix(y, a));
  // The root nearest 0.5 gives the sources in the original order.
  const std::size_t k = std::abs(est.roots[0] - 0.5) < std::abs(est.roots[1] - 0.5) ? 0 : 1;
  EXPECT_NEAR(est.roots[k], 0.5, 0.15);
  // Estimation error in A leaves a population cross-correlation A_hat^{-1} Gamma(h) A_hat^{-T};
  // the sample value must sit within the sampling band around it.
  const Matrix ainv = est.candidates[k].inverse();
  const AutocovSet pop = population_autocov_ar1(v2(0.9, 0.2), v2(1.0, 1.0), mixing_a(), {0, 1, 2, 3, 4, 5});
  const Matrix g0 = ainv * pop.at(0) * ainv.transpose();
  for (int lag = 0; lag <= 5; ++lag) {
    const Matrix gh = ainv * pop.at(lag) * ainv.transpose();
    const double norm = std::sqrt(g0(0, 0) * g0(1, 1));
    // Persistent sources inflate the sampling variance of a cross-correlation by sum_k rho1^k rho2^k terms.
    const double inflation = std::sqrt((1 + 0.9 * 0.2) / (1 - 0.9 * 0.2));
    const double band = 3.0 * inflation / std::sqrt(T);
    EXPECT_NEAR(corr_lag(recovered[k], 0, 1, lag), gh(0, 1) / norm, band) << lag;
    EXPECT_NEAR(corr_lag(recovered[k], 1, 0, lag), gh(1, 0) / norm, band) << lag;
  }
  // With the true mixing matrix the recovered sources are the simulated ones.
  const Matrix exact = demix(y, mixing_a());
  for (int lag = 0; lag <= 5; ++lag) {
    const double band = 3.0 * std::sqrt((1 + 0.9 * 0.2) / (1 - 0.9 * 0.2)) / std::sqrt(T);
    EXPECT_LT(std::abs(corr_lag(exact, 0, 1, lag)), band) << lag;
  }
  // The other candidate returns the same sources in swapped order.
  for (int lag = 1; lag <= 5; ++lag) {
    const double band = 4.0 / std::sqrt(T);
    EXPECT_NEAR(corr_lag(recovered[k], 0, 0, lag), corr_lag(recovered[1 - k], 1, 1, lag), band);
    EXPECT_NEAR(corr_lag(recovered[k], 1, 1, lag), corr_lag(recovered[1 - k], 0, 0, lag), band);
  }
}

TEST(GcovObjective, NonNegativeAndEmptyTransformsRejected) {
  const Matrix e = iid_normal(500, 2, 9);
  EXPECT_THROW(gcov_objective(identity_residuals, Vector(), e, {}, {1}), DomainError);
  EXPECT_THROW(gcov_objective(identity_residuals, Vector(), e, power_transforms({1}), {}), DomainError);
  EXPECT_GE(gcov_objective(identity_residuals, Vector(), e, power_transforms({1, 2}), {1, 2, 3}), 0.0);
}

TEST(GcovObjective, IidNullBand) {
  const auto tr = power_transforms({1, 2});
  const std::vector<int> lags = {1, 2, 3};
  const int T = 2000, reps = 300;
  double s = 0, q = 0;
  for (int r = 0; r < reps; ++r) {
    const double v = gcov_objective(identity_residuals, Vector(), iid_normal(T, 2, 1000 + r), tr, lags);
    s += v;
    q += v * v;
  }
  const double mean = s / reps, sd = std::sqrt(q / reps - mean * mean);
  const double probe = gcov_objective(identity_residuals, Vector(), iid_normal(T, 2, 5), tr, lags);
  EXPECT_LT(std::abs(probe - mean), 3.0 * sd);
  // 3 lags x 4 component pairs; a squared covariance has mean Var(a) Var(b) / T,
  // which is 1 for (x, x) and 4 for (x^2, x^2) on standardized residuals.
  EXPECT_NEAR(mean * T, 60.0, 60.0 * 0.15);
}

TEST(GcovObjective, TrueDemixingBeatsPerturbations) {
  const int T = 5000;
  const Matrix y = mix(simulate_ar1_sources(v2(0.9, 0.2), v2(1, 1), T, 23), mixing_a());
  const auto tr = power_transforms({1, 2});
  const Vector truth = (Vector(4) << 0.5, 0.3, 0.9, 0.2).finished();
  const double at_truth = gcov_objective(ar1_source_residuals, truth, y, tr, {0, 1, 2, 3});
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd(0.0, 0.2);
  int wins = 0;
  for (int k = 0; k < 50; ++k) {
    Vector p = truth;
    for (int i = 0; i < 4; ++i) p(i) += nd(gen);
    wins += at_truth < gcov_objective(ar1_source_residuals, p, y, tr, {0, 1, 2, 3});
  }
  EXPECT_GE(wins, 48);
}

TEST(GcovObjective, ScaleInvariantResiduals) {
  const Matrix e = iid_normal(400, 2, 2);
  const auto tr = power_transforms({1, 2, 3});
  const double a = gcov_objective(identity_residuals, Vector(), e, tr, {1, 2});
  const double b = gcov_objective(identity_residuals, Vector(), Matrix(5.0 * e), tr, {1, 2});
  EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
}

TEST(GcovEstimate, InitAtTruthStaysAndPerturbedRecovers) {
  const int T = 20000;
  const Matrix y = mix(simulate_ar1_sources(v2(0.9, 0.2), v2(1, 1), T, 29), mixing_a());
  const auto tr = power_transforms({1, 2});
  const std::vector<int> lags = {0, 1, 2, 3};
  const Vector truth = (Vector(4) << 0.5, 0.3, 0.9, 0.2).finished();
  const GcovResult at = gcov_estimate(ar1_source_residuals, truth, y, tr, lags);
  EXPECT_LT((at.params - truth).cwiseAbs().maxCoeff(), 0.05);
  const GcovResult pert = gcov_estimate(ar1_source_residuals, 1.1 * truth, y, tr, lags);
  EXPECT_NEAR(pert.params(0), 0.5, 0.05);
  EXPECT_NEAR(pert.params(1), 0.3, 0.05);
  EXPECT_TRUE(pert.converged);
  EXPECT_FALSE(pert.flat);
  EXPECT_LE(pert.evaluations, GcovOptions{}.budget);
  ASSERT_FALSE(pert.trace.empty());
  for (std::size_t k = 1; k < pert.trace.size(); ++k) {
    EXPECT_LT(pert.trace[k].objective, pert.trace[k - 1].objective);
  }
}

TEST(GcovEstimate, BudgetExhaustionIsReported) {
  const Matrix y = mix(simulate_ar1_sources(v2(0.9, 0.2), v2(1, 1), 2000, 3), mixing_a());
  GcovOptions opts;
  opts.budget = 10;
  const GcovResult r = gcov_estimate(ar1_source_residuals, (Vector(4) << 0.0, 0.0, 0.5, 0.5).finished(), y,
                                     power_transforms({1}), {1}, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.evaluations, 10u);
}

TEST(GcovEstimate, EqualPersistenceDesignIsFlagged) {
  const int T = 20000;
  const Matrix y = mix(simulate_ar1_sources(v2(0.6, 0.6), v2(1, 1), T, 31), mixing_a());
  const Vector init = (Vector(4) << 0.55, 0.33, 0.6, 0.6).finished();
  const GcovResult r = gcov_estimate(ar1_source_residuals, init, y, power_transforms({1}), {1, 2, 3});
  EXPECT_TRUE(r.flat) << r.curvature_ratio;
}

TEST(RateCondition, Examples) {
  const RateCondition same = source_rate_condition(0.5, 0.5, 1.0, 1.0, 1);
  EXPECT_FALSE(same.independent);
  const RateCondition scaled = source_rate_condition(0.5, 0.5, 1.0, 3.0, 2);
  EXPECT_FALSE(scaled.independent);
  const RateCondition r = source_rate_condition(0.9, 0.2, 1.0, 1.0, 1);
  EXPECT_NEAR(r.eta2(0), 1.0, 1e-15);
  EXPECT_NEAR(r.eta2(1), 1.0, 1e-15);
  EXPECT_NEAR(r.slopes(0), 0.9, 1e-15);
  EXPECT_NEAR(r.slopes(1), 0.2, 1e-15);
  EXPECT_TRUE(r.independent);
  EXPECT_FALSE(r.degraded);
  const RateCondition h3 = source_rate_condition(0.9, 0.2, 2.0, 1.0, 3);
  EXPECT_NEAR(h3.eta2(0), 4.0 * (1 - std::pow(0.9, 6)) / (1 - 0.81), 1e-13);
  EXPECT_NEAR(h3.slopes(0), std::pow(0.9, 3) / h3.eta2(0), 1e-15);
  const RateCondition far = source_rate_condition(0.5, 0.2, 1.0, 1.0, 200);
  EXPECT_TRUE(far.degraded);
  EXPECT_LT(far.slopes.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(source_rate_condition(1.0, 0.2, 1.0, 1.0, 1), DomainError);
  EXPECT_THROW(source_rate_condition(0.5, 0.2, 0.0, 1.0, 1), DomainError);
}

TEST(MixingJson, ContainsEstimateFields) {
  const MixingEstimate est = estimate_mixing(population_autocov_ar1(v2(0.9, 0.2), v2(1, 1), mixing_a(), kLags));
  const nlohmann::json j = mixing_to_json(est);
  EXPECT_EQ(j["candidates"][0]["a21"], est.a21[0]);
  for (const char* key : {"roots", "candidates", "regression", "smallest_singular_value", "condition_diag",
                          "underidentified", "triangular", "unidentified", "warnings"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}
