#include "nlirf/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "nlirf/errors.hpp"
#include "nlirf/normal.hpp"
#include "nlirf/rng.hpp"

namespace nlirf {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": data must be finite");
}

bool is_constant(const ScalarFn& fn) {
  if (!fn.f) return true;
  const double probes[] = {-2.5, -1.0, -0.3, 0.0, 0.7, 1.5, 3.0};
  const double first = fn.f(probes[0]);
  for (double p : probes) {
    if (fn.f(p) != first) return false;
  }
  return true;
}

void fisher_yates(std::vector<Eigen::Index>& idx, const CounterRng& rng, std::uint32_t lane) {
  for (std::size_t k = idx.size(); k > 1; --k) {
    const auto j = static_cast<std::size_t>(rng.below(k, k, lane));
    std::swap(idx[k - 1], idx[j]);
  }
}

// Pseudo-inverse of a symmetric PSD matrix.
Matrix psd_pinv(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector& ev = es.eigenvalues();
  const double cut = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-10;
  Vector inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cut ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// Columns: 1, y_j, y_j^2, y_j^3, y_j y_k (j < k).
Matrix sieve_basis(const Matrix& x) {
  const auto T = x.rows(), n = x.cols();
  Matrix s(T, 1 + 3 * n + n * (n - 1) / 2);
  s.col(0).setOnes();
  Eigen::Index c = 1;
  for (Eigen::Index j = 0; j < n; ++j) {
    s.col(c++) = x.col(j);
    s.col(c++) = x.col(j).array().square().matrix();
    s.col(c++) = x.col(j).array().cube().matrix();
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) s.col(c++) = x.col(j).cwiseProduct(x.col(k));
  }
  return s;
}

}  // namespace

nlohmann::json report_to_json(const TestReport& r) {
  nlohmann::json details = nlohmann::json::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  nlohmann::json j{{"test", r.test},
                   {"statistic", r.statistic},
                   {"level", r.level},
                   {"decision", r.reject ? "reject" : "accept"},
                   {"n_obs", r.n_obs},
                   {"dictionary", r.dictionary},
                   {"n_moments", r.n_moments},
                   {"n_resamples", r.n_resamples},
                   {"n_skipped", r.n_skipped},
                   {"details", details},
                   {"notes", r.notes}};
  j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr);
  return j;
}

std::string format_report_table(const std::vector<TestReport>& reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-30s %14s %10s %8s %8s %8s\n", "test", "statistic", "p_value",
                "level", "n_obs", "decision");
  os << line;
  for (const auto& r : reports) {
    char p[32] = "-";
    if (r.p_value) std::snprintf(p, sizeof p, "%.4f", *r.p_value);
    std::snprintf(line, sizeof line, "%-30s %14.6g %10s %8.3f %8zu %8s\n", r.test.c_str(), r.statistic,
                  p, r.level, r.n_obs, r.reject ? "reject" : "accept");
    os << line;
  }
  return os.str();
}

std::vector<ScalarFn> power_functions(int max_power) {
  if (max_power < 1) throw DomainError("power_functions: max_power must be >= 1");
  std::vector<ScalarFn> out;
  for (int p = 1; p <= max_power; ++p) {
    out.push_back({p == 1 ? "x" : "x^" + std::to_string(p), [p](double x) { return std::pow(x, p); }});
  }
  return out;
}

// ---- Markov test ---------------------------------------------------------------------

std::vector<MarkovTriple> default_markov_dictionary() {
  const auto pw = power_functions(2);
  std::vector<MarkovTriple> out;
  for (const auto& a : pw) {
    for (const auto& b : pw) out.push_back({a, b, pw[0]});
  }
  return out;
}

TestReport markov_test(const Matrix& series, const std::vector<MarkovTriple>& dictionary,
                       const MarkovOptions& options) {
  const auto T = series.rows(), n = series.cols();
  if (T < 50) throw DomainError("markov_test: need T >= 50");
  if (n < 1) throw DomainError("markov_test: empty series");
  if (dictionary.empty()) throw DomainError("markov_test: empty dictionary");
  if (options.resamples < 19) throw DomainError("markov_test: need at least 19 resamples");
  require_finite(series, "markov_test");
  for (const auto& tr : dictionary) {
    if (is_constant(tr.a) || is_constant(tr.b)) {
      throw DomainError("markov_test: constant a or b gives a degenerate moment");
    }
    if (!tr.c.f) throw DomainError("markov_test: missing c function");
  }

  TestReport rep;
  rep.test = "markov";
  rep.level = options.level;
  rep.n_obs = static_cast<std::size_t>(T - 2);
  const auto m = T - 2;
  const Matrix now = series.bottomRows(m);
  const Matrix mid = series.middleRows(1, m);
  const Matrix old = series.topRows(m);
  const Matrix s = sieve_basis(mid);
  const Eigen::ColPivHouseholderQR<Matrix> qr(s);

  std::vector<Vector> moments;
  std::string dict;
  for (const auto& tr : dictionary) {
    if (!dict.empty()) dict += "; ";
    dict += "(" + tr.a.name + "," + tr.b.name + "," + tr.c.name + ")";
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector a = now.col(i).unaryExpr(tr.a.f);
      const Vector b = old.col(i).unaryExpr(tr.b.f);
      const Vector c = mid.col(i).unaryExpr(tr.c.f);
      if (!a.allFinite() || !b.allFinite() || !c.allFinite()) {
        ++rep.n_skipped;
        rep.notes.push_back("skipped (" + tr.a.name + "," + tr.b.name + "," + tr.c.name +
                            ") on component " + std::to_string(i + 1) + ": non-finite values");
        continue;
      }
      const Vector ea = a - s * qr.solve(a);
      const Vector eb = b - s * qr.solve(b);
      Vector z = ea.cwiseProduct(eb).cwiseProduct(c);
      if (!z.allFinite()) {
        ++rep.n_skipped;
        continue;
      }
      moments.push_back(std::move(z));
    }
  }
  rep.dictionary = dict;
  const auto K = static_cast<Eigen::Index>(moments.size());
  rep.n_moments = static_cast<std::size_t>(K);
  if (K == 0) throw DomainError("markov_test: every moment was skipped");

  Matrix z(m, K);
  for (Eigen::Index k = 0; k < K; ++k) z.col(k) = moments[static_cast<std::size_t>(k)];
  const Vector mhat = z.colwise().mean().transpose();

  // Stationary bootstrap of the moment rows using circular prefix sums.
  const double block = std::ceil(std::cbrt(static_cast<double>(m)));
  const double log_q = std::log1p(-1.0 / block);
  Matrix prefix(2 * m + 1, K);
  prefix.row(0).setZero();
  for (Eigen::Index t = 0; t < 2 * m; ++t) prefix.row(t + 1) = prefix.row(t) + z.row(t % m);

  const std::size_t B = options.resamples;
  Matrix boot(static_cast<Eigen::Index>(B), K);
  for (std::size_t b = 0; b < B; ++b) {
    const CounterRng rng(options.seed, static_cast<std::uint32_t>(b), StreamPurpose::kBootstrap);
    Vector sum = Vector::Zero(K);
    Eigen::Index filled = 0;
    std::uint64_t draw = 0;
    while (filled < m) {
      const auto start = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m), draw, 0));
      const double u = rng.uniform(draw, 1);
      ++draw;
      auto len = static_cast<Eigen::Index>(1.0 + std::floor(std::log(u) / log_q));
      len = std::min(len, m - filled);
      sum += (prefix.row(start + len) - prefix.row(start)).transpose();
      filled += len;
    }
    boot.row(static_cast<Eigen::Index>(b)) = (sum / static_cast<double>(m)).transpose();
  }
  const Matrix centered = boot.rowwise() - boot.colwise().mean();
  const Matrix var = centered.transpose() * centered / static_cast<double>(B - 1);
  const Matrix w = psd_pinv(var);

  rep.statistic = mhat.dot(w * mhat);
  std::size_t exceed = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const Vector d = boot.row(static_cast<Eigen::Index>(b)).transpose() - mhat;
    if (d.dot(w * d) >= rep.statistic) ++exceed;
  }
  rep.n_resamples = B;
  rep.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(B));
  rep.reject = *rep.p_value <= options.level;
  rep.details.emplace_back("block_length", block);
  return rep;
}

// ---- Strong white noise --------------------------------------------------------------

namespace {

struct WnLayout {
  Matrix f;                       // standardized transformed columns
  std::vector<Eigen::Index> comp;  // component of each column
};

double wn_statistic(const Matrix& f, const std::vector<Eigen::Index>& comp, int max_lag) {
  const auto T = f.rows();
  const auto p = f.cols();
  double total = 0.0;
  const Matrix c0 = f.transpose() * f / static_cast<double>(T);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b) {
      if (comp[static_cast<std::size_t>(a)] < comp[static_cast<std::size_t>(b)]) total += c0(a, b) * c0(a, b);
    }
  }
  for (int k = 1; k <= max_lag; ++k) {
    const Matrix ck = f.bottomRows(T - k).transpose() * f.topRows(T - k) / static_cast<double>(T);
    total += ck.squaredNorm();
  }
  return static_cast<double>(T) * total;
}

}  // namespace

TestReport strong_white_noise_test(const Matrix& eps, const std::vector<ScalarFn>& transforms,
                                   int max_lag, const WhiteNoiseOptions& options) {
  const auto T = eps.rows(), n = eps.cols();
  if (T < 50) throw DomainError("strong_white_noise_test: need T >= 50");
  if (transforms.empty()) throw DomainError("strong_white_noise_test: no transforms");
  if (max_lag < 1 || max_lag >= T / 2) throw DomainError("strong_white_noise_test: bad max_lag");
  if (options.permutations < 19) throw DomainError("strong_white_noise_test: need >= 19 permutations");
  require_finite(eps, "strong_white_noise_test");

  TestReport rep;
  rep.test = "strong_white_noise";
  rep.level = options.level;
  rep.n_obs = static_cast<std::size_t>(T);
  for (const auto& tf : transforms) rep.dictionary += (rep.dictionary.empty() ? "" : ", ") + tf.name;

  std::vector<Vector> cols;
  std::vector<Eigen::Index> comp;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& tf : transforms) {
      Vector v = eps.col(i).unaryExpr(tf.f);
      if (!v.allFinite()) {
        ++rep.n_skipped;
        rep.notes.push_back("skipped " + tf.name + " on component " + std::to_string(i + 1) +
                            ": non-finite values");
        continue;
      }
      v.array() -= v.mean();
      const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(T));
      if (!(sd > 0.0)) {
        ++rep.n_skipped;
        continue;
      }
      cols.push_back(v / sd);
      comp.push_back(i);
    }
  }
  if (cols.empty()) throw DomainError("strong_white_noise_test: every transform was skipped");
  Matrix f(T, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) f.col(static_cast<Eigen::Index>(c)) = cols[c];
  std::size_t contemporaneous = 0;
  for (std::size_t a = 0; a < comp.size(); ++a) {
    for (std::size_t b = 0; b < comp.size(); ++b) contemporaneous += comp[a] < comp[b];
  }
  rep.n_moments = cols.size() * cols.size() * static_cast<std::size_t>(max_lag) + contemporaneous;

  rep.statistic = wn_statistic(f, comp, max_lag);
  std::size_t exceed = 0;
  Matrix perm(T, f.cols());
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(T));
  for (std::size_t p = 0; p < options.permutations; ++p) {
    const CounterRng rng(options.seed, static_cast<std::uint32_t>(p), StreamPurpose::kPermutation);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::iota(idx.begin(), idx.end(), Eigen::Index{0});
      fisher_yates(idx, rng, static_cast<std::uint32_t>(i));
      for (Eigen::Index c = 0; c < f.cols(); ++c) {
        if (comp[static_cast<std::size_t>(c)] != i) continue;
        for (Eigen::Index t = 0; t < T; ++t) perm(t, c) = f(idx[static_cast<std::size_t>(t)], c);
      }
    }
    if (wn_statistic(perm, comp, max_lag) >= rep.statistic) ++exceed;
  }
  rep.n_resamples = options.permutations;
  rep.p_value = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(options.permutations));
  rep.reject = *rep.p_value <= options.level;
  rep.details.emplace_back("max_lag", max_lag);
  return rep;
}

// ---- Distribution invariance ---------------------------------------------------------

TestReport distribution_invariance_test(const Matrix& before, const Matrix& after,
                                        const InvarianceOptions& options) {
  if (before.cols() != after.cols() || before.cols() < 1) {
    throw DomainError("distribution_invariance_test: samples must have the same number of columns");
  }
  if (before.rows() < 2 || after.rows() < 2) throw DomainError("distribution_invariance_test: samples too small");
  require_finite(before, "distribution_invariance_test");
  require_finite(after, "distribution_invariance_test");
  const auto n = before.cols();
  const auto m1 = before.rows(), m2 = after.rows();

  TestReport rep;
  rep.test = "distribution_invariance";
  rep.level = options.level;
  rep.n_obs = static_cast<std::size_t>(m1 + m2);
  rep.dictionary = "two-sample KS per marginal; covariance Frobenius distance";

  double min_p = 1.0, max_d = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> x(before.col(j).data(), before.col(j).data() + m1);
    std::vector<double> y(after.col(j).data(), after.col(j).data() + m2);
    const auto [d, p] = ks_two_sample(std::move(x), std::move(y));
    rep.details.emplace_back("ks_d_" + std::to_string(j + 1), d);
    rep.details.emplace_back("ks_p_" + std::to_string(j + 1), p);
    min_p = std::min(min_p, p);
    max_d = std::max(max_d, d);
  }

  auto cov = [](const Matrix& s) {
    const Matrix c = s.rowwise() - s.colwise().mean();
    return Matrix(c.transpose() * c / static_cast<double>(s.rows() - 1));
  };
  const double dist = (cov(before) - cov(after)).norm();
  Matrix pooled(m1 + m2, n);
  pooled << before, after;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m1 + m2));
  std::size_t exceed = 0;
  Matrix a(m1, n), b(m2, n);
  for (std::size_t p = 0; p < options.permutations; ++p) {
    const CounterRng rng(options.seed, static_cast<std::uint32_t>(p), StreamPurpose::kPermutation);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    fisher_yates(idx, rng, 0);
    for (Eigen::Index r = 0; r < m1; ++r) a.row(r) = pooled.row(idx[static_cast<std::size_t>(r)]);
    for (Eigen::Index r = 0; r < m2; ++r) b.row(r) = pooled.row(idx[static_cast<std::size_t>(m1 + r)]);
    if ((cov(a) - cov(b)).norm() >= dist) ++exceed;
  }
  const double cov_p = (1.0 + static_cast<double>(exceed)) / (1.0 + static_cast<double>(options.permutations));
  rep.details.emplace_back("cov_distance", dist);
  rep.details.emplace_back("cov_p", cov_p);
  rep.n_resamples = options.permutations;
  rep.n_moments = static_cast<std::size_t>(n + 1);

  rep.statistic = max_d;
  const double overall = std::min(1.0, static_cast<double>(n + 1) * std::min(min_p, cov_p));
  rep.p_value = overall;
  rep.reject = overall <= options.level;
  return rep;
}

// ---- Kolmogorov-Smirnov ----------------------------------------------------------------

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double kPi = 3.14159265358979323846;
  if (lambda < 1.18) {
    const double x = kPi * kPi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k < 50; k += 2) {
      const double term = std::exp(-static_cast<double>(k * k) * x);
      s += term;
      if (term < 1e-18) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_pvalue(double d, double n_effective) {
  if (!(n_effective > 0.0)) throw DomainError("ks_pvalue: sample size must be positive");
  const double rn = std::sqrt(n_effective);
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_normal_pvalue(const std::vector<double>& sample) {
  return ks_pvalue(ks_statistic(sample, [](double x) { return normal_cdf(x); }),
                   static_cast<double>(sample.size()));
}

double ks_uniform_pvalue(const std::vector<double>& sample) {
  return ks_pvalue(ks_statistic(sample, [](double x) { return std::clamp(x, 0.0, 1.0); }),
                   static_cast<double>(sample.size()));
}

std::pair<double, double> ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return {d, ks_pvalue(d, nx * ny / (nx + ny))};
}

}  // namespace nlirf
