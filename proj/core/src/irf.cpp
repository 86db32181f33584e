#include "nlirf/irf.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "nlirf/errors.hpp"
#include "nlirf/io.hpp"
#include "nlirf/rng.hpp"

namespace nlirf {

namespace {

constexpr std::size_t kChunk = 256;

void require_vec(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw DomainError(std::string(what) + " has the wrong dimension");
  if (!v.allFinite()) throw DomainError(std::string(what) + " must be finite");
}

void require_shock(const ShockSpec& s, ShockKind kind, Eigen::Index n) {
  if (s.kind != kind) {
    throw DomainError(kind == ShockKind::kInnovation ? "expected an innovation shock"
                                                     : "expected an observable shock");
  }
  if (s.horizon < 0) throw DomainError("shock horizon must be >= 0");
  require_vec(s.vector, n, "shock vector");
}

// Streaming mean and across-horizon comoment for every component.
struct CurveStats {
  std::size_t count = 0;
  std::vector<Vector> mean;    // per component, length H+1
  std::vector<Matrix> comoment;

  CurveStats(Eigen::Index rows, Eigen::Index cols) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      mean.push_back(Vector::Zero(rows));
      comoment.push_back(Matrix::Zero(rows, rows));
    }
  }

  void add(const Matrix& curve) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const Vector x = curve.col(static_cast<Eigen::Index>(j));
      const Vector d = x - mean[j];
      mean[j] += d * inv;
      comoment[j].noalias() += d * (x - mean[j]).transpose();
    }
  }

  void merge(const CurveStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
    const double n = na + nb;
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const Vector d = o.mean[j] - mean[j];
      mean[j] += d * (nb / n);
      comoment[j] += o.comoment[j] + d * d.transpose() * (na * nb / n);
    }
    count += o.count;
  }
};

// Runs `curve(r)` for r = 0..R-1 in fixed chunks merged in chunk order.
template <class CurveFn>
CurveStats run_replicates(Eigen::Index rows, Eigen::Index cols, const McOptions& mc,
                          const CurveFn& curve) {
  if (mc.replicates < 2) throw DomainError("Monte Carlo needs at least 2 replicates");
  const std::size_t n_chunks = (mc.replicates + kChunk - 1) / kChunk;
  std::vector<CurveStats> chunks(n_chunks, CurveStats(rows, cols));
  unsigned workers = mc.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : mc.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));

  auto work = [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(mc.replicates, begin + kChunk);
    for (std::size_t r = begin; r < end; ++r) chunks[c].add(curve(r));
  };

  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  } else {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = w; c < n_chunks; c += workers) work(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  CurveStats total(rows, cols);
  for (const auto& c : chunks) total.merge(c);
  return total;
}

Matrix replicate_normals(const CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix eps(rows, cols);
  for (Eigen::Index h = 0; h < rows; ++h) {
    for (Eigen::Index i = 0; i < cols; ++i) {
      eps(h, i) = rng.normal(static_cast<std::uint64_t>(h), static_cast<std::uint32_t>(i));
    }
  }
  return eps;
}

IRFResult mean_result(const CurveStats& s, const Vector& state) {
  const auto rows = s.mean.front().size();
  const auto cols = static_cast<Eigen::Index>(s.mean.size());
  IRFResult out;
  out.kind = IrfKind::kEirfMean;
  out.n_replicates = s.count;
  out.conditioning_state = state;
  out.per_horizon.resize(rows, cols);
  Matrix se(rows, cols);
  const double n = static_cast<double>(s.count);
  for (Eigen::Index j = 0; j < cols; ++j) {
    out.per_horizon.col(j) = s.mean[static_cast<std::size_t>(j)];
    const Vector var = s.comoment[static_cast<std::size_t>(j)].diagonal().cwiseMax(0.0) / (n - 1.0);
    se.col(j) = (var / n).cwiseSqrt();
  }
  out.mc_stderr = se;
  return out;
}

IRFResult cov_result(const CurveStats& s, const Vector& state) {
  const auto rows = s.mean.front().size();
  const auto cols = static_cast<Eigen::Index>(s.mean.size());
  IRFResult out;
  out.kind = IrfKind::kCirfCov;
  out.n_replicates = s.count;
  out.conditioning_state = state;
  out.per_horizon.resize(rows, cols);
  const double n = static_cast<double>(s.count);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Matrix& c = s.comoment[static_cast<std::size_t>(j)];
    Matrix cov = 0.5 * (c + c.transpose()) / (n - 1.0);
    out.per_horizon.col(j) = cov.diagonal();
    out.covariance.push_back(std::move(cov));
  }
  return out;
}

}  // namespace

IRFResult irf_single(const ModelSpec& model, const Vector& y_prev, const Matrix& eps_stream,
                     const ShockSpec& shock) {
  const int n = model.dim();
  require_shock(shock, ShockKind::kInnovation, n);
  require_vec(y_prev, n, "y_prev");
  if (eps_stream.rows() != shock.horizon + 1 || eps_stream.cols() != n) {
    throw DomainError("irf_single: eps_stream must be (H+1) x n");
  }
  IRFResult out;
  out.conditioning_state = y_prev;
  out.per_horizon.resize(shock.horizon + 1, n);
  Vector base = transition_step(model, y_prev, eps_stream.row(0).transpose());
  Vector pert = transition_step(model, y_prev, eps_stream.row(0).transpose() + shock.vector);
  out.per_horizon.row(0) = (pert - base).transpose();
  for (int h = 1; h <= shock.horizon; ++h) {
    const Vector e = eps_stream.row(h).transpose();
    base = transition_step(model, base, e);
    pert = transition_step(model, pert, e);
    for (const Vector* v : {&base, &pert}) {
      if (!v->allFinite() || v->cwiseAbs().maxCoeff() > kDivergenceThreshold) {
        throw DivergedPathError(static_cast<std::size_t>(h), "irf path diverged at h=" + std::to_string(h));
      }
    }
    out.per_horizon.row(h) = (pert - base).transpose();
  }
  return out;
}

std::pair<IRFResult, IRFResult> eirf_cirf(const ModelSpec& model, const Vector& y_prev,
                                          const ShockSpec& shock, const McOptions& mc) {
  const int n = model.dim();
  require_shock(shock, ShockKind::kInnovation, n);
  require_vec(y_prev, n, "y_prev");
  const CounterRng root(mc.seed, 0, StreamPurpose::kIrfReplicate);
  const auto stats = run_replicates(shock.horizon + 1, n, mc, [&](std::size_t r) {
    const Matrix eps = replicate_normals(root.with_replicate(static_cast<std::uint32_t>(r)),
                                         shock.horizon + 1, n);
    return irf_single(model, y_prev, eps, shock).per_horizon;
  });
  return {mean_result(stats, y_prev), cov_result(stats, y_prev)};
}

IRFResult eirf(const ModelSpec& model, const Vector& y_prev, const ShockSpec& shock,
               const McOptions& mc) {
  return eirf_cirf(model, y_prev, shock, mc).first;
}

IRFResult cirf(const ModelSpec& model, const Vector& y_prev, const ShockSpec& shock,
               const McOptions& mc) {
  return eirf_cirf(model, y_prev, shock, mc).second;
}

IRFResult pirf_single(const ModelSpec& model, const Vector& y_t, const ShockSpec& shock,
                      const Matrix& eps_stream) {
  const int n = model.dim();
  require_shock(shock, ShockKind::kObservable, n);
  require_vec(y_t, n, "y_t");
  if (eps_stream.rows() != shock.horizon || (shock.horizon > 0 && eps_stream.cols() != n)) {
    throw DomainError("pirf_single: eps_stream must be H x n");
  }
  IRFResult out;
  out.conditioning_state = y_t;
  out.per_horizon.resize(shock.horizon + 1, n);
  out.per_horizon.row(0) = shock.vector.transpose();
  Vector base = y_t;
  Vector pert = y_t + shock.vector;
  for (int h = 1; h <= shock.horizon; ++h) {
    const Vector e = eps_stream.row(h - 1).transpose();
    base = transition_step(model, base, e);
    pert = transition_step(model, pert, e);
    for (const Vector* v : {&base, &pert}) {
      if (!v->allFinite() || v->cwiseAbs().maxCoeff() > kDivergenceThreshold) {
        throw DivergedPathError(static_cast<std::size_t>(h), "pirf path diverged at h=" + std::to_string(h));
      }
    }
    out.per_horizon.row(h) = (pert - base).transpose();
  }
  return out;
}

IRFResult pirf_expectation(const ModelSpec& model, const Vector& y_t, const ShockSpec& shock,
                           const McOptions& mc) {
  const int n = model.dim();
  require_shock(shock, ShockKind::kObservable, n);
  require_vec(y_t, n, "y_t");
  const CounterRng root(mc.seed, 0, StreamPurpose::kPirfReplicate);
  const auto stats = run_replicates(shock.horizon + 1, n, mc, [&](std::size_t r) {
    const Matrix eps = replicate_normals(root.with_replicate(static_cast<std::uint32_t>(r)),
                                         shock.horizon, n);
    return pirf_single(model, y_t, shock, eps).per_horizon;
  });
  return mean_result(stats, y_t);
}

Matrix var1_irf_closed_form(const Matrix& phi, const Matrix& d, const Vector& delta, int horizon) {
  const auto n = phi.rows();
  if (phi.cols() != n || d.rows() != n || d.cols() != n || delta.size() != n) {
    throw DomainError("var1_irf_closed_form: dimension mismatch");
  }
  if (horizon < 0) throw DomainError("var1_irf_closed_form: horizon must be >= 0");
  Matrix out(horizon + 1, n);
  Vector v = d * delta;
  for (int h = 0; h <= horizon; ++h) {
    out.row(h) = v.transpose();
    v = phi * v;
  }
  return out;
}

Matrix cumulated_irf(const Matrix& phi, const Matrix& d, const Vector& delta, int horizon) {
  Matrix out = var1_irf_closed_form(phi, d, delta, horizon);
  for (int h = 1; h <= horizon; ++h) out.row(h) += out.row(h - 1);
  return out;
}

MaxIrfResult max_irf(const Matrix& phi, const Matrix& d, const Vector& a, int h) {
  const auto n = phi.rows();
  if (phi.cols() != n || d.rows() != n || d.cols() != n || a.size() != n) {
    throw DomainError("max_irf: dimension mismatch");
  }
  if (h < 0) throw DomainError("max_irf: horizon must be >= 0");
  if (a.norm() == 0.0) throw DomainError("max_irf: a must be nonzero");
  Vector w = a;
  for (int k = 0; k < h; ++k) w = phi.transpose() * w;
  const Vector dir = d.transpose() * w;
  const double norm = dir.norm();
  if (norm < 1e-12) throw DegenerateDirectionError("max_irf: D' Phi'^h a vanishes");
  return {norm, dir / norm};
}

// ---- Factor model ------------------------------------------------------------------

int FactorModel::source_dim() const {
  int m = 0;
  for (const auto& s : sources) m += s.dim();
  return m;
}

Vector FactorModel::step(const Vector& x_prev, const Vector& eps) const {
  Vector out(x_prev.size());
  Eigen::Index off = 0;
  for (const auto& s : sources) {
    const int k = s.dim();
    out.segment(off, k) = transition_step(s, x_prev.segment(off, k), eps.segment(off, k));
    off += k;
  }
  return out;
}

std::function<Vector(const Vector&)> linear_mixing(const Matrix& a) {
  return [a](const Vector& x) -> Vector { return a * x; };
}

IRFResult factor_irf(const FactorModel& factor, const Vector& x_prev, const ShockSpec& shock,
                     const McOptions& mc) {
  if (factor.sources.empty() || !factor.mixing) throw DomainError("factor_irf: empty factor model");
  const int m = factor.source_dim();
  require_shock(shock, ShockKind::kInnovation, m);
  require_vec(x_prev, m, "x_prev");
  const auto n = factor.mixing(x_prev).size();
  const CounterRng root(mc.seed, 0, StreamPurpose::kFactorReplicate);
  const auto stats = run_replicates(shock.horizon + 1, n, mc, [&](std::size_t r) {
    const Matrix eps = replicate_normals(root.with_replicate(static_cast<std::uint32_t>(r)),
                                         shock.horizon + 1, m);
    Matrix curve(shock.horizon + 1, n);
    Vector base = factor.step(x_prev, eps.row(0).transpose());
    Vector pert = factor.step(x_prev, eps.row(0).transpose() + shock.vector);
    curve.row(0) = (factor.mixing(pert) - factor.mixing(base)).transpose();
    for (int h = 1; h <= shock.horizon; ++h) {
      const Vector e = eps.row(h).transpose();
      base = factor.step(base, e);
      pert = factor.step(pert, e);
      curve.row(h) = (factor.mixing(pert) - factor.mixing(base)).transpose();
    }
    return curve;
  });
  return mean_result(stats, x_prev);
}

// ---- Output ------------------------------------------------------------------------

void write_irf_csv(std::ostream& out, const IRFResult& irf) {
  out << "h,component,value,stderr\n";
  for (Eigen::Index h = 0; h < irf.per_horizon.rows(); ++h) {
    for (Eigen::Index j = 0; j < irf.per_horizon.cols(); ++j) {
      out << h << ',' << (j + 1) << ',' << format_real(irf.per_horizon(h, j)) << ','
          << format_real(irf.mc_stderr ? (*irf.mc_stderr)(h, j) : 0.0) << '\n';
    }
  }
}

std::string render_irf_svg(const IRFResult& irf, const std::string& title) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  const auto rows = irf.per_horizon.rows();
  const auto cols = irf.per_horizon.cols();
  double lo = 0.0, hi = 0.0;
  for (Eigen::Index h = 0; h < rows; ++h) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double band = irf.mc_stderr ? 2.0 * (*irf.mc_stderr)(h, j) : 0.0;
      lo = std::min(lo, irf.per_horizon(h, j) - band);
      hi = std::max(hi, irf.per_horizon(h, j) + band);
    }
  }
  const double pad = std::max(1e-12, 0.08 * (hi - lo));
  SvgCanvas svg(640, 400, 0.0, std::max<double>(1.0, static_cast<double>(rows - 1)), lo - pad, hi + pad, 50.0);
  svg.title(title);
  svg.polyline({{0.0, 0.0}, {static_cast<double>(std::max<Eigen::Index>(1, rows - 1)), 0.0}}, "#999999", 0.75);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const char* color = kColors[j % 6];
    if (irf.mc_stderr) {
      std::vector<Point2> band;
      for (Eigen::Index h = 0; h < rows; ++h) {
        band.push_back({static_cast<double>(h), irf.per_horizon(h, j) + 2.0 * (*irf.mc_stderr)(h, j)});
      }
      for (Eigen::Index h = rows - 1; h >= 0; --h) {
        band.push_back({static_cast<double>(h), irf.per_horizon(h, j) - 2.0 * (*irf.mc_stderr)(h, j)});
      }
      svg.polygon(band, color, 0.2);
    }
    std::vector<Point2> line;
    for (Eigen::Index h = 0; h < rows; ++h) line.push_back({static_cast<double>(h), irf.per_horizon(h, j)});
    svg.polyline(line, color, 1.5);
    svg.text({static_cast<double>(rows - 1), irf.per_horizon(rows - 1, j)}, "y" + std::to_string(j + 1), 10.0, "start");
  }
  svg.frame();
  svg.axes_ticks(std::min<int>(10, static_cast<int>(std::max<Eigen::Index>(1, rows - 1))), 4);
  return svg.str();
}

}  // namespace nlirf
