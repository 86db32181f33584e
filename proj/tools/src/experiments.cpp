#include "nlirf/experiments.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "nlirf/bss.hpp"
#include "nlirf/diagnostics.hpp"
#include "nlirf/errors.hpp"
#include "nlirf/identified_set.hpp"
#include "nlirf/innovations.hpp"
#include "nlirf/io.hpp"
#include "nlirf/irf.hpp"
#include "nlirf/normal.hpp"
#include "nlirf/rng.hpp"

namespace nlirf {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kCommands = {"simulate", "innovations", "irf",  "pirf",
                                         "maxirf",   "identified-set", "figure1", "bss",
                                         "gcov",     "markov-test", "wn-test"};

// ---- Option readers -------------------------------------------------------------

const nlohmann::json& options_of(const ExperimentConfig& c) {
  static const nlohmann::json empty = nlohmann::json::object();
  return c.doc.contains("options") ? c.doc["options"] : empty;
}

long long opt_int(const nlohmann::json& obj, const char* key, long long fallback, long long min_value) {
  const std::string path = std::string("options.") + key;
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  const auto x = v.get<long long>();
  if (x < min_value) throw SchemaError(path, "must be >= " + std::to_string(min_value));
  return x;
}

double opt_double(const nlohmann::json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return number_from_json(obj, key, "options");
}

Vector opt_vector(const nlohmann::json& obj, const char* key, int size, const Vector& fallback) {
  if (!obj.contains(key)) return fallback;
  return vector_from_json(obj[key], std::string("options.") + key, size);
}

std::vector<int> opt_int_list(const nlohmann::json& obj, const char* key, std::vector<int> fallback,
                              int min_value) {
  if (!obj.contains(key)) return fallback;
  const std::string path = std::string("options.") + key;
  const auto& v = obj[key];
  if (!v.is_array() || v.empty()) throw SchemaError(path, "expected a non-empty integer array");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer() || v[i].get<int>() < min_value) {
      throw SchemaError(path + "[" + std::to_string(i) + "]", "expected an integer >= " + std::to_string(min_value));
    }
    out.push_back(v[i].get<int>());
  }
  return out;
}

ModelSpec model_of(const ExperimentConfig& c) {
  if (!c.doc.contains("model")) throw SchemaError("model", "missing required field for '" + c.command + "'");
  return ModelSpec::from_json(c.doc["model"]);
}

ShockSpec shock_of(const ExperimentConfig& c, ShockKind expected, int n) {
  if (!c.doc.contains("shock")) throw SchemaError("shock", "missing required field");
  const auto& s = c.doc["shock"];
  if (!s.is_object()) throw SchemaError("shock", "expected an object");
  ShockSpec out;
  const std::string kind = s.contains("kind") && s["kind"].is_string() ? s["kind"].get<std::string>() : "";
  if (kind == "innovation") {
    out.kind = ShockKind::kInnovation;
  } else if (kind == "observable") {
    out.kind = ShockKind::kObservable;
  } else {
    throw SchemaError("shock.kind", "expected \"innovation\" or \"observable\"");
  }
  if (out.kind != expected) {
    throw SchemaError("shock.kind", std::string("command '") + c.command + "' needs a" +
                                        (expected == ShockKind::kInnovation ? "n innovation" : "n observable") +
                                        " shock");
  }
  if (!s.contains("vector")) throw SchemaError("shock.vector", "missing required field");
  out.vector = vector_from_json(s["vector"], "shock.vector", n);
  if (!s.contains("horizon") || !s["horizon"].is_number_integer() || s["horizon"].get<int>() < 0) {
    throw SchemaError("shock.horizon", "expected an integer >= 0");
  }
  out.horizon = s["horizon"].get<int>();
  return out;
}

McOptions mc_of(const ExperimentConfig& c) { return {c.replicates, c.seed, c.workers}; }

// ---- Output helpers ---------------------------------------------------------------

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    names_.push_back(name);
  }
  void json(const std::string& name, const nlohmann::json& j) { text(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

std::string csv_indexed(const Matrix& m, const char* prefix, long first_t) {
  std::ostringstream os;
  write_indexed_csv(os, m, prefix, first_t);
  return os.str();
}

Matrix with_initial_row(const Trajectory& traj) {
  Matrix m(traj.states.rows() + 1, traj.states.cols());
  m.row(0) = traj.y0.transpose();
  m.bottomRows(traj.states.rows()) = traj.states;
  return m;
}

Trajectory from_rows(const Matrix& rows) {
  if (rows.rows() < 2) throw DomainError("input series needs an initial row and at least one state");
  Trajectory traj;
  traj.y0 = rows.row(0).transpose();
  traj.states = rows.bottomRows(rows.rows() - 1);
  return traj;
}

Matrix input_series(const ExperimentConfig& c) {
  if (!c.input) throw SchemaError("io.input", "missing required input CSV");
  return ingest_csv(*c.input);
}

Trajectory input_or_simulated(const ExperimentConfig& c, const ModelSpec& model) {
  if (c.input) return from_rows(input_series(c));
  const auto& o = options_of(c);
  const auto T = static_cast<std::size_t>(opt_int(o, "T", 1000, 1));
  const Vector y0 = opt_vector(o, "y0", model.dim(), Vector::Zero(model.dim()));
  return simulate_path(model, y0, T, c.seed);
}

std::string fmt(double x) { return format_real(x); }

// ---- Commands -----------------------------------------------------------------------

std::string cmd_simulate(const ExperimentConfig& c, Artifacts& out) {
  const ModelSpec model = model_of(c);
  const auto& o = options_of(c);
  const auto T = static_cast<std::size_t>(opt_int(o, "T", 1000, 1));
  const Vector y0 = opt_vector(o, "y0", model.dim(), Vector::Zero(model.dim()));
  const Trajectory traj = simulate_path(model, y0, T, c.seed);
  out.text("trajectory.csv", csv_indexed(with_initial_row(traj), "y", 0));
  out.text("innovations_used.csv", csv_indexed(*traj.innovations, "eps_", 1));
  return "simulated " + std::to_string(T) + " steps of " + model.id();
}

ComponentOrder order_of(const nlohmann::json& o, int n) {
  if (!o.contains("order")) return {};
  const auto v = opt_int_list(o, "order", {}, 1);
  ComponentOrder order;
  for (int k : v) order.push_back(k - 1);
  if (static_cast<int>(order.size()) != n) throw SchemaError("options.order", "must list every component once");
  return order;
}

std::string cmd_innovations(const ExperimentConfig& c, Artifacts& out) {
  const ModelSpec model = model_of(c);
  const auto& o = options_of(c);
  const ComponentOrder order = order_of(o, model.dim());
  const Trajectory traj = input_or_simulated(c, model);
  const InnovationMatrix eps = extract_gaussian_innovations(model, traj, order);
  const InnovationMatrix u = extract_uniform_innovations(model, traj, order);
  const Trajectory back = reconstruct_path(model, traj.y0, eps, order);
  const double dev = (back.states - traj.states).cwiseAbs().maxCoeff();
  out.text("innovations.csv", csv_indexed(eps.values, "eps_", 1));
  out.text("uniform_innovations.csv", csv_indexed(u.values, "u_", 1));

  WhiteNoiseOptions wn;
  wn.seed = c.seed;
  wn.permutations = static_cast<std::size_t>(opt_int(o, "permutations", 199, 19));
  wn.level = opt_double(o, "level", 0.05);
  const int max_lag = static_cast<int>(opt_int(o, "max_lag", 5, 1));
  TestReport wn_rep;
  nlohmann::json report{{"model_id", model.id()},
                        {"T", traj.states.rows()},
                        {"reconstruction_max_abs_deviation", dev}};
  if (traj.states.rows() >= 50) {
    wn_rep = strong_white_noise_test(eps.values, power_functions(3), max_lag, wn);
    report["white_noise_test"] = report_to_json(wn_rep);
  }
  out.json("innovations_report.json", report);
  std::string s = "extracted " + std::to_string(eps.values.rows()) + "x" + std::to_string(eps.values.cols()) +
                  " innovations; reconstruction max deviation " + fmt(dev) + "\n";
  if (traj.states.rows() >= 50) s += format_report_table({wn_rep});
  return s;
}

std::string cmd_irf(const ExperimentConfig& c, Artifacts& out) {
  const ModelSpec model = model_of(c);
  const ShockSpec shock = shock_of(c, ShockKind::kInnovation, model.dim());
  const Vector y_prev = opt_vector(options_of(c), "y_prev", model.dim(), Vector::Zero(model.dim()));
  const McOptions mc = mc_of(c);

  Matrix stream(shock.horizon + 1, model.dim());
  const CounterRng rng(c.seed, 0, StreamPurpose::kIrfReplicate);
  for (int h = 0; h <= shock.horizon; ++h) {
    for (int i = 0; i < model.dim(); ++i) stream(h, i) = rng.normal(static_cast<std::uint64_t>(h), static_cast<std::uint32_t>(i));
  }
  const IRFResult single = irf_single(model, y_prev, stream, shock);
  const auto [mean, cov] = eirf_cirf(model, y_prev, shock, mc);

  std::ostringstream s1, s2, s3;
  write_irf_csv(s1, single);
  write_irf_csv(s2, mean);
  s3 << "h,k,component,value\n";
  for (std::size_t j = 0; j < cov.covariance.size(); ++j) {
    const Matrix& m = cov.covariance[j];
    for (Eigen::Index h = 0; h < m.rows(); ++h) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) s3 << h << ',' << k << ',' << (j + 1) << ',' << fmt(m(h, k)) << '\n';
    }
  }
  out.text("irf_single.csv", s1.str());
  out.text("eirf.csv", s2.str());
  out.text("cirf.csv", s3.str());
  out.text("eirf.svg", render_irf_svg(mean, "EIRF, " + std::string(family_name(model.family()))));

  std::string summary = "EIRF over " + std::to_string(mean.n_replicates) + " replicates, horizon " +
                        std::to_string(shock.horizon);
  if (model.family() == Family::kGaussianVar1) {
    const auto& p = model.as<GaussianVar1Params>();
    const Matrix closed = var1_irf_closed_form(p.phi, p.d, shock.vector, shock.horizon);
    IRFResult cf;
    cf.per_horizon = closed;
    std::ostringstream s4, s5;
    write_irf_csv(s4, cf);
    cf.per_horizon = cumulated_irf(p.phi, p.d, shock.vector, shock.horizon);
    write_irf_csv(s5, cf);
    out.text("irf_closed_form.csv", s4.str());
    out.text("irf_cumulated.csv", s5.str());
    summary += "; max |single - closed form| = " + fmt((single.per_horizon - closed).cwiseAbs().maxCoeff());
  }
  return summary;
}

std::string cmd_pirf(const ExperimentConfig& c, Artifacts& out) {
  const ModelSpec model = model_of(c);
  const ShockSpec shock = shock_of(c, ShockKind::kObservable, model.dim());
  const Vector y_t = opt_vector(options_of(c), "y_t", model.dim(), Vector::Zero(model.dim()));
  const IRFResult mean = pirf_expectation(model, y_t, shock, mc_of(c));
  std::ostringstream s;
  write_irf_csv(s, mean);
  out.text("pirf.csv", s.str());
  out.text("pirf.svg", render_irf_svg(mean, "PIRF, " + std::string(family_name(model.family()))));
  return "PIRF over " + std::to_string(mean.n_replicates) + " replicates, horizon " + std::to_string(shock.horizon);
}

std::string cmd_maxirf(const ExperimentConfig& c, Artifacts& out) {
  const auto& o = options_of(c);
  Matrix phi, d;
  if (c.doc.contains("model")) {
    const ModelSpec model = model_of(c);
    if (model.family() != Family::kGaussianVar1) throw SchemaError("model.family", "maxirf needs gaussian_var1");
    phi = model.as<GaussianVar1Params>().phi;
    d = model.as<GaussianVar1Params>().d;
  } else {
    if (!o.contains("Phi") || !o.contains("D")) throw SchemaError("options.Phi", "give a gaussian_var1 model or Phi and D");
    phi = matrix_from_json(o["Phi"], "options.Phi");
    d = matrix_from_json(o["D"], "options.D", static_cast<int>(phi.rows()), static_cast<int>(phi.cols()));
  }
  const int n = static_cast<int>(phi.rows());
  if (!o.contains("a")) throw SchemaError("options.a", "missing required field");
  const Vector a = vector_from_json(o["a"], "options.a", n);
  const auto horizons = opt_int_list(o, "horizons", {0, 1, 2, 3, 4, 5}, 0);
  nlohmann::json rows = nlohmann::json::array();
  std::string s = "h      value\n";
  for (int h : horizons) {
    const MaxIrfResult r = max_irf(phi, d, a, h);
    rows.push_back({{"h", h}, {"value", r.value}, {"delta_star", vector_to_json(r.delta_star)}});
    s += std::to_string(h) + "  " + fmt(r.value) + "\n";
  }
  out.json("maxirf.json", {{"a", vector_to_json(a)}, {"results", rows}});
  return s;
}

RadialRotationSpec rotation_of(const nlohmann::json& o, std::uint64_t seed) {
  if (!o.contains("rotation")) return RadialRotationSpec::constant_angle(1.0);
  const auto& r = o["rotation"];
  const std::string type = r.contains("type") && r["type"].is_string() ? r["type"].get<std::string>() : "";
  if (type == "constant") return RadialRotationSpec::constant_angle(number_from_json(r, "a", "options.rotation"));
  if (type == "linear") return RadialRotationSpec::linear_angle(number_from_json(r, "c", "options.rotation"));
  if (type == "random") {
    if (!r.contains("n") || !r["n"].is_number_integer()) throw SchemaError("options.rotation.n", "expected an integer");
    return RadialRotationSpec::scaled_random(r["n"].get<int>(), number_from_json(r, "c", "options.rotation"), seed);
  }
  throw SchemaError("options.rotation.type", "expected \"constant\", \"linear\" or \"random\"");
}

std::string cmd_identified_set(const ExperimentConfig& c, Artifacts& out) {
  const auto& o = options_of(c);
  const RadialRotationSpec spec = rotation_of(o, c.seed);
  const auto draws = static_cast<Eigen::Index>(opt_int(o, "draws", 100000, 100));
  const auto points = static_cast<std::size_t>(opt_int(o, "points", 100, 1));
  const int n = spec.dim();
  const CounterRng rng(c.seed, 0, StreamPurpose::kSampling);
  Matrix before(draws, n), after(draws, n), uafter(draws, n);
  double norm_dev = 0.0;
  for (Eigen::Index t = 0; t < draws; ++t) {
    Vector e(n);
    for (int i = 0; i < n; ++i) e(i) = rng.normal(static_cast<std::uint64_t>(t), static_cast<std::uint32_t>(i));
    const Vector eta = radial_rotation_gauss(e, spec);
    norm_dev = std::max(norm_dev, std::abs(eta.norm() - e.norm()));
    before.row(t) = e.transpose();
    after.row(t) = eta.transpose();
    for (int i = 0; i < n; ++i) uafter(t, i) = normal_cdf(eta(i));
  }
  nlohmann::json marg = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    std::vector<double> g(after.col(i).data(), after.col(i).data() + draws);
    std::vector<double> u(uafter.col(i).data(), uafter.col(i).data() + draws);
    marg.push_back({{"component", i + 1}, {"ks_normal_p", ks_normal_pvalue(g)}, {"ks_uniform_p", ks_uniform_pvalue(u)}});
  }
  const Matrix centered = after.rowwise() - after.colwise().mean();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(draws - 1);
  const double cov_dev = (cov - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();

  // A fresh normal sample for the two-sample comparison.
  const CounterRng fresh(c.seed, 1, StreamPurpose::kSampling);
  Matrix ref(draws, n);
  for (Eigen::Index t = 0; t < draws; ++t) {
    for (int i = 0; i < n; ++i) ref(t, i) = fresh.normal(static_cast<std::uint64_t>(t), static_cast<std::uint32_t>(i));
  }
  InvarianceOptions inv;
  inv.seed = c.seed;
  inv.level = opt_double(o, "level", 0.01);
  inv.permutations = static_cast<std::size_t>(opt_int(o, "permutations", 99, 19));
  const TestReport inv_rep = distribution_invariance_test(ref, after, inv);

  std::vector<Vector> pts;
  const CounterRng prng(c.seed, 2, StreamPurpose::kSampling);
  for (std::size_t k = 0; k < points; ++k) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = 0.02 + 0.96 * prng.uniform(k, static_cast<std::uint32_t>(i));
    pts.push_back(u);
  }
  const JacobianReport jac = jacobian_det_check([&](const Vector& u) { return radial_rotation_uniform(u, spec); }, pts);

  nlohmann::json j{{"rotation", spec.description()},
                   {"draws", draws},
                   {"max_norm_deviation", norm_dev},
                   {"marginals", marg},
                   {"max_cov_deviation_from_identity", cov_dev},
                   {"invariance_test", report_to_json(inv_rep)},
                   {"jacobian",
                    {{"points", jac.n_points},
                     {"evaluated", jac.n_evaluated},
                     {"skipped", jac.n_skipped},
                     {"max_abs_det_minus_one", jac.max_abs_det_minus_one},
                     {"max_structure_residual",
                      std::isnan(jac.max_structure_residual) ? nlohmann::json(nullptr)
                                                             : nlohmann::json(jac.max_structure_residual)},
                     {"flagged", jac.flagged}}}};
  out.json("identified_set.json", j);
  return spec.description() + ": max norm deviation " + fmt(norm_dev) + ", max |det-1| " +
         fmt(jac.max_abs_det_minus_one) + "\n" + format_report_table({inv_rep});
}

std::string cmd_figure1(const ExperimentConfig& c, Artifacts& out) {
  const auto& o = options_of(c);
  GridOptions g;
  g.segments = static_cast<int>(opt_int(o, "segments", 75, 1));
  g.samples = static_cast<int>(opt_int(o, "samples", 200, 2));
  struct Panel {
    const char* tag;
    RadialRotationSpec spec;
    const char* label;
  };
  const Panel panels[] = {{"a1", RadialRotationSpec::constant_angle(1.0), "a(rho) = 1"},
                          {"a02rho", RadialRotationSpec::linear_angle(0.2), "a(rho) = 0.2 rho"}};
  std::size_t n_points = 0;
  for (const auto& p : panels) {
    const auto curves = grid_deformation(p.spec, g);
    for (const auto& cv : curves) n_points += cv.points.size();
    std::ostringstream csv;
    write_grid_csv(csv, curves);
    out.text(std::string("grid_") + p.tag + ".csv", csv.str());
    out.text(std::string("figure1_") + p.tag + "_uniform.svg",
             render_grid_svg(curves, true, std::string(p.label) + ", uniform space"));
    out.text(std::string("figure1_") + p.tag + "_gaussian.svg",
             render_grid_svg(curves, false, std::string(p.label) + ", Gaussian space"));
  }
  return "four panels, " + std::to_string(g.segments) + " segments per axis, " + std::to_string(n_points) + " points";
}

Matrix bivariate_data(const ExperimentConfig& c) {
  const auto& o = options_of(c);
  if (c.input) {
    Matrix y = input_series(c);
    if (y.cols() != 2) throw SchemaError("io.input", "expected a bivariate series t,y1,y2");
    return y;
  }
  if (!o.contains("generate")) throw SchemaError("io.input", "give an input CSV or options.generate");
  const auto& gen = o["generate"];
  const Vector rho = vector_from_json(gen.value("rho", nlohmann::json()), "options.generate.rho", 2);
  const Vector sigma = gen.contains("sigma") ? vector_from_json(gen["sigma"], "options.generate.sigma", 2)
                                             : Vector::Ones(2);
  const Matrix a = matrix_from_json(gen.value("A", nlohmann::json()), "options.generate.A", 2, 2);
  if (!gen.contains("T") || !gen["T"].is_number_integer() || gen["T"].get<long long>() < 10) {
    throw SchemaError("options.generate.T", "expected an integer >= 10");
  }
  return mix(simulate_ar1_sources(rho, sigma, gen["T"].get<std::size_t>(), c.seed), a);
}

std::string cmd_bss(const ExperimentConfig& c, Artifacts& out) {
  const Matrix y = bivariate_data(c);
  const auto lags = opt_int_list(options_of(c), "lags", {1, 2, 3, 4, 5}, 1);
  const MixingEstimate est = estimate_mixing(sample_autocov(y, lags));
  nlohmann::json j = mixing_to_json(est);
  j["T"] = y.rows();
  j["lags"] = lags;
  out.json("mixing.json", j);
  std::string s = "a12 roots:";
  for (double r : est.roots) s += " " + fmt(r);
  for (const auto& w : est.warnings) s += "\nwarning: " + w;
  return s;
}

std::string cmd_gcov(const ExperimentConfig& c, Artifacts& out) {
  const auto& o = options_of(c);
  const Matrix y = bivariate_data(c);
  Vector init;
  if (o.contains("init")) {
    init = vector_from_json(o["init"], "options.init", 4);
  } else {
    const MixingEstimate est = estimate_mixing(sample_autocov(y, {1, 2, 3, 4, 5}));
    const Matrix x = demix(y, est.candidates.front());
    const AutocovSet ac = sample_autocov(x, {0, 1});
    init.resize(4);
    init << est.roots.front(), est.a21.front(), ac.at(1)(0, 0) / ac.at(0)(0, 0), ac.at(1)(1, 1) / ac.at(0)(1, 1);
  }
  const auto powers = opt_int_list(o, "powers", {1}, 1);
  const auto lags = opt_int_list(o, "lags", {0, 1, 2, 3, 4, 5}, 0);
  GcovOptions go;
  go.budget = static_cast<std::size_t>(opt_int(o, "budget", 4000, 1));
  const GcovResult r = gcov_estimate(ar1_source_residuals, init, y, power_transforms(powers), lags, go);
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& tp : r.trace) {
    trace.push_back({{"evaluation", tp.evaluation}, {"objective", tp.objective}, {"params", vector_to_json(tp.params)}});
  }
  out.json("gcov.json", {{"init", vector_to_json(init)},
                         {"params", vector_to_json(r.params)},
                         {"param_names", {"a12", "a21", "rho1", "rho2"}},
                         {"objective", r.objective},
                         {"converged", r.converged},
                         {"evaluations", r.evaluations},
                         {"curvature_ratio", r.curvature_ratio},
                         {"flat", r.flat},
                         {"trace", trace}});
  return "objective " + fmt(r.objective) + " after " + std::to_string(r.evaluations) + " evaluations" +
         (r.converged ? "" : " (not converged)") + (r.flat ? "; objective is flat" : "");
}

Matrix series_for_test(const ExperimentConfig& c) {
  if (c.input) return input_series(c);
  const ModelSpec model = model_of(c);
  const auto& o = options_of(c);
  const auto T = static_cast<std::size_t>(opt_int(o, "T", 2000, 50));
  const Vector y0 = opt_vector(o, "y0", model.dim(), Vector::Zero(model.dim()));
  return simulate_path(model, y0, T, c.seed).states;
}

std::string cmd_markov(const ExperimentConfig& c, Artifacts& out) {
  const auto& o = options_of(c);
  const Matrix y = series_for_test(c);
  MarkovOptions mo;
  mo.seed = c.seed;
  mo.level = opt_double(o, "level", 0.05);
  mo.resamples = static_cast<std::size_t>(opt_int(o, "resamples", 499, 19));
  const TestReport rep = markov_test(y, default_markov_dictionary(), mo);
  out.json("markov_test.json", report_to_json(rep));
  return format_report_table({rep});
}

std::string cmd_wn(const ExperimentConfig& c, Artifacts& out) {
  const auto& o = options_of(c);
  Matrix eps;
  if (c.input) {
    eps = input_series(c);
  } else {
    const ModelSpec model = model_of(c);
    eps = extract_gaussian_innovations(model, input_or_simulated(c, model)).values;
  }
  WhiteNoiseOptions wo;
  wo.seed = c.seed;
  wo.level = opt_double(o, "level", 0.05);
  wo.permutations = static_cast<std::size_t>(opt_int(o, "permutations", 199, 19));
  const int max_power = static_cast<int>(opt_int(o, "max_power", 3, 1));
  const int max_lag = static_cast<int>(opt_int(o, "max_lag", 5, 1));
  const TestReport rep = strong_white_noise_test(eps, power_functions(max_power), max_lag, wo);
  out.json("wn_test.json", report_to_json(rep));
  return format_report_table({rep});
}

}  // namespace

// ---- Config ---------------------------------------------------------------------------

ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override,
                              std::optional<fs::path> out_override) {
  if (!doc.is_object()) throw SchemaError("$", "config must be a JSON object");
  ExperimentConfig c;
  c.doc = doc;
  if (!doc.contains("command") || !doc["command"].is_string()) throw SchemaError("command", "missing or not a string");
  c.command = doc["command"].get<std::string>();
  if (!kCommands.count(c.command)) throw SchemaError("command", "unknown command '" + c.command + "'");
  for (const char* key : {"mc", "io", "options"}) {
    if (doc.contains(key) && !doc[key].is_object()) throw SchemaError(key, "expected an object");
  }
  const nlohmann::json mc = doc.value("mc", nlohmann::json::object());
  if (seed_override) {
    c.seed = *seed_override;
  } else {
    if (!mc.contains("seed")) throw SchemaError("mc.seed", "missing required field (no wall-clock default)");
    if (!mc["seed"].is_number_integer() || (!mc["seed"].is_number_unsigned() && mc["seed"].get<long long>() < 0)) throw SchemaError("mc.seed", "expected a non-negative integer");
    c.seed = mc["seed"].get<std::uint64_t>();
  }
  c.doc["mc"]["seed"] = c.seed;
  if (mc.contains("replicates")) {
    if (!mc["replicates"].is_number_integer() || mc["replicates"].get<long long>() < 2) {
      throw SchemaError("mc.replicates", "expected an integer >= 2");
    }
    c.replicates = mc["replicates"].get<std::size_t>();
  }
  if (mc.contains("workers")) {
    if (!mc["workers"].is_number_integer() || mc["workers"].get<long long>() < 0) {
      throw SchemaError("mc.workers", "expected an integer >= 0");
    }
    c.workers = mc["workers"].get<unsigned>();
  }
  const nlohmann::json io = doc.value("io", nlohmann::json::object());
  if (io.contains("input")) {
    if (!io["input"].is_string()) throw SchemaError("io.input", "expected a path string");
    c.input = fs::path(io["input"].get<std::string>());
    if (!fs::exists(*c.input)) throw SchemaError("io.input", "file does not exist: " + c.input->string());
  }
  if (out_override) {
    c.output_dir = *out_override;
  } else if (io.contains("output_dir")) {
    if (!io["output_dir"].is_string()) throw SchemaError("io.output_dir", "expected a path string");
    c.output_dir = io["output_dir"].get<std::string>();
  } else {
    c.output_dir = "nlirf_out";
  }
  c.doc["io"]["output_dir"] = c.output_dir.string();
  if (doc.contains("model")) ModelSpec::from_json(doc["model"]);  // fail early with a field path
  return c;
}

RunResult run(const ExperimentConfig& c) {
  Artifacts out(c.output_dir);
  std::string summary;
  if (c.command == "simulate") summary = cmd_simulate(c, out);
  else if (c.command == "innovations") summary = cmd_innovations(c, out);
  else if (c.command == "irf") summary = cmd_irf(c, out);
  else if (c.command == "pirf") summary = cmd_pirf(c, out);
  else if (c.command == "maxirf") summary = cmd_maxirf(c, out);
  else if (c.command == "identified-set") summary = cmd_identified_set(c, out);
  else if (c.command == "figure1") summary = cmd_figure1(c, out);
  else if (c.command == "bss") summary = cmd_bss(c, out);
  else if (c.command == "gcov") summary = cmd_gcov(c, out);
  else if (c.command == "markov-test") summary = cmd_markov(c, out);
  else if (c.command == "wn-test") summary = cmd_wn(c, out);
  else throw SchemaError("command", "unknown command '" + c.command + "'");

  RunResult r;
  r.artifacts = out.names();
  r.summary = summary;
  char eigen[32];
  std::snprintf(eigen, sizeof eigen, "%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  char njson[32];
  std::snprintf(njson, sizeof njson, "%d.%d.%d", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                NLOHMANN_JSON_VERSION_PATCH);
  out.json("manifest.json", {{"tool", "nlirf"},
                             {"version", kToolVersion},
                             {"command", c.command},
                             {"config_hash", hex64(fnv1a64(c.doc.dump()))},
                             {"seed", c.seed},
                             {"artifacts", r.artifacts},
                             {"libraries", {{"eigen", eigen}, {"nlohmann_json", njson}}}});
  r.artifacts.push_back("manifest.json");
  return r;
}

int run_and_report(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const RunResult r = run(config);
    out << r.summary << '\n';
    for (const auto& a : r.artifacts) out << "wrote " << (config.output_dir / a).string() << '\n';
    return 0;
  } catch (const SchemaError& e) {
    err << "schema error at " << e.path() << ": " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  }
}

// ---- CSV ingestion ------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(cur);
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return cells;
}

}  // namespace

Matrix ingest_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = split_csv_line(line);
  }
  if (header.empty()) throw ParseError(std::max<std::size_t>(lineno, 1), "empty input");
  if (header[0] != "t") throw ParseError(lineno, "first header cell must be 't'");
  if (header.size() < 2) throw ParseError(lineno, "no data columns");
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k].empty()) throw ParseError(lineno, "empty column name in header");
  }
  const std::size_t n = header.size() - 1;

  std::vector<double> values;
  long long first_t = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " cells, found " +
                                   std::to_string(cells.size()));
    }
    long long t = 0;
    const auto& tc = cells[0];
    const auto res = std::from_chars(tc.data(), tc.data() + tc.size(), t);
    if (tc.empty() || res.ec != std::errc() || res.ptr != tc.data() + tc.size()) {
      throw ParseError(lineno, "t must be an integer");
    }
    if (rows == 0) {
      first_t = t;
    } else if (t != first_t + static_cast<long long>(rows)) {
      throw ParseError(lineno, "t must increase by exactly 1 (expected " +
                                   std::to_string(first_t + static_cast<long long>(rows)) + ")");
    }
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const auto& s = cells[k];
      if (s.empty()) throw ParseError(lineno, "missing value in column '" + header[k] + "'");
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        throw ParseError(lineno, "non-numeric value '" + s + "' in column '" + header[k] + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(lineno, "no data rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = values[r * n + k];
  }
  return m;
}

Matrix ingest_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("io.input", "cannot open " + path.string());
  return ingest_csv(f);
}

std::string config_schema_help() {
  return R"(CONFIG (JSON object):
  command   string, one of: simulate innovations irf pirf maxirf identified-set
            figure1 bss gcov markov-test wn-test
  model     {"family": string, "n": int, "params": {...}}
              gaussian_var1   {"Phi": n x n, "D": n x n}          y = Phi y' + D e
              dar1            {"gamma", "alpha" > 0, "beta" >= 0}  y = gamma y' + sqrt(alpha + beta y'^2) e   (n = 1)
              vector_dar      {"Phi": n x n, "a": n (> 0), "B": n x n (>= 0)}
              threshold_ar1   {"alpha", "sigma" > 0}               y = alpha 1{y' > 0} + sigma e   (n = 1)
              cond_gaussian   {"Phi": n x n, "psi": n, "D0": n x n, "kappa" >= 0}
              euler_diffusion {"K": n x n, "mu": n, "sigma0": n (> 0), "sigma1": n (>= 0), "substeps": int (16)}
            matrices are arrays of rows; a 1 x 1 matrix or length-1 vector may be a bare number
  shock     {"kind": "innovation" | "observable", "vector": n, "horizon": int >= 0}
  mc        {"seed": uint (required unless --seed), "replicates": int >= 2 (10000), "workers": int (1, 0 = all cores)}
  io        {"input": CSV path with header t,<col>,..., "output_dir": path ("nlirf_out")}
  options   command-specific:
    simulate        T (1000), y0 (zeros)
    innovations     T, y0 (used when io.input is absent; input CSV row 1 is y0),
                    order (1-based component order), max_lag (5), permutations (199), level (0.05)
    irf             y_prev (zeros); needs shock.kind = innovation
    pirf            y_t (zeros); needs shock.kind = observable
    maxirf          a (required), horizons ([0..5]); Phi and D when no gaussian_var1 model is given
    identified-set  rotation {"type": "constant", "a"} | {"type": "linear", "c"} | {"type": "random", "n", "c"},
                    draws (100000), points (100), permutations (99), level (0.01)
    figure1         segments (75), samples (200)
    bss             lags ([1..5]); data from io.input (t,y1,y2) or generate {"rho", "sigma", "A", "T"}
    gcov            init [a12, a21, rho1, rho2], powers ([1]), lags ([0..5]), budget (4000); data as for bss
    markov-test     resamples (499), level (0.05); data from io.input or a simulated model path (T = 2000)
    wn-test         max_lag (5), max_power (3), permutations (199), level (0.05);
                    data from io.input or innovations of a simulated model path

Every run writes manifest.json (config hash, seed, versions) next to its artifacts.
Exit status: 0 success, 2 schema or input format error (field path or line reported),
3 numerical error.
)";
}

}  // namespace nlirf
