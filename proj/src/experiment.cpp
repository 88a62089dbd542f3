#include "tihom/experiment.hpp"

#include "tihom/elasticity.hpp"
#include "tihom/errors.hpp"
#include "tihom/field_io.hpp"
#include "tihom/image.hpp"
#include "tihom/pfft.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

namespace tihom {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class Fn>
decltype(auto) in_stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.what());
  }
}

template <class Fn>
decltype(auto) in_section(const char* key, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw ConfigError(std::string("in \"") + key + "\": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("in \"") + key + "\": " + e.what());
  }
}

PatternMatrix matrix_from_json(const nlohmann::json& j) {
  if (j.is_string()) return PatternMatrix::parse(j.get<std::string>());
  if (j.is_array()) return PatternMatrix::parse(j.dump());
  throw ConfigError("pattern matrix must be a nested integer list or its string form");
}

ojson imat_json(const IMat& a) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back(a(i, k));
    rows.push_back(row);
  }
  return rows;
}

template <class V>
ojson vec_json(const V& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

ReferenceSpec reference_from_json(const nlohmann::json& j, const std::filesystem::path& base, int D) {
  ReferenceSpec r;
  if (j.is_null()) return r;
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("reference needs a string field \"kind\"");
  }
  const auto kind = j["kind"].get<std::string>();
  if (kind == "none") return r;
  if (kind == "values") {
    if (!j.contains("path") || !j["path"].is_string()) throw ConfigError("values reference needs a \"path\"");
    r.kind = ReferenceSpec::Kind::Values;
    r.path = resolve(base, j["path"].get<std::string>());
    if (!std::filesystem::exists(r.path)) throw ConfigError("reference file '" + r.path.string() + "' does not exist");
  } else if (kind == "effective_action") {
    r.kind = ReferenceSpec::Kind::EffectiveAction;
    r.effective_action = j.at("values").get<std::vector<double>>();
    if (static_cast<int>(r.effective_action.size()) != D) {
      throw ConfigError("effective action reference needs " + std::to_string(D) + " Mandel components");
    }
  } else if (kind == "laminate") {
    r.kind = ReferenceSpec::Kind::Laminate;
  } else if (kind == "surrogate") {
    r.kind = ReferenceSpec::Kind::Surrogate;
    if (!j.contains("matrix")) throw ConfigError("surrogate reference needs a \"matrix\"");
    r.surrogate_matrix = matrix_from_json(j["matrix"]);
    r.surrogate_tolerance = j.value("tolerance", r.surrogate_tolerance);
    if (!(r.surrogate_tolerance > 0.0)) throw ConfigError("surrogate tolerance must be positive");
  } else {
    throw ConfigError("unknown reference kind '" + kind + "'");
  }
  return r;
}

SweepSpec sweep_from_json(const nlohmann::json& j, int d) {
  if (!j.is_object()) throw ConfigError("\"sweep\" must be an object");
  SweepSpec s;
  s.axes = j.value("axes", std::vector<int>{});
  if (s.axes.empty()) {
    for (int i = 1; i <= d; ++i) s.axes.push_back(i);
  }
  std::set<int> seen;
  for (int a : s.axes) {
    if (a < 1 || a > d) throw ConfigError("sweep axis " + std::to_string(a) + " outside 1.." + std::to_string(d));
    if (!seen.insert(a).second) throw ConfigError("sweep axis " + std::to_string(a) + " repeated");
  }
  if (j.contains("interval")) {
    const auto iv = j["interval"].get<std::vector<double>>();
    if (iv.size() != 2) throw ConfigError("sweep interval must be [lower, upper]");
    s.lower = iv[0];
    s.upper = iv[1];
  }
  if (!(0.0 <= s.lower && s.lower < s.upper && s.upper <= 1.0)) {
    throw ConfigError("sweep interval must satisfy 0 <= lower < upper <= 1");
  }
  s.budget = j.value("budget", s.budget);
  if (s.budget < 2) throw ConfigError("sweep budget must be at least 2");
  s.start = j.value("start", std::vector<double>{});
  if (!s.start.empty() && static_cast<int>(s.start.size()) != d) {
    throw ConfigError("sweep start needs " + std::to_string(d) + " entries");
  }
  for (double a : s.start) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep start entries must lie in [0, 1]");
  }
  return s;
}

OutputSpec output_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  OutputSpec o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw ConfigError("\"output\" must be an object");
  if (j.contains("directory")) o.directory = resolve(base, j["directory"].get<std::string>());
  o.report = j.value("report", o.report);
  o.field = j.value("field", o.field);
  o.image = j.value("image", o.image);
  o.residuals = j.value("residuals", o.residuals);
  o.sweep = j.value("sweep", o.sweep);
  o.sweep_trace = j.value("sweep_trace", o.sweep_trace);
  return o;
}

const char* reference_kind_name(ReferenceSpec::Kind k) {
  switch (k) {
    case ReferenceSpec::Kind::Values:
      return "values";
    case ReferenceSpec::Kind::EffectiveAction:
      return "effective_action";
    case ReferenceSpec::Kind::Laminate:
      return "laminate";
    case ReferenceSpec::Kind::Surrogate:
      return "surrogate";
    default:
      return "none";
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IngestionError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IngestionError("failed writing '" + path.string() + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_artifacts(const ExperimentConfig& cfg, ExperimentResult& res) {
  const auto& out = cfg.output;
  if (out.directory.empty()) return;
  std::filesystem::create_directories(out.directory);
  write_field(out.directory / out.field, cfg.matrix, res.total);
  std::string csv = "iteration,residual\n";
  for (std::size_t i = 0; i < res.solve.residual_history.size(); ++i) {
    csv += std::to_string(i + 1) + "," + fmt(res.solve.residual_history[i]) + "\n";
  }
  write_text(out.directory / out.residuals, csv);
  ojson artifacts;
  artifacts["field"] = out.field;
  artifacts["residuals"] = out.residuals;
  if (res.metrics.e_log) {
    write_ppm(out.directory / out.image, render_smith_grid(cfg.matrix, *res.metrics.e_log));
    artifacts["image"] = out.image;
  }
  // keep timing last
  ojson timing = res.report["timing"];
  res.report.erase("timing");
  res.report["artifacts"] = artifacts;
  res.report["timing"] = timing;
  write_text(out.directory / out.report, res.report.dump(2) + "\n");
}

}  // namespace

MandelVec loading_from_json(const nlohmann::json& j, int d) {
  const int D = mandel_size(d);
  if (j.is_array()) {
    const auto v = j.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != D) {
      throw ConfigError("loading needs " + std::to_string(D) + " Mandel components, got " + std::to_string(v.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), D);
  }
  if (j.is_object() && j.contains("mandel")) return loading_from_json(j["mandel"], d);
  if (j.is_object() && j.contains("tensor")) {
    const auto rows = j["tensor"].get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != d) throw ConfigError("loading tensor must be " + std::to_string(d) + " x " + std::to_string(d));
    RMat e(d, d);
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != d) throw ConfigError("loading tensor must be square");
      for (int k = 0; k < d; ++k) e(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    if ((e - e.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + e.cwiseAbs().maxCoeff())) {
      throw ConfigError("loading tensor must be symmetric");
    }
    return to_mandel(e);
  }
  throw ConfigError("loading must be a Mandel array, {\"mandel\": [...]} or {\"tensor\": [[...]]}");
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig s;
  if (j.is_null()) return s;
  if (!j.is_object()) throw ConfigError("\"solver\" must be an object");
  static const std::set<std::string> keys = {"scheme", "tolerance", "max_iterations", "krylov", "gmres_restart"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown solver option \"" + k + "\"");
  }
  if (j.contains("scheme")) s.scheme = scheme_from_string(j["scheme"].get<std::string>());
  s.tolerance = j.value("tolerance", s.tolerance);
  s.max_iterations = j.value("max_iterations", s.max_iterations);
  if (j.contains("krylov")) {
    const auto k = j["krylov"].get<std::string>();
    if (k == "auto") {
      s.krylov = KrylovMethod::Auto;
    } else if (k == "gmres") {
      s.krylov = KrylovMethod::Gmres;
    } else {
      throw ConfigError("krylov must be \"auto\" or \"gmres\"");
    }
  }
  s.gmres_restart = j.value("gmres_restart", s.gmres_restart);
  s.validate();
  return s;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> keys = {
      "description", "matrix", "generator", "truncation", "microstructure", "sampling", "reference_stiffness",
      "loading", "solver", "reference", "sweep", "output", "elog_printed_form"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown config key \"" + k + "\"");
  }
  for (const char* k : {"matrix", "microstructure", "loading"}) {
    if (!j.contains(k)) throw ConfigError(std::string("config needs \"") + k + "\"");
  }
  PatternMatrix M = in_section("matrix", [&] { return matrix_from_json(j["matrix"]); });
  const int d = M.dim();
  GeneratorSpec gen = j.contains("generator")
                          ? in_section("generator", [&] { return GeneratorSpec::from_json(j["generator"]); })
                          : GeneratorSpec::dirichlet();
  if (gen.kind == GeneratorKind::DlVP && static_cast<int>(gen.alpha.size()) != d) {
    throw ConfigError("in \"generator\": dlvp alpha needs " + std::to_string(d) + " entries");
  }
  std::optional<int> radius;
  if (j.contains("truncation")) {
    radius = in_section("truncation", [&] { return j["truncation"].at("radius").get<int>(); });
    if (*radius < 0) throw ConfigError("truncation radius must be nonnegative");
  }
  Microstructure ms = in_section("microstructure", [&] { return Microstructure::from_json(j["microstructure"]); });
  if (ms.dim() != d) {
    throw ConfigError("microstructure dimension " + std::to_string(ms.dim()) + " differs from the pattern dimension " +
                      std::to_string(d));
  }
  SamplingOptions sampling;
  if (j.contains("sampling")) sampling = in_section("sampling", [&] { return SamplingOptions::from_json(j["sampling"]); });
  std::optional<Phase> ref_phase;
  bool midpoint = false;
  if (j.contains("reference_stiffness")) {
    const auto& rs = j["reference_stiffness"];
    if (rs.is_string()) {
      const auto rule = rs.get<std::string>();
      if (rule == "midpoint") {
        midpoint = true;
      } else if (rule != "mean") {
        throw ConfigError("in \"reference_stiffness\": rule must be \"mean\" or \"midpoint\"");
      }
    } else {
      ref_phase = in_section("reference_stiffness", [&] {
        const Phase p = Phase::from_json(rs);
        (void)p.stiffness(d);
        return p;
      });
    }
  }
  MandelVec eps0 = in_section("loading", [&] { return loading_from_json(j["loading"], d); });
  SolverConfig solver = in_section("solver", [&] { return solver_config_from_json(j.value("solver", nlohmann::json())); });
  ReferenceSpec reference = in_section(
      "reference", [&] { return reference_from_json(j.value("reference", nlohmann::json()), base_dir, mandel_size(d)); });
  if (reference.kind == ReferenceSpec::Kind::Laminate && ms.kind() != "laminate") {
    throw ConfigError("in \"reference\": laminate reference needs a laminate microstructure");
  }
  if (reference.kind == ReferenceSpec::Kind::Surrogate && reference.surrogate_matrix->dim() != d) {
    throw ConfigError("in \"reference\": surrogate matrix dimension differs from the pattern");
  }
  std::optional<SweepSpec> sweep;
  if (j.contains("sweep")) sweep = in_section("sweep", [&] { return sweep_from_json(j["sweep"], d); });
  OutputSpec output = in_section("output", [&] { return output_from_json(j.value("output", nlohmann::json()), base_dir); });
  const bool printed = j.value("elog_printed_form", false);
  return ExperimentConfig{std::move(M),     std::move(gen),      radius,
                          std::move(ms),    sampling,            ref_phase,           midpoint,
                          std::move(eps0),  solver,              std::move(reference),
                          std::move(sweep), std::move(output),   printed ? ElogForm::Printed : ElogForm::Difference};
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

Tensor4 ExperimentConfig::reference_stiffness() const {
  const int d = matrix.dim();
  if (reference_phase) return reference_phase->stiffness(d);
  return midpoint_reference ? midpoint_reference_stiffness(microstructure.phases(), d)
                            : mean_reference_stiffness(microstructure.phases(), d);
}

std::optional<ReferenceSolution> resolve_reference(const ExperimentConfig& cfg) {
  const int d = cfg.matrix.dim();
  const int D = mandel_size(d);
  return in_stage("reference", [&]() -> std::optional<ReferenceSolution> {
    switch (cfg.reference.kind) {
      case ReferenceSpec::Kind::None:
        return std::nullopt;
      case ReferenceSpec::Kind::Values:
        return load_reference_values(cfg.reference.path, &cfg.matrix, D);
      case ReferenceSpec::Kind::EffectiveAction: {
        ReferenceSolution r;
        const auto& v = cfg.reference.effective_action;
        r.effective_action = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        r.provenance = "configured effective action";
        return r;
      }
      case ReferenceSpec::Kind::Laminate: {
        const auto& lam = std::get<LaminateGeometry>(cfg.microstructure.geometry());
        const auto& ph = cfg.microstructure.phases();
        return laminate_reference(lam, ph[0], ph[1], cfg.loading);
      }
      case ReferenceSpec::Kind::Surrogate: {
        const PatternMatrix& Ms = *cfg.reference.surrogate_matrix;
        const Index m = cfg.matrix.size();
        // Lambda(M) must be a sublattice of Lambda(Ms): Ms M^{-1} integral
        for (int i = 0; i < d; ++i) {
          const IVec n = checked::mat_vec(Ms.entries(), cfg.matrix.inverse_numerator(IVec::Unit(d, i)));
          for (int a = 0; a < d; ++a) {
            if (n(a) % m != 0) {
              throw ConfigError("surrogate pattern " + Ms.to_string() + " does not contain the pattern of " +
                                cfg.matrix.to_string());
            }
          }
        }
        ExperimentConfig fine = cfg;
        fine.matrix = Ms;
        fine.generator = GeneratorSpec::dirichlet();
        fine.radius.reset();
        fine.solver.tolerance = cfg.reference.surrogate_tolerance;
        fine.reference = {};
        fine.sweep.reset();
        fine.output.directory.clear();
        const ExperimentResult sol = run_solve(fine, nullptr, false);
        if (!sol.solve.converged) throw StageError("reference", "surrogate solve did not converge");
        const Pattern P = pattern(cfg.matrix);
        StrainField restricted(static_cast<Eigen::Index>(P.size()), D);
        for (std::size_t j = 0; j < P.size(); ++j) {
          IVec k = checked::mat_vec(Ms.entries(), P.numerators[j]);
          for (int a = 0; a < d; ++a) k(a) /= P.denominator;
          restricted.row(static_cast<Eigen::Index>(j)) = sol.total.row(static_cast<Eigen::Index>(Ms.node_index(k)));
        }
        ReferenceSolution r;
        r.sampled = std::move(restricted);
        r.sampled_on = cfg.matrix;
        r.effective_action = sol.solve.effective_action;
        r.provenance = "dirichlet surrogate on " + Ms.to_string() + ", " + std::to_string(sol.solve.iterations) +
                       " iterations, residual " + fmt(sol.solve.residual);
        return r;
      }
    }
    return std::nullopt;
  });
}

ExperimentResult run_solve(const ExperimentConfig& cfg, const ReferenceSolution* reference, bool write) {
  const auto t0 = Clock::now();
  const PatternMatrix& M = cfg.matrix;
  const Tensor4 C0 = cfg.reference_stiffness();

  const CoefficientRule rule = in_stage("generator", [&] { return orthonormalize(make_rule(M, cfg.generator)); });
  const GreenTable table = in_stage("green", [&] { return periodized_green(C0, rule, cfg.radius); });
  const StiffnessField C = in_stage("sampling", [&] { return sample_stiffness(cfg.microstructure, M, cfg.sampling); });

  ExperimentResult res;
  const auto t_solve = Clock::now();
  res.solve = in_stage("solve", [&] { return solve(C, C0, cfg.loading, table, cfg.solver); });
  const double solve_seconds = seconds_since(t_solve);
  res.total = total_strain(res.solve.strain, cfg.loading);
  res.radius = table.radius;
  res.truncation_error = table.truncation_error;

  in_stage("metrics", [&] {
    if (!reference) return;
    std::optional<StrainField> ref_total;
    if (reference->has_strain()) ref_total = reference->strain_on(M);
    const MandelVec* ref_action = reference->effective_action ? &*reference->effective_action : nullptr;
    res.metrics = error_metrics(res.total, ref_total ? &*ref_total : nullptr, res.solve.effective_action, ref_action,
                                cfg.elog_form);
  });

  ojson& r = res.report;
  r["matrix"] = imat_json(M.entries());
  r["m"] = M.size();
  r["smith_factors"] = vec_json(M.factors());
  r["generator"] = ojson::parse(cfg.generator.to_json().dump());
  r["truncation"] = {{"radius", table.radius}, {"error", table.truncation_error}};
  r["microstructure"] = cfg.microstructure.kind();
  r["sampling"] = {{"mode", cfg.sampling.mode == SamplingMode::Node ? "node" : "cell_average"},
                   {"subsamples", cfg.sampling.subsamples}};
  {
    ojson c0 = ojson::array();
    for (Eigen::Index i = 0; i < C0.rows(); ++i) c0.push_back(vec_json(C0.row(i).transpose().eval()));
    r["reference_stiffness"] = c0;
  }
  r["loading"] = vec_json(cfg.loading);
  r["solver"] = {{"scheme", to_string(cfg.solver.scheme)},
                 {"tolerance", cfg.solver.tolerance},
                 {"max_iterations", cfg.solver.max_iterations},
                 {"method", res.solve.method}};
  r["converged"] = res.solve.converged;
  r["iterations"] = res.solve.iterations;
  r["residual"] = res.solve.residual;
  r["imag_norm"] = res.solve.imag_norm;
  r["fluctuation_rms"] = field_norm(res.solve.strain) / std::sqrt(static_cast<double>(M.size()));
  r["effective_action"] = vec_json(res.solve.effective_action);
  if (reference) {
    ojson ref;
    ref["kind"] = reference_kind_name(cfg.reference.kind);
    ref["provenance"] = reference->provenance;
    r["reference"] = ref;
    ojson met = ojson::object();
    if (res.metrics.e_eff) met["e_eff"] = *res.metrics.e_eff;
    if (res.metrics.e_l2) met["e_l2"] = *res.metrics.e_l2;
    if (res.metrics.e_log) {
      const auto& e = *res.metrics.e_log;
      met["e_log_max"] = *std::max_element(e.begin(), e.end());
      met["e_log_mean"] = pairwise_sum(e.data(), e.size()) / static_cast<double>(e.size());
      met["e_log_form"] = cfg.elog_form == ElogForm::Difference ? "difference" : "printed";
    }
    r["metrics"] = met;
  }
  r["timing"] = {{"solve_seconds", solve_seconds}, {"total_seconds", seconds_since(t0)}};

  if (write) in_stage("output", [&] { write_artifacts(cfg, res); });
  return res;
}

ExperimentResult run_solve(const ExperimentConfig& cfg) {
  const auto ref = resolve_reference(cfg);
  return run_solve(cfg, ref ? &*ref : nullptr, true);
}

GoldenSectionResult golden_section(const std::function<double(double)>& f, double a, double b, int budget,
                                   double flat_tolerance) {
  if (!(a < b)) throw ConfigError("golden section needs a < b");
  if (budget < 2) throw ConfigError("golden section needs at least two evaluations");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  GoldenSectionResult out;
  const auto eval = [&](double x) {
    const double v = f(x);
    out.trace.emplace_back(x, v);
    return v;
  };
  const double lo = a, hi = b;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int n = 2; n < budget; ++n) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = eval(x2);
    }
  }
  // the minimiser lies in [a, x2] or [x1, b]
  out.argmin = f1 <= f2 ? 0.5 * (a + x2) : 0.5 * (x1 + b);
  double fmin = out.trace.front().second, fmax = fmin, scale = 0.0;
  out.best_x = out.trace.front().first;
  out.best_f = fmin;
  for (const auto& [x, v] : out.trace) {
    if (v < out.best_f) out.best_x = x, out.best_f = v;
    fmin = std::min(fmin, v);
    fmax = std::max(fmax, v);
    scale = std::max(scale, std::abs(v));
  }
  if (fmax - fmin <= flat_tolerance * std::max(1.0, scale)) {
    out.flat = true;
    out.argmin = out.best_x = 0.5 * (lo + hi);
  }
  return out;
}

SweepResult sweep_alpha(const ExperimentConfig& cfg, bool write) {
  const auto t0 = Clock::now();
  if (!cfg.sweep) throw ConfigError("sweep-alpha needs a \"sweep\" block");
  if (cfg.reference.kind == ReferenceSpec::Kind::None) {
    throw ConfigError("sweep-alpha needs a reference with an effective action");
  }
  const auto ref = resolve_reference(cfg);
  if (!ref || !ref->effective_action) throw ConfigError("sweep-alpha needs a reference with an effective action");
  const SweepSpec& sw = *cfg.sweep;
  const int d = cfg.matrix.dim();

  SweepResult out;
  ExperimentConfig base = cfg;
  base.generator = GeneratorSpec::dirichlet();
  const ExperimentResult baseline = run_solve(base, &*ref, false);
  out.baseline_e_eff = *baseline.metrics.e_eff;
  out.trace.push_back({{}, 0, out.baseline_e_eff, baseline.solve.iterations, baseline.solve.converged});

  std::map<std::vector<double>, ExperimentResult> cache;
  const auto evaluate = [&](const std::vector<double>& alpha, int axis) -> const ExperimentResult& {
    auto it = cache.find(alpha);
    if (it == cache.end()) {
      ExperimentConfig c = cfg;
      c.generator = GeneratorSpec::dlvp(alpha);
      it = cache.emplace(alpha, run_solve(c, &*ref, false)).first;
    }
    const auto& res = it->second;
    out.trace.push_back({alpha, axis, *res.metrics.e_eff, res.solve.iterations, res.solve.converged});
    return res;
  };

  std::vector<double> alpha = sw.start.empty() ? std::vector<double>(static_cast<std::size_t>(d), 0.0) : sw.start;
  ojson flat_axes = ojson::array();
  for (int axis : sw.axes) {
    const auto gs = golden_section(
        [&](double t) {
          auto a = alpha;
          a[static_cast<std::size_t>(axis - 1)] = t;
          return *evaluate(a, axis).metrics.e_eff;
        },
        sw.lower, sw.upper, sw.budget);
    alpha[static_cast<std::size_t>(axis - 1)] = gs.best_x;
    if (gs.flat) flat_axes.push_back(axis);
  }
  // a flat axis moves alpha to an unevaluated midpoint
  const ExperimentResult& best = cache.count(alpha) ? cache.at(alpha) : evaluate(alpha, 0);
  out.best_alpha = alpha;
  out.best_e_eff = *best.metrics.e_eff;
  out.best = best;
  out.improved = out.best_e_eff < out.baseline_e_eff - 1e-12 * std::max(1.0, out.baseline_e_eff);
  out.reduction = out.baseline_e_eff > 0.0 ? 1.0 - out.best_e_eff / out.baseline_e_eff : 0.0;

  ojson& r = out.report;
  r["matrix"] = imat_json(cfg.matrix.entries());
  r["axes"] = sw.axes;
  r["interval"] = {sw.lower, sw.upper};
  r["budget"] = sw.budget;
  r["reference"] = {{"kind", reference_kind_name(cfg.reference.kind)}, {"provenance", ref->provenance}};
  r["baseline"] = {{"generator", "dirichlet"},
                   {"e_eff", out.baseline_e_eff},
                   {"iterations", baseline.solve.iterations},
                   {"converged", baseline.solve.converged}};
  r["best"] = {{"alpha", out.best_alpha},
               {"e_eff", out.best_e_eff},
               {"iterations", best.solve.iterations},
               {"converged", best.solve.converged}};
  r["reduction"] = out.reduction;
  r["improved"] = out.improved;
  r["flat_axes"] = flat_axes;
  ojson evals = ojson::array();
  for (const auto& e : out.trace) {
    ojson row;
    row["axis"] = e.axis;
    row["alpha"] = e.alpha;
    row["e_eff"] = e.e_eff;
    row["iterations"] = e.iterations;
    row["converged"] = e.converged;
    evals.push_back(row);
  }
  r["evaluations"] = evals;
  r["timing"] = {{"total_seconds", seconds_since(t0)}};

  if (write && !cfg.output.directory.empty()) {
    in_stage("output", [&] {
      ExperimentConfig c = cfg;
      c.generator = GeneratorSpec::dlvp(out.best_alpha);
      write_artifacts(c, out.best);
      std::string csv = "index,axis";
      for (int i = 1; i <= d; ++i) csv += ",alpha_" + std::to_string(i);
      csv += ",e_eff,iterations,converged\n";
      for (std::size_t i = 0; i < out.trace.size(); ++i) {
        const auto& e = out.trace[i];
        csv += std::to_string(i) + "," + std::to_string(e.axis);
        for (int a = 0; a < d; ++a) {
          csv += "," + (e.alpha.empty() ? std::string() : fmt(e.alpha[static_cast<std::size_t>(a)]));
        }
        csv += "," + fmt(e.e_eff) + "," + std::to_string(e.iterations) + "," + (e.converged ? "1" : "0") + "\n";
      }
      write_text(cfg.output.directory / cfg.output.sweep_trace, csv);
      ojson timing = r["timing"];
      r.erase("timing");
      r["artifacts"] = {{"trace", cfg.output.sweep_trace}, {"best_report", cfg.output.report}};
      r["timing"] = timing;
      write_text(cfg.output.directory / cfg.output.sweep, r.dump(2) + "\n");
    });
  }
  return out;
}

nlohmann::ordered_json pattern_info(const PatternMatrix& M) {
  const int d = M.dim();
  ojson r;
  r["matrix"] = imat_json(M.entries());
  r["det"] = M.det();
  r["m"] = M.size();
  const auto& snf = M.smith();
  r["smith"] = {{"factors", vec_json(M.factors())},
                {"U", imat_json(snf.U)},
                {"D", imat_json(snf.D)},
                {"V", imat_json(snf.V)}};
  const auto extent = [d](const auto& points, auto cast) {
    using T = decltype(cast(points.front()(0)));
    std::vector<T> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) lo[a] = hi[a] = cast(points.front()(a));
    for (const auto& p : points) {
      for (int a = 0; a < d; ++a) {
        lo[a] = std::min(lo[a], cast(p(a)));
        hi[a] = std::max(hi[a], cast(p(a)));
      }
    }
    return ojson{{"min", lo}, {"max", hi}};
  };
  const Pattern P = pattern(M);
  const double den = static_cast<double>(P.denominator);
  r["pattern_extent"] = extent(P.numerators, [den](Index v) { return static_cast<double>(v) / den; });
  const auto id = [](Index v) { return v; };
  r["generating_set_extent"] = extent(generating_set(M).freqs, id);
  r["frequency_set_extent"] = extent(frequency_set(M).freqs, id);
  r["fft"] = PatternFft(M).describe();
  return r;
}

}  // namespace tihom
