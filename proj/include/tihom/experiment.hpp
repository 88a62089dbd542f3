#pragma once

// Experiment driver: JSON configuration, solve orchestration with metrics
// and artifacts, the alpha sweep and pattern summaries.

#include "tihom/errors.hpp"
#include "tihom/geometry.hpp"
#include "tihom/solver.hpp"
#include "tihom/translates.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tihom {

/// Error raised inside a named pipeline stage; the message carries the
/// stage name and the original description.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ReferenceSpec {
  enum class Kind { None, Values, EffectiveAction, Laminate, Surrogate };
  Kind kind = Kind::None;
  std::filesystem::path path;          // values
  std::vector<double> effective_action;  // effective_action
  std::optional<PatternMatrix> surrogate_matrix;
  double surrogate_tolerance = 1e-10;
};

struct SweepSpec {
  std::vector<int> axes;  // 1-based
  double lower = 0.0;
  double upper = 1.0;
  int budget = 16;  // evaluations per axis
  std::vector<double> start;  // initial alpha, zeros when empty
};

struct OutputSpec {
  std::filesystem::path directory;  // empty: no artifacts
  std::string report = "report.json";
  std::string field = "strain.pfld";
  std::string image = "elog.ppm";
  std::string residuals = "residuals.csv";
  std::string sweep = "sweep.json";
  std::string sweep_trace = "sweep_trace.csv";
};

struct ExperimentConfig {
  PatternMatrix matrix;
  GeneratorSpec generator;
  std::optional<int> radius;
  Microstructure microstructure;
  SamplingOptions sampling;
  /// Explicit reference phase; otherwise "mean" (default) or "midpoint" of
  /// the phase Lame parameters.
  std::optional<Phase> reference_phase;
  bool midpoint_reference = false;
  MandelVec loading;
  SolverConfig solver;
  ReferenceSpec reference;
  std::optional<SweepSpec> sweep;
  OutputSpec output;
  ElogForm elog_form = ElogForm::Difference;

  /// Relative paths are resolved against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig from_file(const std::filesystem::path& path);

  Tensor4 reference_stiffness() const;
};

struct ExperimentResult {
  SolveReport solve;
  StrainField total;  // E + eps0
  ErrorMetrics metrics;
  int radius = 0;
  double truncation_error = 0.0;
  /// Deterministic report; wall times live under "timing" only.
  nlohmann::ordered_json report;
};

/// Builds the reference named in the config; surrogate references run a
/// Dirichlet solve on the finer pattern and restrict it to the config's
/// pattern, which must be a sublattice.
std::optional<ReferenceSolution> resolve_reference(const ExperimentConfig& cfg);

/// Runs one solve against an already resolved reference (may be null).
ExperimentResult run_solve(const ExperimentConfig& cfg, const ReferenceSolution* reference,
                           bool write_artifacts = true);
/// Resolves the reference and runs one solve.
ExperimentResult run_solve(const ExperimentConfig& cfg);

struct GoldenSectionResult {
  double argmin = 0.0;  // midpoint of the final bracket (interval midpoint when flat)
  double best_x = 0.0;  // best evaluated point (interval midpoint when flat)
  double best_f = 0.0;
  bool flat = false;    // all evaluations agree to flat_tolerance
  std::vector<std::pair<double, double>> trace;
};

/// Golden-section search for a minimum of f on [a, b] with exactly
/// `budget` evaluations; the final bracket has length (b - a) / phi^(budget-1).
GoldenSectionResult golden_section(const std::function<double(double)>& f, double a, double b, int budget,
                                   double flat_tolerance = 1e-12);

struct SweepEvaluation {
  std::vector<double> alpha;  // empty for the Dirichlet baseline
  int axis = 0;               // 1-based swept axis, 0 for the baseline
  double e_eff = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SweepResult {
  std::vector<double> best_alpha;
  double best_e_eff = 0.0;
  double baseline_e_eff = 0.0;
  double reduction = 0.0;  // 1 - best / baseline
  bool improved = false;
  std::vector<SweepEvaluation> trace;
  ExperimentResult best;
  nlohmann::ordered_json report;
};

/// Coordinate descent over the configured axes, one golden-section pass per
/// axis minimising e_eff of the de la Vallee Poussin generator.  Throws
/// ConfigError without a sweep block or an effective-action reference.
SweepResult sweep_alpha(const ExperimentConfig& cfg, bool write_artifacts = true);

/// m, Smith form, pattern and generating-set extents and FFT plan.
nlohmann::ordered_json pattern_info(const PatternMatrix& M);

/// Mandel loading from [..] (Mandel components) or {"tensor": [[..]]}.
MandelVec loading_from_json(const nlohmann::json& j, int d);
SolverConfig solver_config_from_json(const nlohmann::json& j);

}  // namespace tihom
