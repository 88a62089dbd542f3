#pragma once

// Microstructures on the torus [-pi, pi)^d, stiffness sampling on the
// pattern and reference solutions.

#include "tihom/elasticity.hpp"
#include "tihom/lattice.hpp"
#include "tihom/solver.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tihom {

/// Isotropic phase with Lame parameters.
struct Phase {
  double lambda = 0.0;
  double mu = 0.0;

  Tensor4 stiffness(int d) const { return iso_stiffness(lambda, mu, d); }

  static Phase from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Layers normal to an integer direction n: phase 0 where frac(n^T x / 2 pi)
/// lies in [0, fraction), phase 1 elsewhere.
struct LaminateGeometry {
  IVec normal;
  double fraction = 0.5;
};

/// Confocal core and coating ellipses (2-D): phase 0 core, 1 coating,
/// 2 matrix.  Boundaries belong to the inner region.
struct HashinGeometry {
  RVec center;
  double rotation = 0.0;
  double core_a = 0.0, core_b = 0.0;
  double coat_a = 0.0, coat_b = 0.0;
};

/// Ball or axis-aligned box: phase 0 inside (closed), 1 outside.
struct InclusionGeometry {
  enum class Shape { Ball, Box };
  Shape shape = Shape::Ball;
  RVec center;
  RVec half_widths;  // ball: radius repeated
};

/// Regular grid of phase ids over the cell, axis 0 slowest.
struct VoxelGeometry {
  std::vector<int> shape;
  std::vector<int> ids;
};

class Microstructure {
 public:
  using Geometry = std::variant<LaminateGeometry, HashinGeometry, InclusionGeometry, VoxelGeometry>;

  Microstructure(int dim, Geometry geometry, std::vector<Phase> phases);

  static Microstructure laminate(IVec normal, double fraction, Phase a, Phase b);
  static Microstructure hashin(RVec center, double rotation, double core_a, double core_b, double coat_a,
                               double coat_b, Phase core, Phase coating, Phase matrix);
  static Microstructure inclusion(InclusionGeometry::Shape shape, RVec center, RVec half_widths, Phase inside,
                                  Phase outside);
  static Microstructure voxels(std::vector<int> shape, std::vector<int> ids, std::vector<Phase> phases);
  static Microstructure homogeneous(int dim, Phase phase);

  static Microstructure from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int dim() const { return dim_; }
  const Geometry& geometry() const { return geometry_; }
  const std::vector<Phase>& phases() const { return phases_; }
  std::string kind() const;

  /// Phase id at a point of R^d, wrapped onto [-pi, pi)^d.
  int phase_at(const RVec& x) const;

 private:
  void validate() const;

  int dim_;
  Geometry geometry_;
  std::vector<Phase> phases_;
};

/// Maps x onto [-pi, pi)^d.
RVec wrap_to_cell(const RVec& x);

enum class SamplingMode { Node, CellAverage };

struct SamplingOptions {
  SamplingMode mode = SamplingMode::Node;
  int subsamples = 4;  // per axis, cell-average mode

  static SamplingOptions from_json(const nlohmann::json& j);
};

/// Phase id at every node x = 2 pi y, y in P(M).
std::vector<int> sample_phases(const Microstructure& ms, const PatternMatrix& M);

/// C(y) at every node, or its average over the cell y + M^{-1}[-1/2, 1/2)^d
/// on a subsamples^d grid.
StiffnessField sample_stiffness(const Microstructure& ms, const PatternMatrix& M, const SamplingOptions& opts = {});

/// Isotropic reference stiffness from the arithmetic mean of the phase Lame parameters.
Tensor4 mean_reference_stiffness(const std::vector<Phase>& phases, int d);
/// Isotropic reference stiffness halfway between the smallest and largest
/// phase Lame parameters; keeps the fixed-point map contractive for any
/// number of isotropic phases.
Tensor4 midpoint_reference_stiffness(const std::vector<Phase>& phases, int d);

struct ReferenceSolution {
  /// Total strain at a point of the torus.
  std::function<MandelVec(const RVec&)> strain_at;
  /// Total strain sampled on a pattern, with its pattern matrix.
  std::optional<StrainField> sampled;
  std::optional<PatternMatrix> sampled_on;
  std::optional<MandelVec> effective_action;
  std::string provenance;

  bool has_strain() const { return static_cast<bool>(strain_at) || sampled.has_value(); }
  /// Total strain on the pattern of M, from the sampled field or the evaluator.
  std::optional<StrainField> strain_on(const PatternMatrix& M) const;
};

/// Exact two-phase laminate with layers normal to coordinate axis `axis`
/// (0-based) and phase `a` occupying `fraction` of the cell: strains are
/// constant per layer, traction and tangential strain are continuous across
/// the interfaces and the mean strain is eps0.
struct LaminateSolution {
  MandelVec strain_a;
  MandelVec strain_b;
  MandelVec effective_action;
};

LaminateSolution laminate_solution(int d, int axis, double fraction, const Phase& a, const Phase& b,
                                   const MandelVec& eps0);
ReferenceSolution laminate_reference(const LaminateGeometry& geometry, const Phase& a, const Phase& b,
                                     const MandelVec& eps0);

/// Reads a PFLD strain field, a JSON effective-action vector, or a JSON
/// manifest {"effective_action": [...], "strain_field": "file.pfld",
/// "provenance": "..."}.  A sampled field must match `expected` when given.
ReferenceSolution load_reference_values(const std::filesystem::path& path, const PatternMatrix* expected = nullptr,
                                        int components = 0);

}  // namespace tihom
