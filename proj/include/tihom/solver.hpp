#pragma once

// Discrete Lippmann-Schwinger (LS) and variational (VE) cell problems on
// V_M^f, a dense reference solver, effective stiffness and error metrics.

#include "tihom/elasticity.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace tihom {

/// C(y) for every node of the pattern, in pattern order.
using StiffnessField = std::vector<Tensor4>;

/// Fluctuation or total strain: row y is the Mandel vector at node y (space
/// domain) or the coefficient at frequency h (frequency domain).
///
/// Fields are complex.  For generators whose coefficients are not even
/// under h -> -h mod M^T (the half-open Dirichlet cell on even Smith
/// factors) the discrete solution carries a small imaginary part, which is
/// reported rather than discarded.
using StrainField = Eigen::MatrixXcd;

enum class Scheme { LsFixedPoint, VeKrylov };
enum class KrylovMethod { Auto, Gmres };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  Scheme scheme = Scheme::LsFixedPoint;
  /// Auto: conjugate gradients with restarted GMRES on breakdown.
  KrylovMethod krylov = KrylovMethod::Auto;
  int gmres_restart = 60;

  void validate() const;
};

struct SolveReport {
  StrainField strain;  // fluctuation E, space domain
  int iterations = 0;
  std::vector<double> residual_history;
  double residual = 0.0;
  bool converged = false;
  std::string method;
  MandelVec effective_action;  // C^eff : eps0
  double imag_norm = 0.0;      // ||Im E||
  double wall_seconds = 0.0;
};

/// Applies the periodised Green operator to a space-domain field in place:
/// transform each component, multiply by G^p_h, transform back.
class GreenOperator {
 public:
  explicit GreenOperator(const GreenTable& table);

  const GreenTable& table() const { return *table_; }
  std::size_t nodes() const { return fft_.size(); }
  int components() const { return static_cast<int>(table_->reference.rows()); }

  void apply(StrainField& field) const;
  /// Per-frequency multiplication by the given table on a frequency-domain field.
  static void multiply(const std::vector<Tensor4>& coeffs, StrainField& field_hat);

  void forward(StrainField& field) const;
  void inverse(StrainField& field) const;

 private:
  const GreenTable* table_;
  PatternFft fft_;
};

/// Solves E + G^p((C - C0) : (E + eps0)) = 0 by the Neumann series
/// E <- -G^p((C - C0) : (E + eps0)) from E = 0.  The residual of an iterate
/// is measured relative to the constant field eps0, ||r|| / (sqrt(m) ||eps0||),
/// and the returned field is the iterate whose residual was certified.
SolveReport ls_fixed_point(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G,
                           const SolverConfig& cfg = {});

/// Solves C0 G^p C : (E + eps0) = 0 for E in the range of G^p.
///
/// With S_h the positive square root of G^p_h the problem becomes the
/// Hermitian positive definite system S C S w = -S C eps0 on the range of
/// S, and E = S w.  The reported residual is
/// ||C0 G^p C : (E + eps0)|| / ||C0 G^p C : eps0||.
SolveReport ve_krylov(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G,
                      const SolverConfig& cfg = {});

SolveReport solve(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G,
                  const SolverConfig& cfg);

/// Assembles the (m D) x (m D) matrix of E -> E + G^p((C - C0) : E) column
/// by column and solves the LS system directly.  Requires m D <= 2048.
StrainField dense_oracle(const StiffnessField& C, const Tensor4& C0, const MandelVec& eps0, const GreenTable& G);

/// (1/m) sum_y C(y) : (E_y + eps0), real part.
MandelVec effective_stiffness(const StiffnessField& C, const StrainField& E, const MandelVec& eps0);

/// E + eps0 in every row.
StrainField total_strain(const StrainField& E, const MandelVec& eps0);

/// Relative l2 gap ||a - b|| / ||b||.
double relative_gap(const StrainField& a, const StrainField& b);

enum class ElogForm { Difference, Printed };

struct ErrorMetrics {
  std::optional<double> e_l2;
  std::optional<double> e_eff;
  /// log(1 + |eps - eps_ref|) per node (or |eps + eps_ref| in the printed form).
  std::optional<std::vector<double>> e_log;
};

/// Errors of a total strain field and effective action against whichever
/// references are given (null pointers mark absent references).
ErrorMetrics error_metrics(const StrainField& total, const StrainField* reference_total,
                           const MandelVec& action, const MandelVec* reference_action,
                           ElogForm form = ElogForm::Difference);

/// Deterministic pairwise sum.
double pairwise_sum(const double* values, std::size_t n);

/// Frobenius norm with a fixed reduction order.
double field_norm(const StrainField& field);

}  // namespace tihom
