#pragma once

// Generators f of the translation invariant spaces V_M^f, described by
// their Fourier coefficient rules c_k(f), together with bracket sums,
// orthonormalisation and the fundamental interpolant.

#include "tihom/lattice.hpp"
#include "tihom/pfft.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tihom {

enum class GeneratorKind { Dirichlet, DlVP, BSpline };

std::string to_string(GeneratorKind kind);

/// {"kind":"dirichlet"} | {"kind":"dlvp","alpha":[...]} | {"kind":"bspline","order":p}
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Dirichlet;
  std::vector<double> alpha;  // de la Vallee Poussin slopes, one per dimension
  int order = 1;              // B-spline order

  static GeneratorSpec dirichlet() { return {}; }
  static GeneratorSpec dlvp(std::vector<double> alpha) {
    return {GeneratorKind::DlVP, std::move(alpha), 1};
  }
  static GeneratorSpec bspline(int order) { return {GeneratorKind::BSpline, {}, order}; }

  static GeneratorSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Fourier coefficients c_k(f), k in Z^d, of a real even generator.
///
/// All coefficients are functions of xi = M^{-T} k, so each coefficient is
/// real.  A rule carries an optional per-class scale s_h (h the class of k
/// mod M^T Z^d) set by orthonormalize().
class CoefficientRule {
 public:
  /// Largest supported B-spline order.
  static constexpr int kMaxOrder = 10;

  CoefficientRule(PatternMatrix M, GeneratorSpec spec);

  const PatternMatrix& lattice() const { return M_; }
  const GeneratorSpec& spec() const { return spec_; }
  bool orthonormal() const { return orthonormal_; }

  /// c_k(f) including the class scale.
  double operator()(const IVec& k) const;
  /// c_k(f) before any class scaling.
  double raw(const IVec& k) const;
  /// Scale applied to the class of frequency index l.
  double class_scale(std::size_t l) const { return scale_.empty() ? 1.0 : scale_[l]; }

  /// Radius Z such that c_{h + M^T z} = 0 for |z|_inf > Z and h in G(M^T);
  /// empty for generators with infinite frequency support.
  std::optional<int> support_radius() const;

  /// m [|c|^2]^M_h for every frequency index, from closed forms.
  std::vector<double> squared_bracket() const;
  /// [c]^M_h for every frequency index, from closed forms.
  std::vector<double> bracket() const;

  /// Upper bound on the relative mass of m |c_k|^2 outside |z|_inf <= Z.
  double tail_bound(int radius) const;
  /// Smallest radius whose tail bound is below tol, limited so that the
  /// box {-Z..Z}^d has at most max_terms points.
  int default_radius(double tol = 1e-12, long max_terms = 4096) const;

 private:
  friend CoefficientRule orthonormalize(const CoefficientRule& rule);

  double profile(double xi, std::size_t axis) const;
  double periodised_profile(double xi, std::size_t axis, int power) const;

  PatternMatrix M_;
  GeneratorSpec spec_;
  double inv_sqrt_m_ = 1.0;
  std::vector<double> scale_;
  bool orthonormal_ = false;
  // integer samples of the centred B-splines of order p and 2p
  std::vector<double> bspline_p_;
  std::vector<double> bspline_2p_;
};

CoefficientRule dirichlet_rule(const PatternMatrix& M);
CoefficientRule dlvp_rule(const PatternMatrix& M, const std::vector<double>& alpha);
CoefficientRule bspline_rule(const PatternMatrix& M, int order);
CoefficientRule make_rule(const PatternMatrix& M, const GeneratorSpec& spec);

/// [a]^M_h = sum_{|z|_inf <= Z} a_{h + M^T z}.
cplx bracket_sum(const std::function<cplx(const IVec&)>& a, const PatternMatrix& M, const IVec& h,
                 int radius);

struct BracketTable {
  std::vector<double> values;  // m [|c|^2]^M_h in frequency order
  int radius = 0;
  double truncation_error = 0.0;
};

/// Truncated m [|c|^2]^M_h table; exact for finitely supported rules.
BracketTable squared_bracket_table(const CoefficientRule& rule, int radius);

/// Rescales each class so that m [|c|^2]^M_h = 1 for all h.
CoefficientRule orthonormalize(const CoefficientRule& rule);

/// Coefficients \hat a_h of the fundamental interpolant, \hat a_h [c]^M_h = 1/m.
FrequencySamples fundamental_interpolant(const CoefficientRule& rule);

/// g(x) = sum_h sum_{|z|_inf <= Z} \hat a_h c_{h+M^T z} exp(i (h+M^T z)^T x).
cplx synthesize(const CoefficientRule& rule, std::span<const cplx> coeffs, const RVec& x, int radius);

/// The nodal values g(2 pi y) of the expansion with coefficients \hat a,
/// computed through the inverse pattern transform.
PatternSamples nodal_values(const CoefficientRule& rule, std::span<const cplx> coeffs);

}  // namespace tihom
