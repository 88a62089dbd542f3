#pragma once

// Integer pattern matrices, congruence arithmetic and Smith-ordered index
// sets of the lattice M^{-1} Z^d.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tihom {

using Index = std::int64_t;

/// Integer vector of length d <= 3 (no heap allocation).
using IVec = Eigen::Matrix<Index, Eigen::Dynamic, 1, 0, 3, 1>;
/// Integer d x d matrix, d <= 3.
using IMat = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
/// Real vector of length d <= 3.
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

namespace checked {
Index add(Index a, Index b);
Index mul(Index a, Index b);
/// Floor division, b != 0.
Index floor_div(Index a, Index b);
/// Reduces n/q (q > 0) into [-1/2, 1/2) by subtracting a multiple of q.
Index sym_mod(Index n, Index q);
/// Reduces n into {0, ..., q-1}.
Index pos_mod(Index n, Index q);
IVec mat_vec(const IMat& a, const IVec& x);
IMat mat_mat(const IMat& a, const IMat& b);
Index det(const IMat& a);
}  // namespace checked

/// U * M * V = D with U, V unimodular and D = diag(d_1 | d_2 | ... | d_d).
struct SmithDecomposition {
  IMat U;
  IMat D;
  IMat V;

  IVec factors() const { return D.diagonal(); }
};

/// Smith normal form by pivoted integer elimination (minimal-|a| pivots).
SmithDecomposition smith_normal_form(const IMat& M);

/// A regular integer d x d matrix together with its cached Smith form.
///
/// Everything indexed by the pattern P(M) or by the frequency set G(M^T)
/// uses the Smith ordering: linear index of (j_1, ..., j_d), j_i < d_i,
/// row-major with j_1 slowest.  Node j is the point V D^{-1} j mod 1 and
/// frequency l is the class of V^{-T} l mod M^T Z^d, so that
/// h_l^T y_j = sum_i l_i j_i / d_i mod 1.
class PatternMatrix {
 public:
  explicit PatternMatrix(IMat entries);

  /// Parses the row-major nested list form "[[128,272],[0,128]]".
  static PatternMatrix parse(std::string_view text);
  static PatternMatrix diagonal(const std::vector<Index>& diag);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const IMat& entries() const { return entries_; }
  Index det() const { return det_; }
  /// m = |det M|.
  Index size() const { return m_; }
  const SmithDecomposition& smith() const { return snf_; }
  const IVec& factors() const { return factors_; }

  PatternMatrix transpose() const { return PatternMatrix(entries_.transpose()); }

  /// Numerator n with M^{-1} k = n / m exactly.
  IVec inverse_numerator(const IVec& k) const;
  /// Numerator n with M^{-T} k = n / m exactly.
  IVec inverse_transpose_numerator(const IVec& k) const;

  /// Position of the node y = M^{-1} k (mod 1) in the pattern ordering.
  std::size_t node_index(const IVec& k) const;
  /// Position of the class of h mod M^T Z^d in the frequency ordering.
  std::size_t frequency_index(const IVec& h) const;

  /// Element k = M y_j of G(M) for node j.
  IVec node_generator(std::size_t j) const;
  /// Numerator of the pattern point y_j = n / m in [-1/2, 1/2)^d.
  IVec node_numerator(std::size_t j) const;
  /// Element h_l of G(M^T).
  IVec frequency(std::size_t l) const;

  IVec smith_coords(std::size_t linear) const;
  std::size_t smith_linear(const IVec& coords) const;

  std::string to_string() const;

  bool operator==(const PatternMatrix& other) const {
    return entries_ == other.entries_;
  }

 private:
  IMat entries_;
  IMat adjugate_;  // sign-adjusted so that M^{-1} = adjugate_ / m
  Index det_ = 0;
  Index m_ = 0;
  SmithDecomposition snf_;
  IVec factors_;
};

/// The pattern P(M) = Lambda(M) cap [-1/2, 1/2)^d in Smith order.
struct Pattern {
  Index denominator = 1;
  std::vector<IVec> numerators;

  std::size_t size() const { return numerators.size(); }
  RVec point(std::size_t j) const {
    return numerators[j].cast<double>() / static_cast<double>(denominator);
  }
};

/// G(M) = M P(M), in the same order as the pattern.
struct GeneratingSet {
  std::vector<IVec> freqs;
  std::size_t size() const { return freqs.size(); }
};

Pattern pattern(const PatternMatrix& M);
GeneratingSet generating_set(const PatternMatrix& M);
/// G(M^T) in the frequency ordering shared with the pattern FFT.
GeneratingSet frequency_set(const PatternMatrix& M);

/// Unique h in G(M) with k - h in M Z^d.
IVec canonical_residue(const IVec& k, const PatternMatrix& M);

}  // namespace tihom
