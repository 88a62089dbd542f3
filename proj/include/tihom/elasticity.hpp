#pragma once

// Small-strain tensor algebra in Mandel notation, the Green operator of a
// homogeneous reference medium and its periodisation onto V_M^f.

#include "tihom/lattice.hpp"
#include "tihom/pfft.hpp"
#include "tihom/translates.hpp"

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

namespace tihom {

/// Mandel vector of a symmetric second-order tensor,
/// (e11, e22[, e33], sqrt2 e12[, sqrt2 e13, sqrt2 e23]).
using MandelVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using CMandelVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 6, 1>;
/// Mandel matrix of a fourth-order tensor with minor symmetries.
using Tensor4 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, 3, 1>;

constexpr int mandel_size(int d) { return d * (d + 1) / 2; }
/// Inverse of mandel_size; throws ShapeError for sizes other than 1, 3, 6.
int mandel_dim(Eigen::Index D);
/// Index pair (i, j), i <= j, of Mandel component I.
std::pair<int, int> mandel_pair(int d, int I);

MandelVec to_mandel(const RMat& sym);
RMat from_mandel(const MandelVec& v);

/// Mandel matrix of lambda delta_ij delta_kl + mu (delta_ik delta_jl + delta_il delta_jk).
Tensor4 iso_stiffness(double lambda, double mu, int d);

bool is_positive_definite(const Tensor4& C);

/// Mandel form of (i/2)(k u^T + u k^T).
CMandelVec sym_grad_hat(const IVec& k, const CVec& u_hat);

/// Fourier symbol of the Green operator of the reference medium C0 at k,
/// G(k) = B(k) (B(k)^T C0 B(k))^{-1} B(k)^T where B(k) u is the Mandel
/// form of sym(k u^T).  Real symmetric, homogeneous of degree 0 in k and
/// zero at k = 0.
Tensor4 green_coeff(const Tensor4& C0, const RVec& k);
Tensor4 green_coeff(const Tensor4& C0, const IVec& k);

/// Frequency table of the periodised Green operator on V_M^f.
struct GreenTable {
  PatternMatrix lattice;
  Tensor4 reference;
  GeneratorSpec generator;
  int radius = 0;
  double truncation_error = 0.0;
  std::vector<Tensor4> coeffs;  // frequency order of G(M^T)

  std::size_t size() const { return coeffs.size(); }
};

/// G^p_h = m sum_z G(h + M^T z) |c_{h+M^T z}|^2 over |z|_inf <= radius, with
/// G^p_0 = 0.  The rule must be orthonormalised.  The radius defaults to
/// the rule's support radius, or its tail-driven default for B-splines.
GreenTable periodized_green(const Tensor4& C0, const CoefficientRule& rule,
                            std::optional<int> radius = std::nullopt);

}  // namespace tihom
