#include "tihom/elasticity.hpp"

#include "tihom/errors.hpp"
#include "tihom/parallel.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

namespace tihom {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

/// Real part of the symmetrised gradient map: column c is Mandel(sym(k e_c^T)).
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 3> gradient_matrix(const RVec& k) {
  const int d = static_cast<int>(k.size());
  const int D = mandel_size(d);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 3> B =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 3>::Zero(D, d);
  for (int I = 0; I < D; ++I) {
    const auto [a, b] = mandel_pair(d, I);
    for (int c = 0; c < d; ++c) {
      const double v = 0.5 * ((b == c ? k(a) : 0.0) + (a == c ? k(b) : 0.0));
      B(I, c) = a == b ? v : kSqrt2 * v;
    }
  }
  return B;
}

}  // namespace

int mandel_dim(Eigen::Index D) {
  switch (D) {
    case 1:
      return 1;
    case 3:
      return 2;
    case 6:
      return 3;
    default:
      throw ShapeError("Mandel size must be 1, 3 or 6");
  }
}

std::pair<int, int> mandel_pair(int d, int I) {
  if (I < d) return {I, I};
  static constexpr std::pair<int, int> shear3[] = {{0, 1}, {0, 2}, {1, 2}};
  if (d == 2 && I == 2) return {0, 1};
  if (d == 3 && I < 6) return shear3[I - 3];
  throw ShapeError("Mandel index out of range");
}

MandelVec to_mandel(const RMat& sym) {
  const int d = static_cast<int>(sym.rows());
  MandelVec v(mandel_size(d));
  for (int I = 0; I < v.size(); ++I) {
    const auto [a, b] = mandel_pair(d, I);
    v(I) = a == b ? sym(a, a) : 0.5 * kSqrt2 * (sym(a, b) + sym(b, a));
  }
  return v;
}

RMat from_mandel(const MandelVec& v) {
  const int d = mandel_dim(v.size());
  RMat out(d, d);
  for (int I = 0; I < v.size(); ++I) {
    const auto [a, b] = mandel_pair(d, I);
    if (a == b) {
      out(a, a) = v(I);
    } else {
      out(a, b) = out(b, a) = v(I) / kSqrt2;
    }
  }
  return out;
}

Tensor4 iso_stiffness(double lambda, double mu, int d) {
  if (d < 1 || d > 3) throw ShapeError("dimension must be 1, 2 or 3");
  if (!(mu > 0.0) || !(d * lambda + 2.0 * mu > 0.0)) {
    throw DomainError("isotropic stiffness needs mu > 0 and d lambda + 2 mu > 0");
  }
  const int D = mandel_size(d);
  Tensor4 C = Tensor4::Zero(D, D);
  for (int I = 0; I < d; ++I) {
    for (int J = 0; J < d; ++J) C(I, J) = lambda;
    C(I, I) += 2.0 * mu;
  }
  for (int I = d; I < D; ++I) C(I, I) = 2.0 * mu;
  return C;
}

bool is_positive_definite(const Tensor4& C) {
  if (C.rows() != C.cols()) return false;
  if (!C.isApprox(C.transpose(), 1e-12)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  return llt.info() == Eigen::Success;
}

CMandelVec sym_grad_hat(const IVec& k, const CVec& u_hat) {
  const int d = static_cast<int>(k.size());
  if (u_hat.size() != d) throw ShapeError("sym_grad_hat: dimension mismatch");
  const cplx i_half(0.0, 0.5);
  CMandelVec out(mandel_size(d));
  for (int I = 0; I < out.size(); ++I) {
    const auto [a, b] = mandel_pair(d, I);
    const cplx v = i_half * (static_cast<double>(k(a)) * u_hat(b) + u_hat(a) * static_cast<double>(k(b)));
    out(I) = a == b ? v : kSqrt2 * v;
  }
  return out;
}

Tensor4 green_coeff(const Tensor4& C0, const RVec& k) {
  const int d = static_cast<int>(k.size());
  const int D = mandel_size(d);
  if (C0.rows() != D || C0.cols() != D) throw ShapeError("green_coeff: stiffness size does not match frequency");
  if (k.isZero(0.0)) return Tensor4::Zero(D, D);
  const auto B = gradient_matrix(k);
  // acoustic tensor B^T C0 B; the i and -i of the complex gradients cancel
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> A = B.transpose() * C0 * B;
  Eigen::LLT<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>> llt(A);
  if (llt.info() != Eigen::Success) {
    throw ContractError("green_coeff: acoustic tensor is not positive definite (is C0 elliptic?)");
  }
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 6> AinvBt = llt.solve(B.transpose());
  Tensor4 G = B * AinvBt;
  return 0.5 * (G + G.transpose());
}

Tensor4 green_coeff(const Tensor4& C0, const IVec& k) { return green_coeff(C0, RVec(k.cast<double>())); }

GreenTable periodized_green(const Tensor4& C0, const CoefficientRule& rule, std::optional<int> radius) {
  if (!rule.orthonormal()) {
    throw ContractError("periodized_green requires an orthonormalised generator (call orthonormalize)");
  }
  const PatternMatrix& M = rule.lattice();
  const int d = M.dim();
  const int D = mandel_size(d);
  if (C0.rows() != D || C0.cols() != D) throw ShapeError("reference stiffness does not match lattice dimension");
  if (!is_positive_definite(C0)) throw DomainError("reference stiffness must be symmetric positive definite");

  GreenTable table{M, C0, rule.spec(), radius.value_or(rule.default_radius()), 0.0, {}};
  if (table.radius < 0) throw DomainError("truncation radius must be non-negative");
  table.truncation_error = rule.tail_bound(table.radius);
  const auto m = static_cast<std::size_t>(M.size());
  const double md = static_cast<double>(m);
  const IMat Mt = M.entries().transpose();
  table.coeffs.assign(m, Tensor4::Zero(D, D));

  parallel_for(m, [&](std::size_t l) {
    const IVec h = M.frequency(l);
    if (h.isZero()) return;
    Tensor4 acc = Tensor4::Zero(D, D);
    IVec z = IVec::Constant(d, -table.radius);
    for (;;) {
      const IVec k = h + checked::mat_vec(Mt, z);
      const double c = rule(k);
      if (c != 0.0) acc += (md * c * c) * green_coeff(C0, k);
      int i = d - 1;
      while (i >= 0 && z(i) == table.radius) {
        z(i) = -table.radius;
        --i;
      }
      if (i < 0) break;
      ++z(i);
    }
    table.coeffs[l] = acc;
  });
  return table;
}

}  // namespace tihom
