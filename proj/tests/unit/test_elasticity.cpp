#include "tihom/elasticity.hpp"
#include "tihom/errors.hpp"

#include "support/random_lattice.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tihom;

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

IVec vec(std::initializer_list<Index> v) {
  IVec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (Index x : v) out(i++) = x;
  return out;
}

IMat mat2(Index a, Index b, Index c, Index d) {
  IMat M(2, 2);
  M << a, b, c, d;
  return M;
}

double delta(int a, int b) { return a == b ? 1.0 : 0.0; }

// Closed-form isotropic Green operator of FFT homogenisation in full index
// form, contracted to Mandel with weights 1 (normal) and sqrt2 (shear).
Tensor4 isotropic_green_oracle(double lambda, double mu, const RVec& k) {
  const int d = static_cast<int>(k.size());
  const int D = d * (d + 1) / 2;
  const double k2 = k.squaredNorm();
  auto full = [&](int i, int j, int l, int h) {
    const double first = (delta(l, i) * k(h) * k(j) + delta(h, i) * k(l) * k(j) + delta(l, j) * k(h) * k(i) +
                          delta(h, j) * k(l) * k(i)) /
                         (4.0 * mu * k2);
    const double second = (lambda + mu) / (mu * (lambda + 2.0 * mu)) * k(i) * k(j) * k(l) * k(h) / (k2 * k2);
    return first - second;
  };
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < d; ++a) pairs.emplace_back(a, a);
  if (d == 2) pairs.emplace_back(0, 1);
  if (d == 3) {
    pairs.emplace_back(0, 1);
    pairs.emplace_back(0, 2);
    pairs.emplace_back(1, 2);
  }
  Tensor4 G(D, D);
  for (int I = 0; I < D; ++I) {
    for (int J = 0; J < D; ++J) {
      const auto [i, j] = pairs[static_cast<std::size_t>(I)];
      const auto [l, h] = pairs[static_cast<std::size_t>(J)];
      const double w = (i == j ? 1.0 : kSqrt2) * (l == h ? 1.0 : kSqrt2);
      G(I, J) = w * full(i, j, l, h);
    }
  }
  return G;
}

Tensor4 random_spd(std::mt19937_64& rng, int D) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(D, D);
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) A(i, j) = g(rng);
  }
  return A * A.transpose() + Eigen::MatrixXd::Identity(D, D);
}

double min_eigenvalue(const Tensor4& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(Mandel, SizesAndPairs) {
  EXPECT_EQ(mandel_size(1), 1);
  EXPECT_EQ(mandel_size(2), 3);
  EXPECT_EQ(mandel_size(3), 6);
  EXPECT_EQ(mandel_dim(6), 3);
  EXPECT_THROW(mandel_dim(4), ShapeError);
  EXPECT_EQ(mandel_pair(3, 3), std::make_pair(0, 1));
  EXPECT_EQ(mandel_pair(3, 5), std::make_pair(1, 2));
  EXPECT_EQ(mandel_pair(2, 2), std::make_pair(0, 1));
}

TEST(Mandel, InnerProductIsFullContraction) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int d = 1; d <= 3; ++d) {
    for (int trial = 0; trial < 20; ++trial) {
      RMat a(d, d), b(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          a(i, j) = g(rng);
          b(i, j) = g(rng);
        }
      }
      a = (a + a.transpose()).eval();
      b = (b + b.transpose()).eval();
      EXPECT_NEAR(to_mandel(a).dot(to_mandel(b)), (a.array() * b.array()).sum(), 1e-12);
      EXPECT_LT((from_mandel(to_mandel(a)) - a).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(IsoStiffness, Examples) {
  EXPECT_LT((iso_stiffness(0.0, 0.5, 2) - Tensor4::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  Tensor4 expected(3, 3);
  expected << 3, 1, 0, 1, 3, 0, 0, 0, 2;
  EXPECT_LT((iso_stiffness(1.0, 1.0, 2) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(iso_stiffness(1.0, 0.0, 2), DomainError);
  EXPECT_THROW(iso_stiffness(-2.0, 1.0, 2), DomainError);
  EXPECT_NO_THROW(iso_stiffness(-0.5, 1.0, 3));
  EXPECT_TRUE(is_positive_definite(iso_stiffness(2.0, 1.5, 3)));
}

TEST(IsoStiffness, ActsAsLameLaw) {
  // sigma = lambda tr(e) I + 2 mu e
  const double lambda = 1.3, mu = 0.7;
  RMat e(3, 3);
  e << 0.1, 0.2, -0.3, 0.2, 0.5, 0.05, -0.3, 0.05, -0.2;
  const RMat sigma = lambda * e.trace() * RMat::Identity(3, 3) + 2.0 * mu * e;
  const MandelVec s = iso_stiffness(lambda, mu, 3) * to_mandel(e);
  EXPECT_LT((s - to_mandel(sigma)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SymGradHat, Examples) {
  CVec u(2);
  u << 1.0, 0.0;
  EXPECT_TRUE(sym_grad_hat(vec({0, 0}), u).isZero());
  const auto a = sym_grad_hat(vec({1, 0}), u);
  EXPECT_NEAR(std::abs(a(0) - cplx(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(2)), 0.0, 1e-15);
  const auto b = sym_grad_hat(vec({0, 1}), u);
  EXPECT_NEAR(std::abs(b(0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b(1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(b(2) - cplx(0, kSqrt2 / 2.0)), 0.0, 1e-15);
}

TEST(GreenCoeff, ZeroFrequency) {
  EXPECT_TRUE(green_coeff(iso_stiffness(1.0, 1.0, 2), vec({0, 0})).isZero(0.0));
  EXPECT_TRUE(green_coeff(iso_stiffness(1.0, 1.0, 3), vec({0, 0, 0})).isZero(0.0));
}

TEST(GreenCoeff, MatchesIsotropicClosedForm) {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<Index> entry(-50, 50);
  std::uniform_real_distribution<double> lame(0.1, 10.0);
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 1000; ++trial) {
      IVec k(d);
      for (int i = 0; i < d; ++i) k(i) = entry(rng);
      if (k.isZero()) continue;
      const double lambda = lame(rng), mu = lame(rng);
      const Tensor4 G = green_coeff(iso_stiffness(lambda, mu, d), k);
      const Tensor4 oracle = isotropic_green_oracle(lambda, mu, k.cast<double>());
      EXPECT_LT((G - oracle).cwiseAbs().maxCoeff(), 1e-12) << "k = " << k.transpose();
    }
  }
}

TEST(GreenCoeff, OneDimensionalIsCompliance) {
  Tensor4 C0(1, 1);
  C0 << 4.0;
  EXPECT_NEAR(green_coeff(C0, vec({3}))(0, 0), 0.25, 1e-15);
}

TEST(GreenCoeff, ProjectorPropertyForAnisotropicReference) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<Index> entry(-20, 20);
  for (int d : {2, 3}) {
    const int D = mandel_size(d);
    for (int trial = 0; trial < 200; ++trial) {
      const Tensor4 C0 = random_spd(rng, D);
      IVec k(d);
      for (int i = 0; i < d; ++i) k(i) = entry(rng);
      if (k.isZero()) continue;
      CVec u(d);
      for (int i = 0; i < d; ++i) u(i) = {g(rng), g(rng)};
      const CMandelVec eps = sym_grad_hat(k, u);
      const Tensor4 G = green_coeff(C0, k);
      const CMandelVec back = G.cast<cplx>() * (C0.cast<cplx>() * eps);
      EXPECT_LT((back - eps).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + eps.cwiseAbs().maxCoeff()));
      // idempotent: G C0 G = G
      EXPECT_LT((G * C0 * G - G).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_GT(min_eigenvalue(G), -1e-12);
    }
  }
}

TEST(GreenCoeff, HomogeneousOfDegreeZero) {
  std::mt19937_64 rng(24);
  const Tensor4 C0 = random_spd(rng, 6);
  for (const IVec& k : {vec({1, 2, -3}), vec({0, 5, 1}), vec({7, 0, 0})}) {
    const Tensor4 G = green_coeff(C0, k);
    for (Index t : {2, 3, -1, -4}) {
      EXPECT_LT((green_coeff(C0, IVec(t * k)) - G).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(PeriodizedGreen, DirichletReproducesGreenCoeff) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 2;
    const auto M = tihom::testing::random_pattern_matrix(rng, d, 300);
    const Tensor4 C0 = trial % 3 == 0 ? random_spd(rng, mandel_size(d)) : iso_stiffness(1.0 + trial, 2.0, d);
    const auto table = periodized_green(C0, orthonormalize(dirichlet_rule(M)));
    EXPECT_EQ(table.radius, 0);
    EXPECT_EQ(table.truncation_error, 0.0);
    for (std::size_t l = 0; l < table.size(); ++l) {
      EXPECT_LT((table.coeffs[l] - green_coeff(C0, M.frequency(l))).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(PeriodizedGreen, DlvpFiniteSumIsComplete) {
  const PatternMatrix M(mat2(8, 17, 0, 8));
  const Tensor4 C0 = iso_stiffness(1.0, 1.0, 2);
  const auto rule = orthonormalize(dlvp_rule(M, {0.4, 0.0}));
  const auto near = periodized_green(C0, rule);
  const auto wide = periodized_green(C0, rule, 4);
  EXPECT_EQ(near.radius, 1);
  for (std::size_t l = 0; l < near.size(); ++l) {
    EXPECT_LT((near.coeffs[l] - wide.coeffs[l]).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PeriodizedGreen, PositiveSemidefiniteAndZeroMean) {
  const PatternMatrix M(mat2(6, 5, -2, 4));
  std::mt19937_64 rng(26);
  const Tensor4 C0 = random_spd(rng, 3);
  for (const auto& spec : {GeneratorSpec::dirichlet(), GeneratorSpec::dlvp({0.4, 0.0}), GeneratorSpec::dlvp({1.0, 0.6}),
                           GeneratorSpec::bspline(2)}) {
    const auto table = periodized_green(C0, orthonormalize(make_rule(M, spec)), spec.kind == GeneratorKind::BSpline
                                                                                    ? std::optional<int>(6)
                                                                                    : std::nullopt);
    EXPECT_TRUE(table.coeffs[M.frequency_index(vec({0, 0}))].isZero(0.0));
    for (const auto& G : table.coeffs) {
      EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_GT(min_eigenvalue(G), -1e-12);
    }
  }
}

TEST(PeriodizedGreen, ConjugateSymmetry) {
  // symmetric coefficient rules (odd lattice or positive slopes) give G_{-h} = G_h
  const PatternMatrix M(mat2(5, 2, -1, 3));
  const Tensor4 C0 = iso_stiffness(0.5, 1.0, 2);
  for (const auto& spec : {GeneratorSpec::dirichlet(), GeneratorSpec::dlvp({0.3, 0.8})}) {
    const auto table = periodized_green(C0, orthonormalize(make_rule(M, spec)));
    for (std::size_t l = 0; l < table.size(); ++l) {
      const std::size_t minus = M.frequency_index(-M.frequency(l));
      EXPECT_LT((table.coeffs[l] - table.coeffs[minus]).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(PeriodizedGreen, Contracts) {
  const auto M = PatternMatrix::diagonal({4, 4});
  EXPECT_THROW(periodized_green(iso_stiffness(1, 1, 2), dlvp_rule(M, {0.5, 0.5})), ContractError);
  Tensor4 bad = Tensor4::Identity(3, 3);
  bad(0, 0) = -1.0;
  EXPECT_THROW(periodized_green(bad, orthonormalize(dirichlet_rule(M))), DomainError);
  EXPECT_THROW(periodized_green(iso_stiffness(1, 1, 3), orthonormalize(dirichlet_rule(M))), ShapeError);
}
