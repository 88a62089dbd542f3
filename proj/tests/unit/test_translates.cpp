#include "tihom/errors.hpp"
#include "tihom/translates.hpp"

#include "support/random_lattice.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tihom;

namespace {

constexpr double kPi = std::numbers::pi;

IMat mat2(Index a, Index b, Index c, Index d) {
  IMat M(2, 2);
  M << a, b, c, d;
  return M;
}

IVec vec(std::initializer_list<Index> v) {
  IVec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (Index x : v) out(i++) = x;
  return out;
}

// Independent trapezoid, written from the definition.
double trapezoid(double xi, double a) {
  if (a == 0.0) return (xi >= -0.5 && xi < 0.5) ? 1.0 : 0.0;
  const double r = std::fabs(xi);
  return std::clamp((0.5 * (1.0 + a) - r) / a, 0.0, 1.0);
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

RVec xi_of(const PatternMatrix& M, const IVec& k) {
  return M.entries().cast<double>().transpose().fullPivLu().solve(k.cast<double>());
}

// Brute force m sum_z |c_{h + M^T z}|^2 over a box.
double brute_mass(const CoefficientRule& rule, const IVec& h, int radius) {
  const PatternMatrix& M = rule.lattice();
  const int d = M.dim();
  double s = 0.0;
  IVec z = IVec::Constant(d, -radius);
  for (;;) {
    const IVec k = h + M.entries().transpose() * z;
    const double c = rule(k);
    s += c * c;
    int i = d - 1;
    while (i >= 0 && z(i) == radius) z(i--) = -radius;
    if (i < 0) break;
    ++z(i);
  }
  return static_cast<double>(M.size()) * s;
}

}  // namespace

TEST(DirichletRule, Examples) {
  const auto rule = dirichlet_rule(PatternMatrix::diagonal({2, 2}));
  EXPECT_EQ(rule(vec({0, 0})), 1.0);
  EXPECT_EQ(rule(vec({3, 0})), 0.0);
  EXPECT_EQ(rule(vec({-1, -1})), 1.0);
  EXPECT_EQ(rule(vec({1, 0})), 0.0);  // half-open cell: 1/2 is excluded

  const PatternMatrix M(mat2(2, 1, 0, 2));
  const auto r2 = dirichlet_rule(M);
  int count = 0;
  for (Index a = -10; a <= 10; ++a) {
    for (Index b = -10; b <= 10; ++b) {
      if (r2(vec({a, b})) != 0.0) {
        ++count;
        // nonzero only on G(M^T): M^{-T} k in [-1/2,1/2)^2
        const RVec xi = xi_of(M, vec({a, b}));
        EXPECT_TRUE(xi.minCoeff() >= -0.5 && xi.maxCoeff() < 0.5);
      }
    }
  }
  EXPECT_EQ(count, 4);
}

TEST(DirichletRule, SupportIsTheFrequencySet) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto M = tihom::testing::random_pattern_matrix(rng, 2, 60);
    const auto rule = dirichlet_rule(M);
    const auto H = frequency_set(M);
    for (const auto& h : H.freqs) EXPECT_EQ(rule(h), 1.0);
    // every class has exactly one element of support
    for (std::size_t l = 0; l < H.size(); ++l) EXPECT_NEAR(brute_mass(rule, H.freqs[l], 3), M.size(), 0.0);
  }
}

TEST(DlvpRule, HatFunctionExample) {
  const auto rule = dlvp_rule(PatternMatrix::diagonal({4}), {1.0});
  EXPECT_NEAR(rule(vec({0})), 0.5, 1e-15);
  EXPECT_NEAR(rule(vec({1})), 0.375, 1e-15);
  EXPECT_NEAR(rule(vec({-1})), 0.375, 1e-15);
  EXPECT_NEAR(rule(vec({2})), 0.25, 1e-15);
  EXPECT_NEAR(rule(vec({4})), 0.0, 1e-15);
  EXPECT_EQ(rule.support_radius(), 1);
}

TEST(DlvpRule, MatchesTrapezoidDefinition) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto M = tihom::testing::random_pattern_matrix(rng, 2, 200);
    const std::vector<double> alpha{u(rng), u(rng)};
    const auto rule = dlvp_rule(M, alpha);
    for (Index a = -15; a <= 15; ++a) {
      for (Index b = -15; b <= 15; ++b) {
        const RVec xi = xi_of(M, vec({a, b}));
        const double expected =
            trapezoid(xi(0), alpha[0]) * trapezoid(xi(1), alpha[1]) / std::sqrt(static_cast<double>(M.size()));
        EXPECT_NEAR(rule(vec({a, b})), expected, 1e-12);
      }
    }
  }
}

TEST(DlvpRule, ZeroAlphaIsScaledDirichlet) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto M = tihom::testing::random_pattern_matrix(rng, 2, 100);
    const auto dlvp = dlvp_rule(M, {0.0, 0.0});
    const auto dir = dirichlet_rule(M);
    const double s = 1.0 / std::sqrt(static_cast<double>(M.size()));
    for (Index a = -20; a <= 20; ++a) {
      for (Index b = -20; b <= 20; ++b) EXPECT_EQ(dlvp(vec({a, b})), s * dir(vec({a, b})));
    }
    EXPECT_EQ(dlvp.support_radius(), 0);
  }
}

TEST(DlvpRule, ContinuityInAlpha) {
  const PatternMatrix M(mat2(8, 17, 0, 8));
  const auto near = dlvp_rule(M, {1e-3, 1e-3});
  const auto dir = dirichlet_rule(M);
  const double s = 1.0 / std::sqrt(64.0);
  for (Index a = -30; a <= 30; ++a) {
    for (Index b = -30; b <= 30; ++b) {
      const RVec xi = xi_of(M, vec({a, b}));
      // pointwise away from the cell boundary
      if (std::fabs(std::fabs(xi(0)) - 0.5) < 1e-9 || std::fabs(std::fabs(xi(1)) - 0.5) < 1e-9) continue;
      EXPECT_NEAR(near(vec({a, b})), s * dir(vec({a, b})), 2e-3);
    }
  }
}

TEST(DlvpRule, RejectsAlphaOutsideUnitCube) {
  const auto M = PatternMatrix::diagonal({4, 4});
  EXPECT_THROW(dlvp_rule(M, {1.5, 0.0}), DomainError);
  EXPECT_THROW(dlvp_rule(M, {-0.1, 0.0}), DomainError);
  EXPECT_THROW(dlvp_rule(M, {0.5}), DomainError);
  EXPECT_THROW(dlvp_rule(M, {std::nan(""), 0.0}), DomainError);
}

TEST(BsplineRule, Examples) {
  const auto M = PatternMatrix::diagonal({6, 6});
  const auto p1 = bspline_rule(M, 1);
  EXPECT_NEAR(p1(vec({0, 0})), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p1(vec({6, 0})), 0.0, 1e-15);
  EXPECT_NEAR(p1(vec({-12, 6})), 0.0, 1e-15);
  const auto p2 = bspline_rule(PatternMatrix::diagonal({2}), 2);
  EXPECT_NEAR(p2(vec({1})), (1.0 / std::sqrt(2.0)) * std::pow(2.0 / kPi, 2), 1e-15);
  EXPECT_FALSE(p2.support_radius().has_value());
  EXPECT_THROW(bspline_rule(M, 0), DomainError);
  EXPECT_THROW(bspline_rule(M, 11), DomainError);
}

TEST(BsplineRule, MatchesSincProduct) {
  const PatternMatrix M(mat2(3, 1, -1, 4));
  for (int p = 1; p <= 5; ++p) {
    const auto rule = bspline_rule(M, p);
    for (Index a = -9; a <= 9; ++a) {
      for (Index b = -9; b <= 9; ++b) {
        const RVec xi = xi_of(M, vec({a, b}));
        const double expected = std::pow(sinc(kPi * xi(0)) * sinc(kPi * xi(1)), p) / std::sqrt(13.0);
        EXPECT_NEAR(rule(vec({a, b})), expected, 1e-14);
      }
    }
  }
}

TEST(BracketSum, DeltaAndDirichlet) {
  const PatternMatrix M(mat2(2, 1, 0, 2));
  const auto delta = [](const IVec& k) { return k.isZero() ? cplx(1.0) : cplx{}; };
  for (const auto& h : frequency_set(M).freqs) {
    EXPECT_EQ(bracket_sum(delta, M, h, 3), h.isZero() ? cplx(1.0) : cplx{});
  }
  const auto dir = dirichlet_rule(M);
  const auto sq = [&](const IVec& k) { return cplx(dir(k) * dir(k)); };
  for (const auto& h : frequency_set(M).freqs) EXPECT_EQ(bracket_sum(sq, M, h, 2), cplx(1.0));
  EXPECT_THROW(bracket_sum(delta, M, vec({0, 0}), -1), DomainError);
  EXPECT_THROW(bracket_sum(delta, M, vec({0}), 1), ShapeError);
}

TEST(BracketSum, DlvpAgainstWideBox) {
  const auto M = PatternMatrix::diagonal({4, 4});
  const auto rule = dlvp_rule(M, {1.0, 1.0});
  const auto sq = [&](const IVec& k) { return cplx(rule(k) * rule(k)); };
  // the nonzero part of the sequence lies within one period of h
  for (const auto& h : frequency_set(M).freqs) {
    const double wide = bracket_sum(sq, M, h, 3).real();
    EXPECT_NEAR(bracket_sum(sq, M, h, 1).real(), wide, 1e-15);
  }
  double direct = 0.0;
  for (Index a = -12; a <= 12; a += 4) {
    for (Index b = -12; b <= 12; b += 4) direct += rule(vec({a, b})) * rule(vec({a, b}));
  }
  EXPECT_NEAR(bracket_sum(sq, M, vec({0, 0}), 3).real(), direct, 1e-15);
}

TEST(SquaredBracket, ClosedFormMatchesTruncatedSums) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto M = tihom::testing::random_pattern_matrix(rng, 2, 80);
    for (const auto& rule : {dirichlet_rule(M), dlvp_rule(M, {u(rng), u(rng)}), dlvp_rule(M, {0.0, u(rng)})}) {
      const auto closed = rule.squared_bracket();
      const auto table = squared_bracket_table(rule, *rule.support_radius());
      EXPECT_EQ(table.truncation_error, 0.0);
      for (std::size_t l = 0; l < closed.size(); ++l) {
        EXPECT_NEAR(closed[l], table.values[l], 1e-12);
        EXPECT_NEAR(closed[l], brute_mass(rule, M.frequency(l), 3), 1e-12);
      }
    }
  }
  // B-splines: truncation error bounded by the tail estimate
  const PatternMatrix M(mat2(4, 1, 0, 3));
  for (int p : {2, 3, 4}) {
    const auto rule = bspline_rule(M, p);
    const auto closed = rule.squared_bracket();
    const int Z = 10;
    const auto table = squared_bracket_table(rule, Z);
    for (std::size_t l = 0; l < closed.size(); ++l) {
      EXPECT_LE(closed[l] - table.values[l], table.truncation_error * closed[l] + 1e-15) << "p=" << p;
      EXPECT_GE(closed[l] - table.values[l], -1e-14);
    }
  }
}

TEST(SquaredBracket, BsplineOneDimensionalSeries) {
  // sum_z sinc^{2p}(pi (xi + z)) for p = 1 equals 1 (a classical identity)
  const auto rule = bspline_rule(PatternMatrix::diagonal({7}), 1);
  for (double v : rule.squared_bracket()) EXPECT_NEAR(v, 1.0, 1e-14);
  // p = 2: sum_z sinc^4(pi (xi + z)) = (2 + cos(2 pi xi)) / 3
  const auto r2 = bspline_rule(PatternMatrix::diagonal({7}), 2);
  const auto s2 = r2.squared_bracket();
  for (std::size_t l = 0; l < 7; ++l) {
    const double xi = static_cast<double>(r2.lattice().frequency(l)(0)) / 7.0;
    EXPECT_NEAR(s2[l], (2.0 + std::cos(2.0 * kPi * xi)) / 3.0, 1e-14);
  }
}

TEST(Orthonormalize, CertificateForAllKinds) {
  const PatternMatrix M(mat2(8, 17, 0, 8));
  for (const auto& spec : {GeneratorSpec::dirichlet(), GeneratorSpec::dlvp({0.4, 0.0}), GeneratorSpec::dlvp({1.0, 1.0}),
                           GeneratorSpec::bspline(1), GeneratorSpec::bspline(4)}) {
    const auto rule = orthonormalize(make_rule(M, spec));
    EXPECT_TRUE(rule.orthonormal());
    for (double v : rule.squared_bracket()) EXPECT_NEAR(v, 1.0, 1e-12) << spec.to_json().dump();
    const int Z = rule.default_radius(1e-14, 1L << 20);
    if (spec.kind == GeneratorKind::BSpline && spec.order == 1) continue;  // slowly decaying tail
    EXPECT_LT(rule.tail_bound(Z), 1e-13);
    for (std::size_t l = 0; l < static_cast<std::size_t>(M.size()); ++l) {
      EXPECT_NEAR(brute_mass(rule, M.frequency(l), Z), 1.0, 1e-12) << spec.to_json().dump();
    }
  }
}

TEST(Orthonormalize, DirichletBecomesInverseRootM) {
  const auto M = PatternMatrix::diagonal({4, 4});
  const auto rule = orthonormalize(dirichlet_rule(M));
  for (const auto& h : frequency_set(M).freqs) EXPECT_NEAR(rule(h), 0.25, 1e-15);
  EXPECT_EQ(rule(vec({2, 0})), 0.0);
}

TEST(Orthonormalize, Idempotent) {
  const auto M = PatternMatrix::diagonal({4, 4});
  const auto once = orthonormalize(dlvp_rule(M, {1.0, 1.0}));
  const auto twice = orthonormalize(once);
  for (Index a = -8; a <= 8; ++a) {
    for (Index b = -8; b <= 8; ++b) EXPECT_NEAR(once(vec({a, b})), twice(vec({a, b})), 1e-15);
  }
}

TEST(ConjugateSymmetry, CoefficientsAreEven) {
  const PatternMatrix M(mat2(5, 2, -1, 3));
  for (const auto& spec : {GeneratorSpec::dirichlet(), GeneratorSpec::dlvp({0.4, 0.7}), GeneratorSpec::bspline(3)}) {
    const auto rule = orthonormalize(make_rule(M, spec));
    for (Index a = -12; a <= 12; ++a) {
      for (Index b = -12; b <= 12; ++b) EXPECT_NEAR(rule(vec({a, b})), rule(vec({-a, -b})), 1e-15);
    }
  }
}

TEST(FundamentalInterpolant, DirichletIsConstant) {
  const PatternMatrix M(mat2(2, 1, 0, 2));
  const auto a = fundamental_interpolant(dirichlet_rule(M));
  for (const auto& v : a) EXPECT_NEAR(std::abs(v - cplx(0.25)), 0.0, 1e-15);
}

TEST(FundamentalInterpolant, HitsTheOriginNodeOnly) {
  const PatternMatrix M(mat2(8, 17, 0, 8));
  const auto P = pattern(M);
  for (const auto& spec : {GeneratorSpec::dirichlet(), GeneratorSpec::dlvp({0.4, 0.0}), GeneratorSpec::dlvp({1.0, 0.3}),
                           GeneratorSpec::bspline(2)}) {
    const auto rule = orthonormalize(make_rule(M, spec));
    const auto a = fundamental_interpolant(rule);
    // through the transform
    const auto nodal = nodal_values(rule, a);
    for (std::size_t j = 0; j < nodal.size(); ++j) {
      const double expected = P.numerators[j].isZero() ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(nodal[j] - expected), 0.0, 1e-10) << spec.to_json().dump();
    }
    // by direct synthesis at x = 2 pi y
    if (spec.kind == GeneratorKind::BSpline) continue;
    for (std::size_t j = 0; j < P.size(); ++j) {
      const cplx g = synthesize(rule, a, 2.0 * kPi * P.point(j), *rule.support_radius());
      const double expected = P.numerators[j].isZero() ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(g - expected), 0.0, 1e-10) << spec.to_json().dump();
    }
  }
}

TEST(FundamentalInterpolant, BsplineSynthesisConvergesWithRadius) {
  const auto M = PatternMatrix::diagonal({6});
  const auto rule = orthonormalize(bspline_rule(M, 4));
  const auto a = fundamental_interpolant(rule);
  const auto P = pattern(M);
  for (std::size_t j = 0; j < P.size(); ++j) {
    const cplx g = synthesize(rule, a, 2.0 * kPi * P.point(j), 400);
    EXPECT_NEAR(std::abs(g - (P.numerators[j].isZero() ? 1.0 : 0.0)), 0.0, 1e-9);
  }
}

TEST(Synthesize, RandomCoefficientsMatchNodalValues) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto M = tihom::testing::random_pattern_matrix(rng, 2, 40);
    const auto rule = orthonormalize(dlvp_rule(M, {u(rng), u(rng)}));
    FrequencySamples a(static_cast<std::size_t>(M.size()));
    for (auto& v : a) v = {g(rng), g(rng)};
    const auto nodal = nodal_values(rule, a);
    const auto P = pattern(M);
    for (std::size_t j = 0; j < P.size(); ++j) {
      EXPECT_NEAR(std::abs(synthesize(rule, a, 2.0 * kPi * P.point(j), 1) - nodal[j]), 0.0, 1e-11);
    }
  }
}

TEST(Synthesize, ConstantAndRealValued) {
  const PatternMatrix M(mat2(5, 2, -1, 3));
  const auto rule = orthonormalize(dlvp_rule(M, {0.5, 0.5}));
  FrequencySamples a(17, cplx{});
  a[M.frequency_index(vec({0, 0}))] = 2.0;
  const cplx g0 = synthesize(rule, a, RVec::Zero(2), 1);
  for (double t : {0.3, 1.7, -2.9}) {
    EXPECT_NEAR(std::abs(synthesize(rule, a, RVec::Constant(2, t), 1) - g0), 0.0, 1e-13);
  }
  // conjugate-symmetric coefficients synthesise a real function
  std::mt19937_64 rng(16);
  std::normal_distribution<double> n;
  FrequencySamples b(17);
  for (std::size_t l = 0; l < 17; ++l) {
    const std::size_t minus = M.frequency_index(-M.frequency(l));
    if (minus < l) continue;
    b[l] = {n(rng), minus == l ? 0.0 : n(rng)};
    b[minus] = std::conj(b[l]);
  }
  for (double t : {0.1, 0.9, -2.2}) {
    RVec x(2);
    x << t, 2.0 * t - 1.0;
    EXPECT_LT(std::abs(synthesize(rule, b, x, 1).imag()), 1e-12);
  }
}

TEST(Synthesize, DirichletKernelPeaksAtOrigin) {
  const auto M = PatternMatrix::diagonal({5, 5});
  const auto rule = orthonormalize(dirichlet_rule(M));
  std::vector<cplx> delta(25, cplx{});
  delta[M.node_index(vec({0, 0}))] = 1.0;
  const auto a = fft(M, delta);
  const double peak = std::abs(synthesize(rule, a, RVec::Zero(2), 0));
  for (double t : {0.2, 0.7, 1.3, 3.0}) {
    EXPECT_LT(std::abs(synthesize(rule, a, RVec::Constant(2, t), 0)), peak);
  }
}

TEST(GeneratorSpecJson, RoundTripAndErrors) {
  for (const auto& text : {R"({"kind":"dirichlet"})", R"({"kind":"dlvp","alpha":[0.4,0.0]})", R"({"kind":"bspline","order":3})"}) {
    const auto j = nlohmann::json::parse(text);
    EXPECT_EQ(GeneratorSpec::from_json(j).to_json(), j);
  }
  EXPECT_THROW(GeneratorSpec::from_json(nlohmann::json::parse(R"({"kind":"wavelet"})")), ConfigError);
  EXPECT_THROW(GeneratorSpec::from_json(nlohmann::json::parse(R"({"kind":"dlvp"})")), ConfigError);
  EXPECT_THROW(GeneratorSpec::from_json(nlohmann::json::parse(R"({"kind":"bspline","order":1.5})")), ConfigError);
  EXPECT_THROW(GeneratorSpec::from_json(nlohmann::json::parse(R"([1,2])")), ConfigError);
}

TEST(TailBound, DefaultRadius) {
  const auto M = PatternMatrix::diagonal({8, 8});
  EXPECT_EQ(dirichlet_rule(M).default_radius(), 0);
  EXPECT_EQ(dlvp_rule(M, {0.2, 0.2}).default_radius(), 1);
  const auto p4 = bspline_rule(M, 4);
  const int Z = p4.default_radius(1e-12);
  EXPECT_LT(p4.tail_bound(Z), 1e-12);
  EXPECT_GE(p4.tail_bound(Z - 1), 1e-12);
  // order 1 never reaches the tolerance: the term budget caps the box
  const int Z1 = bspline_rule(M, 1).default_radius(1e-12, 4096);
  EXPECT_LE((2 * Z1 + 1) * (2 * Z1 + 1), 4096);
  EXPECT_GT((2 * Z1 + 3) * (2 * Z1 + 3), 4096);
}
