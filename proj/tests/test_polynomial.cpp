#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "bottlemod/polynomial.hpp"

using bottlemod::Polynomial;
using bottlemod::real_roots;

TEST(Polynomial, EvaluatesWithHorner) {
  Polynomial p{1.0, 2.0, 3.0};
  EXPECT_DOUBLE_EQ(p(2.0), 1.0 + 4.0 + 12.0);
  EXPECT_EQ(p.degree(), 2u);
}

TEST(Polynomial, TrailingZerosAreTrimmed) {
  Polynomial p{4.0, 0.0, 0.0};
  EXPECT_TRUE(p.is_constant());
  EXPECT_TRUE(Polynomial({0.0}).is_zero());
}

TEST(Polynomial, ShiftMatchesPointwise) {
  Polynomial p{1.0, -3.0, 0.5, 2.0};
  Polynomial q = p.shifted(1.75);
  for (double u : {-2.0, 0.0, 0.3, 4.0}) EXPECT_NEAR(q(u), p(u + 1.75), 1e-10);
}

TEST(Polynomial, ComposeMatchesPointwise) {
  Polynomial outer{1.0, 0.0, 2.0};
  Polynomial inner{0.5, 3.0};
  Polynomial c = Polynomial::compose(outer, inner);
  EXPECT_EQ(c.degree(), 2u);
  for (double u : {-1.0, 0.0, 2.5}) EXPECT_NEAR(c(u), outer(inner(u)), 1e-12);
}

TEST(Polynomial, SubtractionCancelsToExactZero) {
  Polynomial p{0.1 + 0.2, 1.0 / 3.0};
  Polynomial q{0.3, 1.0 / 3.0};
  EXPECT_TRUE((p - q).is_zero());
}

TEST(Polynomial, DerivativeOfAntiderivativeRestoresCoefficients) {
  Polynomial p{1.5, -2.0, 0.25, 7.0};
  Polynomial r = p.antiderivative(3.0).derivative();
  ASSERT_EQ(r.coeffs().size(), p.coeffs().size());
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) EXPECT_DOUBLE_EQ(r[i], p[i]);
}

TEST(RealRoots, LinearAndQuadratic) {
  auto r1 = real_roots(Polynomial{-10.0, 1.0}, 0.0, 100.0);
  ASSERT_EQ(r1.size(), 1u);
  EXPECT_DOUBLE_EQ(r1[0], 10.0);

  auto r2 = real_roots(Polynomial{-4.0, 0.0, 1.0}, 0.0, std::numeric_limits<double>::infinity());
  ASSERT_EQ(r2.size(), 1u);
  EXPECT_DOUBLE_EQ(r2[0], 2.0);

  EXPECT_TRUE(real_roots(Polynomial{1.0, 0.0, 1.0}, -10.0, 10.0).empty());
}

TEST(RealRoots, CubicRootsAgainstKnownFactors) {
  // (u - 1)(u - 2)(u - 5)
  Polynomial p = Polynomial{-1.0, 1.0} * Polynomial{-2.0, 1.0} * Polynomial{-5.0, 1.0};
  auto r = real_roots(p, 0.0, 10.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 1.0, 1e-12);
  EXPECT_NEAR(r[1], 2.0, 1e-12);
  EXPECT_NEAR(r[2], 5.0, 1e-12);
  auto partial = real_roots(p, 1.5, 4.0);
  ASSERT_EQ(partial.size(), 1u);
  EXPECT_NEAR(partial[0], 2.0, 1e-12);
}

TEST(RealRoots, UnboundedIntervalUsesCauchyBound) {
  Polynomial p = Polynomial{-3.0, 1.0} * Polynomial{-40.0, 1.0} * Polynomial{1.0, 0.0, 1.0};
  auto r = real_roots(p, 0.0, std::numeric_limits<double>::infinity());
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 3.0, 1e-10);
  EXPECT_NEAR(r[1], 40.0, 1e-9);
}

TEST(RealRoots, RandomCubicsAgreeWithDenseSignScan) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> root(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = root(rng), b = root(rng), c = root(rng);
    Polynomial p = Polynomial{-a, 1.0} * Polynomial{-b, 1.0} * Polynomial{-c, 1.0};
    auto r = real_roots(p, -6.0, 6.0);
    for (double x : r) EXPECT_NEAR(p(x), 0.0, 1e-8);
    for (double expected : {a, b, c}) {
      bool found = false;
      for (double x : r) found |= std::abs(x - expected) < 1e-5;
      EXPECT_TRUE(found) << "missing root " << expected;
    }
  }
}
