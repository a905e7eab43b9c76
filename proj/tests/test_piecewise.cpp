#include <gtest/gtest.h>

#include <random>

#include "bottlemod/piecewise.hpp"
#include "test_support.hpp"

using namespace bottlemod;
using bottlemod::testing::rel_close;

namespace {

PiecewiseFn step(double at, double low, double high) {
  return PiecewiseFn({0.0, at}, {Polynomial::constant(low), Polynomial::constant(high)});
}

}  // namespace

TEST(Eval, SingleLinearPiece) { EXPECT_DOUBLE_EQ(PiecewiseFn::linear(2.0, 1.0).eval(3.0), 7.0); }

TEST(Eval, JumpUsesRightPiece) {
  auto f = step(5.0, 0.0, 100.0);
  EXPECT_DOUBLE_EQ(f.eval(5.0), 100.0);
  EXPECT_DOUBLE_EQ(f.eval_left(5.0), 0.0);
  EXPECT_TRUE(has_jump(f, 5.0));
  EXPECT_FALSE(has_jump(f, 4.0));
}

TEST(Eval, LeftOfDomainIsAnError) {
  auto f = PiecewiseFn::linear(1.0);
  EXPECT_THROW(f.eval(-1.0), DomainError);
  EXPECT_THROW(f.eval_left(0.0), DomainError);
}

TEST(Eval, HoldExtensionFreezesLastValue) {
  PiecewiseFn f({0.0, 4.0}, {Polynomial{0.0, 2.0}}, Extension::hold);
  EXPECT_DOUBLE_EQ(f.eval(10.0), 8.0);
  PiecewiseFn g({0.0, 4.0}, {Polynomial{0.0, 2.0}}, Extension::continue_last);
  EXPECT_DOUBLE_EQ(g.eval(10.0), 20.0);
}

TEST(Eval, RejectsBadBreakpoints) {
  EXPECT_THROW(PiecewiseFn({0.0, 0.0}, {Polynomial{1.0}, Polynomial{2.0}}), InvalidParameter);
  EXPECT_THROW(PiecewiseFn({0.0, 1.0, 2.0, 3.0}, {Polynomial{1.0}}), InvalidParameter);
}

TEST(Antiderivative, LinearIntegral) {
  auto f = PiecewiseFn::constant(10.0).antiderivative(0.0);
  EXPECT_DOUBLE_EQ(f.eval(2.5), 25.0);
  auto g = PiecewiseFn::constant(5.0).antiderivative(0.0);
  EXPECT_EQ(g.piece(0), (Polynomial{0.0, 5.0}));
}

TEST(Antiderivative, StitchesContinuously) {
  auto f = step(2.0, 1.0, 3.0).antiderivative(1.0);
  EXPECT_DOUBLE_EQ(f.eval(2.0), 3.0);
  EXPECT_DOUBLE_EQ(f.eval(4.0), 9.0);
}

TEST(Derivative, PowerRuleAndPieces) {
  PiecewiseFn sq({0.0}, {Polynomial{0.0, 0.0, 1.0}});
  EXPECT_EQ(sq.derivative().piece(0), (Polynomial{0.0, 2.0}));

  PiecewiseFn f({0.0, 5.0}, {Polynomial{0.0, 3.0}, Polynomial{15.0}});
  auto d = f.derivative();
  EXPECT_EQ(d.piece(0), Polynomial{3.0});
  EXPECT_TRUE(d.piece(1).is_zero());
  EXPECT_FALSE(has_jump(f, 5.0));

  auto j = step(5.0, 0.0, 100.0);
  EXPECT_TRUE(has_jump(j, 5.0));
  EXPECT_TRUE(j.derivative().piece(1).is_zero());
}

TEST(Arithmetic, AddMulAndRefinement) {
  auto u = PiecewiseFn::identity();
  EXPECT_EQ(add(u, PiecewiseFn::linear(2.0)).piece(0), (Polynomial{0.0, 3.0}));
  EXPECT_EQ(mul(u, u).piece(0), (Polynomial{0.0, 0.0, 1.0}));
  auto r = add(step(3.0, 1.0, 2.0), step(5.0, 0.0, 4.0));
  EXPECT_EQ(r.breakpoints(), (std::vector<double>{0.0, 3.0, 5.0}));
  EXPECT_DOUBLE_EQ(r.eval(4.0), 2.0);
  EXPECT_DOUBLE_EQ(r.eval(6.0), 6.0);
}

TEST(Division, ScalesByPiecewiseConstant) {
  EXPECT_DOUBLE_EQ(div_by_pwconstant(PiecewiseFn::constant(10.0), PiecewiseFn::constant(2.0)).eval(1.0), 5.0);
  auto q = div_by_pwconstant(PiecewiseFn({0.0, 4.0}, {Polynomial{8.0}, Polynomial{8.0}}), step(4.0, 2.0, 4.0));
  EXPECT_DOUBLE_EQ(q.eval(1.0), 4.0);
  EXPECT_DOUBLE_EQ(q.eval(5.0), 2.0);
}

TEST(Division, ZeroOverZeroIsZero) {
  EXPECT_DOUBLE_EQ(div_by_pwconstant(PiecewiseFn::constant(0.0), PiecewiseFn::constant(0.0)).eval(3.0), 0.0);
}

TEST(Division, Errors) {
  EXPECT_THROW(div_by_pwconstant(PiecewiseFn::constant(1.0), PiecewiseFn::constant(0.0)), DivisionByZero);
  EXPECT_THROW(div_by_pwconstant(PiecewiseFn::constant(1.0), PiecewiseFn::identity()), NotPiecewiseConstant);
}

TEST(Min, LinearIntersection) {
  auto m = min_of({PiecewiseFn::identity(), PiecewiseFn::linear(2.0, -5.0)});
  ASSERT_EQ(m.fn.size(), 2u);
  EXPECT_DOUBLE_EQ(m.fn.breakpoint(1), 5.0);
  EXPECT_EQ(m.labels[0], std::vector<int>{1});
  EXPECT_EQ(m.labels[1], std::vector<int>{0});
  EXPECT_DOUBLE_EQ(m.fn.eval(2.0), -1.0);
  EXPECT_DOUBLE_EQ(m.fn.eval(7.0), 7.0);
}

TEST(Min, IdenticalFunctionsTie) {
  PiecewiseFn f({0.0, 2.0}, {Polynomial{1.0, 1.0}, Polynomial{0.0, 0.0, 1.0}});
  auto m = min_of({f, f});
  for (const auto& l : m.labels) EXPECT_EQ(l, (std::vector<int>{0, 1}));
  for (double x : {0.0, 1.0, 2.0, 5.0}) EXPECT_DOUBLE_EQ(m.fn.eval(x), f.eval(x));
}

TEST(Min, ThreeShapedDataCurvesAttributeInOrder) {
  // linear, 20 %-then-jump, quadratic (capped)
  auto linear = PiecewiseFn::linear(10.0);
  auto jumpy = step(6.0, 20.0, 100.0);
  PiecewiseFn quad({0.0, std::sqrt(50.0)}, {Polynomial{0.0, 0.0, 2.0}, Polynomial{100.0}});
  auto m = min_of({linear, jumpy, quad});
  std::vector<int> order;
  for (const auto& l : m.labels)
    if (order.empty() || order.back() != l.front()) order.push_back(l.front());
  ASSERT_GE(order.size(), 3u);
  EXPECT_EQ((std::vector<int>{order[0], order[1], order[2]}), (std::vector<int>{2, 1, 0}));
  EXPECT_NEAR(m.fn.breakpoint(1), std::sqrt(10.0), 1e-12);
}

TEST(Compose, LinearOfLinear) {
  auto r = compose(PiecewiseFn::linear(0.5), PiecewiseFn::linear(10.0));
  EXPECT_DOUBLE_EQ(r.eval(3.0), 15.0);
  EXPECT_EQ(r.piece(0), (Polynomial{0.0, 5.0}));
}

TEST(Compose, BurstStepPreimage) {
  auto r = compose(step(100.0, 0.0, 80.0), PiecewiseFn::linear(10.0));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r.breakpoint(1), 10.0);
  // pointwise oracle away from the jump
  for (double t = 0.0; t < 20.0; t += 0.173) {
    if (std::abs(t - 10.0) < 1e-9) continue;
    EXPECT_DOUBLE_EQ(r.eval(t), step(100.0, 0.0, 80.0).eval(10.0 * t));
  }
  EXPECT_DOUBLE_EQ(r.eval(10.0), 80.0);
}

TEST(Compose, IdentityOuterIsNeutral) {
  std::mt19937 rng(3);
  auto f = bottlemod::testing::random_monotone(rng);
  auto r = compose(PiecewiseFn::identity(), f);
  for (double x : {0.0, 0.5, 1.7, 4.0, 11.0}) EXPECT_TRUE(rel_close(r.eval(x), f.eval(x)));
}

TEST(Compose, RejectsDecreasingInner) {
  EXPECT_THROW(compose(PiecewiseFn::identity(), PiecewiseFn::linear(-1.0, 10.0)), NotMonotone);
}

TEST(Compose, LeftSideReadsOuterLeftContinuously) {
  // inner resting exactly on an outer breakpoint
  auto outer = step(5.0, 1.0, 2.0);
  auto inner = PiecewiseFn({0.0, 3.0}, {Polynomial{5.0}, Polynomial{5.0, 1.0}});
  EXPECT_DOUBLE_EQ(compose(outer, inner).eval(1.0), 2.0);
  EXPECT_DOUBLE_EQ(compose(outer, inner, Side::left).eval(1.0), 1.0);
  EXPECT_DOUBLE_EQ(compose(outer, inner, Side::left).eval(4.0), 2.0);
}

TEST(GeneralizedInverse, LinearIsExactInverse) {
  auto g = generalized_inverse(PiecewiseFn::linear(2.0));
  for (double y : {0.0, 1.0, 7.5}) EXPECT_DOUBLE_EQ(g.eval(y), y / 2.0);
}

TEST(GeneralizedInverse, BurstBecomesStep) {
  auto g = generalized_inverse(step(100.0, 0.0, 80.0));
  // enumerate min{x : f(x) >= y} on a grid as the oracle
  auto f = step(100.0, 0.0, 80.0);
  for (double y = 0.5; y <= 80.0; y += 0.5) {
    double x = 0.0;
    while (f.eval(x) < y) x += 0.25;
    EXPECT_DOUBLE_EQ(g.eval(y), x) << y;
  }
  EXPECT_DOUBLE_EQ(g.eval_left(0.0), 0.0);
  EXPECT_DOUBLE_EQ(g.eval(-0.5), 0.0);
  EXPECT_THROW(g.eval(81.0), DomainError);
}

TEST(GeneralizedInverse, RangeLimit) {
  auto g = generalized_inverse(PiecewiseFn({0.0, 5.0}, {Polynomial{0.0, 1.0}, Polynomial{5.0}}));
  EXPECT_DOUBLE_EQ(g.eval(3.0), 3.0);
  EXPECT_DOUBLE_EQ(g.eval(5.0), 5.0);
  EXPECT_THROW(g.eval(5.5), DomainError);
}

TEST(GeneralizedInverse, RejectsDecreasing) {
  EXPECT_THROW(generalized_inverse(PiecewiseFn::linear(-1.0)), NotMonotone);
}

TEST(Splice, ReplacesTail) {
  auto f = PiecewiseFn::identity();
  auto g = PiecewiseFn::constant(10.0);
  EXPECT_EQ(splice(f, 0.0, g), g);
  auto s = splice(f, 5.0, g);
  EXPECT_EQ(s.breakpoints(), (std::vector<double>{0.0, 5.0}));
  EXPECT_DOUBLE_EQ(s.eval(3.0), 3.0);
  EXPECT_DOUBLE_EQ(s.eval(5.0), 10.0);
  EXPECT_DOUBLE_EQ(s.eval_left(5.0), f.eval_left(5.0));
  EXPECT_THROW(splice(f, -1.0, g), DomainError);
}

TEST(FirstCrossing, Examples) {
  auto c1 = first_crossing(PiecewiseFn::constant(10.0), PiecewiseFn::identity(), 0.0);
  ASSERT_TRUE(c1);
  EXPECT_DOUBLE_EQ(*c1, 10.0);
  auto c2 = first_crossing(PiecewiseFn({0.0}, {Polynomial{0.0, 0.0, 1.0}}), PiecewiseFn::constant(4.0), 0.0);
  ASSERT_TRUE(c2);
  EXPECT_DOUBLE_EQ(*c2, 2.0);
  EXPECT_FALSE(first_crossing(PiecewiseFn::constant(1.0), PiecewiseFn::linear(1.0, 2.0), 0.0));
}

TEST(FirstCrossing, RespectsStartingPoint) {
  auto c = first_crossing(PiecewiseFn({0.0}, {Polynomial{0.0, 0.0, 1.0}}), PiecewiseFn::constant(4.0), 3.0);
  EXPECT_FALSE(c);
}

TEST(FirstReach, FindsLevelAndJumps) {
  EXPECT_DOUBLE_EQ(*first_reach(PiecewiseFn::linear(2.0), 7.0, 0.0), 3.5);
  EXPECT_DOUBLE_EQ(*first_reach(step(4.0, 0.0, 9.0), 5.0, 0.0), 4.0);
  EXPECT_FALSE(first_reach(PiecewiseFn::constant(1.0), 5.0, 0.0));
}

TEST(Monotonicity, DetectsDecreaseWithWitness) {
  PiecewiseFn f({0.0, 2.0}, {Polynomial{0.0, 1.0}, Polynomial{2.0, -1.0}});
  auto w = monotonicity_violation(f);
  ASSERT_TRUE(w);
  EXPECT_GE(*w, 2.0);
  EXPECT_FALSE(monotonicity_violation(PiecewiseFn::identity()));
  EXPECT_TRUE(monotonicity_violation(step(1.0, 5.0, 4.0)));
  EXPECT_TRUE(satisfies(f, MonotoneTag{MonotoneTag::Kind::none, 0.0}));
  EXPECT_FALSE(satisfies(f, MonotoneTag{}));
}

// Property tests --------------------------------------------------------------

class PiecewiseProperties : public ::testing::TestWithParam<int> {};

TEST_P(PiecewiseProperties, PointwiseSoundnessOfArithmetic) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()));
  auto f = bottlemod::testing::random_fn(rng);
  auto g = bottlemod::testing::random_fn(rng);
  auto s = add(f, g), d = sub(f, g), m = mul(f, g);
  auto pts = bottlemod::testing::sample_points(rng, {&f, &g}, 1000);
  for (double x : pts) {
    ASSERT_TRUE(rel_close(s.eval(x), f.eval(x) + g.eval(x), 1e-9, 1e-9)) << x;
    ASSERT_TRUE(rel_close(d.eval(x), f.eval(x) - g.eval(x), 1e-9, 1e-9)) << x;
    ASSERT_TRUE(rel_close(m.eval(x), f.eval(x) * g.eval(x), 1e-9, 1e-9)) << x;
  }
}

TEST_P(PiecewiseProperties, MinEnvelopeAndLabels) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) + 1000u);
  std::vector<PiecewiseFn> fs;
  const int n = 1 + GetParam() % 3;
  for (int i = 0; i < n + 1; ++i) fs.push_back(bottlemod::testing::random_fn(rng, 6, 3));
  auto m = min_of(fs);
  std::vector<const PiecewiseFn*> ptrs;
  for (auto& f : fs) ptrs.push_back(&f);
  for (double x : bottlemod::testing::sample_points(rng, ptrs, 1000)) {
    double lo = kInf;
    for (auto& f : fs) lo = std::min(lo, f.eval(x));
    ASSERT_TRUE(rel_close(m.fn.eval(x), lo, 1e-9, 1e-8)) << x;
    // the reported label set attains the minimum
    for (int k : m.labels_at(x)) ASSERT_TRUE(rel_close(fs[static_cast<std::size_t>(k)].eval(x), lo, 1e-6, 1e-6)) << x;
  }
}

TEST_P(PiecewiseProperties, SpliceAndDivisionPointwise) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) + 2000u);
  auto f = bottlemod::testing::random_fn(rng);
  auto g = bottlemod::testing::random_fn(rng);
  const double at = std::uniform_real_distribution<double>(0.0, 6.0)(rng);
  auto s = splice(f, at, g);
  auto pts = bottlemod::testing::sample_points(rng, {&f, &g}, 1000);
  for (double x : pts) ASSERT_TRUE(rel_close(s.eval(x), x < at ? f.eval(x) : g.eval(x), 1e-9, 1e-9)) << x;

  auto c = bottlemod::testing::random_fn(rng, 6, 0);
  bool zero_piece = false;
  for (const auto& p : c.pieces()) zero_piece |= p[0] == 0.0;
  if (!zero_piece) {
    auto q = div_by_pwconstant(f, c);
    for (double x : pts) ASSERT_TRUE(rel_close(q.eval(x), f.eval(x) / c.eval(x), 1e-9, 1e-9)) << x;
  }
}

TEST_P(PiecewiseProperties, ComposeIsPointwiseAndMonotone) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) + 3000u);
  // continuous outer so breakpoint rounding cannot flip pieces
  auto outer = bottlemod::testing::random_monotone(rng, 5, 2, false);
  auto inner = bottlemod::testing::random_monotone(rng, 5, 2, true);
  auto c = compose(outer, inner);
  EXPECT_FALSE(monotonicity_violation(c, 1e-7));
  for (double x : bottlemod::testing::sample_points(rng, {&inner}, 1000))
    ASSERT_TRUE(rel_close(c.eval(x), outer.eval(inner.eval(x)), 1e-9, 1e-8)) << x;
}

TEST_P(PiecewiseProperties, GeneralizedInverseGaloisProperty) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) + 4000u);
  auto f = bottlemod::testing::random_monotone(rng, 5, 1, true);
  auto g = generalized_inverse(f);
  std::uniform_real_distribution<double> ux(0.0, 15.0);
  const double ymax = std::isfinite(g.upper()) ? g.upper() : f.eval(15.0);
  std::uniform_real_distribution<double> uy(f.eval(0.0), ymax);
  auto inv = [&](double y) { return y > g.start() ? g.eval_left(y) : g.eval(y); };
  for (int i = 0; i < 500; ++i) {
    const double y = uy(rng);
    ASSERT_GE(f.eval(inv(y)), y - 1e-9 * std::max(1.0, std::abs(y))) << y;
    const double x = ux(rng);
    if (f.eval(x) <= ymax) {
      ASSERT_LE(inv(f.eval(x)), x + 1e-9 * std::max(1.0, x)) << x;
    }
  }
}

TEST_P(PiecewiseProperties, DerivativeAntiderivativeRoundTrip) {
  std::mt19937 rng(static_cast<unsigned>(GetParam()) + 5000u);
  auto f = bottlemod::testing::random_fn(rng);
  auto r = f.antiderivative(1.25).derivative();
  ASSERT_EQ(r.breakpoints(), f.breakpoints());
  for (std::size_t i = 0; i < f.size(); ++i) {
    ASSERT_EQ(r.piece(i).coeffs().size(), f.piece(i).coeffs().size());
    for (std::size_t k = 0; k < f.piece(i).coeffs().size(); ++k) EXPECT_DOUBLE_EQ(r.piece(i)[k], f.piece(i)[k]);
  }
  EXPECT_TRUE(rel_close(f.antiderivative(1.25).eval(f.start()), 1.25));
}

INSTANTIATE_TEST_SUITE_P(Randomized, PiecewiseProperties, ::testing::Range(0, 60));
