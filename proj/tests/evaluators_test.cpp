#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "memlab/evaluators.hpp"

namespace memlab {
namespace {

TEST(EvaluatorTest, Examples) {
  EXPECT_TRUE(evaluate(EvaluatorSpec::strict(), 0.5, 0.0).accept);
  EXPECT_TRUE(evaluate(EvaluatorSpec::coarse(kCoarse1Threshold), 1.5, 0.0).accept);
  EXPECT_FALSE(evaluate(EvaluatorSpec::coarse(kCoarse3Threshold), 1.5, 0.0).accept);
  EXPECT_TRUE(evaluate(EvaluatorSpec::add_all(), 10.0, 0.0).accept);
  EXPECT_FALSE(evaluate(EvaluatorSpec::fixed(), 0.0, 0.0).accept);
}

TEST(EvaluatorTest, UtilityAndError) {
  const auto v = evaluate(EvaluatorSpec::add_all(), 3.5, 2.0);
  EXPECT_DOUBLE_EQ(v.abs_error, 1.5);
  EXPECT_EQ(v.utility, 0.0);
  EXPECT_EQ(evaluate(EvaluatorSpec::fixed(), 2.5, 2.0).utility, 1.0);
  EXPECT_EQ(evaluate(EvaluatorSpec::add_all(), 3.5, 2.0, 2.0).utility, 1.0);
}

TEST(EvaluatorTest, Errors) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(evaluate(EvaluatorSpec::strict(), nan, 0.0), std::invalid_argument);
  EXPECT_THROW(evaluate(EvaluatorSpec::strict(), 0.0, INFINITY), std::invalid_argument);
  EXPECT_THROW(success(nan, 0.0), std::invalid_argument);
  EXPECT_THROW((EvaluatorSpec{EvaluatorKind::coarse, std::nullopt}.validate()), std::invalid_argument);
  EXPECT_THROW((EvaluatorSpec{EvaluatorKind::fixed, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW(evaluator_kind_from_string("lenient"), std::invalid_argument);
}

TEST(EvaluatorTest, KindNamesRoundTrip) {
  for (auto k : {EvaluatorKind::fixed, EvaluatorKind::add_all, EvaluatorKind::coarse, EvaluatorKind::strict}) {
    EXPECT_EQ(evaluator_kind_from_string(to_string(k)), k);
  }
}

TEST(SuccessTest, BoundaryIsInclusive) {
  EXPECT_TRUE(success(1.0, 0.0));
  EXPECT_TRUE(success(0.0, 1.0));
  EXPECT_TRUE(success(0.0, 0.0));
  EXPECT_FALSE(success(1.0000001, 0.0));
}

TEST(EvaluatorProperty, GatesAreNested) {
  const auto strict = EvaluatorSpec::strict();
  const auto c1 = EvaluatorSpec::coarse(kCoarse1Threshold);
  const auto c2 = EvaluatorSpec::coarse(kCoarse2Threshold);
  const auto c3 = EvaluatorSpec::coarse(kCoarse3Threshold);
  const auto all = EvaluatorSpec::add_all();
  for (int i = 0; i <= 2000; ++i) {
    const double err = i * 1e-3;
    for (double truth : {-3.0, 0.0, 2.5}) {
      for (double sign : {-1.0, 1.0}) {
        const double pred = truth + sign * err;
        const bool s = evaluate(strict, pred, truth).accept;
        const bool a3 = evaluate(c3, pred, truth).accept;
        const bool a2 = evaluate(c2, pred, truth).accept;
        const bool a1 = evaluate(c1, pred, truth).accept;
        ASSERT_TRUE(!s || a3) << err;
        ASSERT_TRUE(!a3 || a2) << err;
        ASSERT_TRUE(!a2 || a1) << err;
        ASSERT_TRUE(evaluate(all, pred, truth).accept);
      }
    }
  }
}

}  // namespace
}  // namespace memlab
