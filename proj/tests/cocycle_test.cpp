#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace typeiii;

namespace {

WindowConfig with_ones(const BigInt& lo, const BigInt& hi, const std::vector<long>& ones) {
  WindowConfig w = Cylinder::zeros(lo, hi);
  for (long k : ones) w.bits()[w.offset(BigInt(k))] = 1;
  return w;
}

}  // namespace

TEST(Cocycle, Upsilon) {
  ParameterLedger L = testutil::paper(2);
  EXPECT_EQ(upsilon(L, Cylinder::parse("-2..-1:01"), 1), 1);
  EXPECT_EQ(upsilon(L, Cylinder::zeros(BigInt(-2), BigInt(-1)), 1), 0);
  WindowConfig w = Cylinder::zeros(BigInt(-518), BigInt(0));
  for (int i = 0; i < 200; ++i) w.bits()[static_cast<std::size_t>(i * 2)] = 1;
  EXPECT_EQ(upsilon(L, w, 2), 200);
  EXPECT_THROW(upsilon(L, Cylinder::parse("-1..0:00"), 1), Error);
}

TEST(Cocycle, FExponents) {
  ParameterLedger L = testutil::paper(2);
  ExponentVector v = f_exponents(L, with_ones(BigInt(-2), BigInt(0), {-1}), 1);
  EXPECT_EQ(v.e, std::vector<std::int64_t>{1});
  EXPECT_EQ(v.log_value(), Rational(1));
  WindowConfig w = Cylinder::zeros(BigInt(-518), BigInt(0));
  w.bits()[w.offset(BigInt(-1))] = 1;
  w.bits()[w.offset(BigInt(-2))] = 1;
  for (long k = -518; k < -318; ++k) w.bits()[w.offset(BigInt(k))] = 1;
  ExponentVector v2 = f_exponents(L, w, 2);
  EXPECT_EQ(v2.e, (std::vector<std::int64_t>{2, 200}));
  EXPECT_EQ(v2.log_value(), Rational(33, 4));
}

TEST(Cocycle, RnFiniteExamples) {
  ParameterLedger L = testutil::paper(2);
  IntervalValue one = rn_finite(L, Cylinder::parse("-3..0:0101"), BigInt(1));
  EXPECT_TRUE(testutil::encloses(one.enclosure(), 1.0, 1e-17));
  IntervalValue e = rn_finite(L, Cylinder::parse("-3..0:0001"), BigInt(1));
  EXPECT_TRUE(testutil::encloses(e.enclosure(), std::exp(1.0), 1e-15));
  EXPECT_TRUE(rn_finite(L, Cylinder::parse("0..0:1"), BigInt(0)).is_exact());
  EXPECT_THROW(rn_finite(L, Cylinder::parse("-1..0:01"), BigInt(1)), Error);
}

TEST(Cocycle, ExactReportWidensByTail) {
  ParameterLedger L = testutil::paper(2);
  ApproxReport r = rn_derivative(L, Cylinder::parse("-3..0:0001"), BigInt(1));
  EXPECT_EQ(r.tailBound, Rational(1, 2));
  EXPECT_LE(r.exact.logLow, r.finite.logLow - 0.5);
  EXPECT_GE(r.exact.logHigh, r.finite.logHigh + 0.5);
  EXPECT_TRUE(testutil::encloses(r.exact.enclosure(), std::exp(1.5), 0));
}

TEST(Cocycle, TelescopedInCleanRange) {
  ParameterLedger L = testutil::paper(2);
  WindowConfig w = with_ones(BigInt(-518), BigInt(6), {1, -5});
  ApproxReport r = rn_derivative(L, w, BigInt(3));
  EXPECT_EQ(r.tn, 2);
  EXPECT_TRUE(r.lemmaRange);
  EXPECT_LE(r.telescopeGap, 1e-12);
  // Upsilon_1 o T^3 reads {1, 2}; Upsilon_2 o T^3 reads [-515, -4].
  EXPECT_EQ(r.telescoped.e, (std::vector<std::int64_t>{1, 1}));
  ASSERT_TRUE(r.lemma.has_value());
  EXPECT_EQ(r.lemma->e, std::vector<std::int64_t>{1});
  EXPECT_EQ(r.lemmaGap, Rational(1, 32));
  EXPECT_EQ(r.hBound, Rational(7, 32));
  EXPECT_TRUE(r.lemmaHolds);
}

TEST(Cocycle, TelescopingHoldsOnRandomWindows) {
  ParameterLedger L = testutil::paper(2);
  MarginalSampler s(L);
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream rng(11, i);
    WindowConfig w = s.sample(BigInt(-518), BigInt(6), rng);
    for (int n = 3; n <= 6; ++n) {
      ApproxReport r = rn_derivative(L, w, BigInt(n));
      EXPECT_LE(r.telescopeGap, 1e-12);
      EXPECT_TRUE(r.lemmaHolds);
      // |Upsilon_u o T^n - Upsilon_u| <= min(n, n_u).
      for (int u = 1; u <= r.tn; ++u)
        EXPECT_LE(std::abs(r.telescoped.e[static_cast<std::size_t>(u - 1)]),
                  std::min<std::int64_t>(n, to_int64(L.level(u).n)));
      EXPECT_GT(r.finite.value.sign(), 0);
    }
  }
}

TEST(Cocycle, ChainRule) {
  ParameterLedger L = testutil::paper(2);
  WindowConfig w = Cylinder::parse("-3..3:0110101");
  ChainReport zero = chain_check(L, w, BigInt(0), BigInt(0));
  EXPECT_TRUE(zero.ok);
  EXPECT_EQ(zero.gap, Rational(0));
  MarginalSampler s(L);
  RngStream rng(5, 0);
  WindowConfig big = s.sample(BigInt(-530), BigInt(8), rng);
  ChainReport c = chain_check(L, big, BigInt(1), BigInt(1));
  EXPECT_TRUE(c.ok);
  EXPECT_LE(c.gapUpper, testutil::mid(Enclosure::from_rational(c.bound)));
}
