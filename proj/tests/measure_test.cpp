#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace typeiii;

TEST(Measure, Marginals) {
  ParameterLedger L = testutil::paper(2);
  Marginal m0 = marginal(L, BigInt(0));
  EXPECT_FALSE(m0.biased);
  EXPECT_EQ(marginal(L, BigInt(-1)), (Marginal{1, true}));
  EXPECT_EQ(marginal(L, BigInt(-2)), (Marginal{1, true}));
  EXPECT_FALSE(marginal(L, BigInt(-3)).biased);  // (-M_1, -N_1]
  EXPECT_EQ(marginal(L, BigInt(-7)), (Marginal{2, true}));
  EXPECT_EQ(marginal(L, BigInt(-518)), (Marginal{2, true}));
  EXPECT_FALSE(marginal(L, BigInt(-519)).biased);
  EXPECT_TRUE(testutil::encloses(marginal_prob(L, marginal(L, BigInt(-1)), 1), testutil::kEOverOnePlusE, 1e-16));
  Enclosure p = marginal_prob(L, marginal(L, BigInt(-7)), 0);
  EXPECT_NEAR(testutil::mid(p), 1.0 / (1.0 + std::exp(1.0 / 32)), 1e-15);
}

TEST(Measure, MarginalsSumToOne) {
  ParameterLedger L = testutil::paper(2);
  for (long k : {0L, -1L, -2L, -3L, -7L, -100L, -519L}) {
    Marginal m = marginal(L, BigInt(k));
    Enclosure s = marginal_prob(L, m, 0) + marginal_prob(L, m, 1);
    EXPECT_LE(s.width(), std::ldexp(1.0, -60));
    EXPECT_TRUE(testutil::encloses(s, 1.0, std::ldexp(1.0, -60)));
  }
}

TEST(Measure, ExhaustedBelowLastLevel) {
  ParameterLedger L = testutil::paper(1);
  try {
    marginal(L, BigInt(-7));
    FAIL();
  } catch (const LedgerExhausted& e) {
    EXPECT_EQ(e.needed_level(), 2);
  }
}

TEST(Measure, TOfN) {
  ParameterLedger L = testutil::paper(3);
  EXPECT_EQ(t_of(L, BigInt(0)), 1);
  EXPECT_EQ(t_of(L, BigInt(2)), 1);
  EXPECT_EQ(t_of(L, BigInt(3)), 2);
  EXPECT_EQ(t_of(L, BigInt(519)), 3);
  EXPECT_THROW(t_of(testutil::paper(2), BigInt(519)), LedgerExhausted);
}

TEST(Measure, CylinderProbabilities) {
  ParameterLedger L = testutil::paper(2);
  IntervalValue eighth = cylinder_prob(L, Cylinder::parse("0..2:010"));
  EXPECT_TRUE(eighth.is_exact());
  EXPECT_EQ(eighth.to_double(), 0.125);
  EXPECT_TRUE(cylinder_prob(L, Cylinder()).is_exact());
  EXPECT_EQ(cylinder_prob(L, Cylinder()).to_double(), 1.0);
  IntervalValue two = cylinder_prob(L, Cylinder::parse("-2..-1:11"));
  EXPECT_TRUE(testutil::encloses(two.enclosure(), testutil::kBiasedPairSquared, 1e-16));
}

TEST(Measure, CylinderMultiplicative) {
  ParameterLedger L = testutil::paper(2);
  Enclosure a = cylinder_prob(L, Cylinder::parse("-9..-5:10110")).enclosure();
  Enclosure b = cylinder_prob(L, Cylinder::parse("-4..2:0011010")).enclosure();
  Enclosure ab = cylinder_prob(L, Cylinder::parse("-9..2:101100011010")).enclosure();
  EXPECT_TRUE((a * b).overlaps(ab));
}

TEST(Measure, KakutaniTerms) {
  ParameterLedger L = testutil::paper(3);
  KakutaniTerm t1 = kakutani_term(L, 1);
  EXPECT_TRUE(testutil::encloses(t1.term, testutil::kKakutani1, 1e-16));
  EXPECT_TRUE(t1.consistent);
  KakutaniTerm t2 = kakutani_term(L, 2);
  EXPECT_TRUE(testutil::encloses(t2.term, testutil::kKakutani2, 1e-19));
  // 7.2899345319575406e-947 is below double range; compare the decimal exponent.
  KakutaniTerm t3 = kakutani_term(L, 3);
  EXPECT_EQ(t3.term.mid().to_string(8), "7.2899345e-947");
  EXPECT_TRUE(t3.consistent);
}

TEST(Measure, ApproximateByCylinder) {
  ParameterLedger L = testutil::paper(2);
  Cylinder A = Cylinder::parse("-1..1:101");
  EXPECT_EQ(approximate_by_cylinder(L, {A}, Rational(1, 10)), A);
  // Six of the eight configurations on {-1, 0, 1}.
  CylinderUnion six = {Cylinder::parse("-1..0:00"), Cylinder::parse("-1..0:01"), Cylinder::parse("-1..0:10")};
  Cylinder B = approximate_by_cylinder(L, six, Rational(1, 5));
  EnumeratedEvent inside = brute_event_prob(L, BigInt(-1), BigInt(1), [&](const WindowConfig& w) {
    if (!w.satisfies(B)) return false;
    for (const auto& c : six)
      if (w.satisfies(c)) return true;
    return false;
  });
  Enclosure ratio = inside.bounds / cylinder_prob(L, B).enclosure();
  EXPECT_GT(ratio.lo().to_double(MPFR_RNDD), 0.8);
  EXPECT_THROW(approximate_by_cylinder(L, {}, Rational(1, 5)), Error);
}

TEST(Measure, CoordinateMeasureMatchesCylinders) {
  ParameterLedger L = testutil::paper(2);
  CoordinateMeasure cm(L, BigInt(-9), BigInt(0));
  for (std::uint64_t mask : {0ull, 5ull, 777ull, 1023ull}) {
    Cylinder c = Cylinder::zeros(BigInt(-9), BigInt(0));
    for (std::size_t i = 0; i < 10; ++i) c.bits()[i] = (mask >> i) & 1u;
    EXPECT_TRUE(cm.prob(mask).enclosure().overlaps(cylinder_prob(L, c).enclosure()));
  }
}

TEST(Measure, PrecisionSetting) {
  int before = precision_bits();
  set_precision_bits(256);
  ParameterLedger L = testutil::paper(1);
  Enclosure p = marginal_prob(L, marginal(L, BigInt(-1)), 1);
  EXPECT_LT(p.width(), 1e-70);
  set_precision_bits(before);
  EXPECT_THROW(set_precision_bits(8), Error);
}
