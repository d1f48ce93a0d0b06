#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace typeiii;

TEST(Oracle, FairPairIsUniform) {
  ParameterLedger L = testutil::paper(2);
  auto all = enumerate_window(L, BigInt(0), BigInt(1));
  ASSERT_EQ(all.size(), 4u);
  for (const auto& [w, p] : all) {
    EXPECT_TRUE(p.is_exact());
    EXPECT_EQ(p.to_double(), 0.25);
  }
}

TEST(Oracle, BiasedPair) {
  ParameterLedger L = testutil::paper(2);
  auto all = enumerate_window(L, BigInt(-2), BigInt(-1));
  double q = 1.0 / (1.0 + std::exp(1.0)), p = 1.0 - q;
  std::vector<double> expect = {q * q, p * q, q * p, p * p};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(all[i].second.to_double(), expect[i], 1e-16);
  EXPECT_TRUE(testutil::encloses(total_mass(L, BigInt(-2), BigInt(-1)), 1.0, 0));
}

TEST(Oracle, CapIsEnforced) {
  ParameterLedger L = testutil::paper(2);
  try {
    enumerate_window(L, BigInt(0), BigInt(30));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowTooLarge);
  }
}

TEST(Oracle, EventProbabilities) {
  ParameterLedger L = testutil::paper(2);
  EnumeratedEvent t = brute_event_prob(L, BigInt(-3), BigInt(0), [](const WindowConfig&) { return true; });
  EXPECT_TRUE(testutil::encloses(t.bounds, 1.0, 0));
  EnumeratedEvent ev = brute_event_prob(L, BigInt(-2), BigInt(0), [](const WindowConfig& w) {
    return w.at(BigInt(0)) == 1 && w.at(BigInt(-2)) == 0;
  });
  EXPECT_TRUE(testutil::encloses(ev.bounds, testutil::kHalfOverOnePlusE, 1e-16));
  EnumeratedEvent fair = brute_event_prob(L, BigInt(0), BigInt(3), [](const WindowConfig& w) { return w.count_ones(BigInt(0), BigInt(3)) == 2; });
  ASSERT_TRUE(fair.count.has_value());
  EXPECT_EQ(*fair.count, 6);
  EXPECT_EQ(fair.prob.to_double(), 6.0 / 16);
}

TEST(Oracle, NormalizationOnMixedWindows) {
  ParameterLedger L = testutil::paper(2);
  for (auto [lo, hi] : {std::pair{-20L, -1L}, std::pair{-10L, 5L}, std::pair{-23L, 0L}}) {
    Enclosure m = total_mass(L, BigInt(lo), BigInt(hi));
    EXPECT_TRUE(testutil::encloses(m, 1.0, std::ldexp(1.0, -40)));
  }
}

TEST(Oracle, DerivativeEventMatchesTelescoping) {
  // rn_finite(w, 1) in e^{1 +- 0.01} exactly when w_0 - w_{-2} = 1.
  ParameterLedger L = testutil::paper(2);
  Enclosure lo = Enclosure::from_double(0.99).exp(), hi = Enclosure::from_double(1.01).exp();
  EnumeratedEvent byRn = brute_event_prob(L, BigInt(-3), BigInt(0), [&](const WindowConfig& w) {
    Enclosure v = rn_finite(L, w, BigInt(1)).enclosure();
    return v.above(lo) && v.below(hi);
  });
  EnumeratedEvent byCount = brute_event_prob(L, BigInt(-3), BigInt(0), [](const WindowConfig& w) {
    return w.at(BigInt(0)) - w.at(BigInt(-2)) == 1;
  });
  EXPECT_TRUE(byRn.bounds.overlaps(byCount.bounds));
  EXPECT_LT(byRn.bounds.width(), 1e-15);
}

TEST(Oracle, CylinderProbMatchesEnumeration) {
  ParameterLedger L = testutil::paper(2);
  for (const char* text : {"-9..-2:10110011", "-3..2:010011", "-12..-8:11111"}) {
    Cylinder c = Cylinder::parse(text);
    EnumeratedEvent ev = brute_event_prob(L, c.lo(), c.hi(), [&](const WindowConfig& w) { return w.satisfies(c); });
    EXPECT_TRUE(ev.bounds.overlaps(cylinder_prob(L, c).enclosure())) << text;
  }
}
