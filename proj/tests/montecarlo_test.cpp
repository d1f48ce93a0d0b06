#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace typeiii;

TEST(Rng, PhiloxKnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Rng, StreamsAreDeterministicAndRandomAccess) {
  RngStream a(7, 3), b(7, 3), c(7, 4);
  std::vector<std::uint64_t> xs;
  for (int i = 0; i < 10; ++i) xs.push_back(a.next());
  for (int i = 9; i >= 0; --i) EXPECT_EQ(b.word(static_cast<std::uint64_t>(i)), xs[static_cast<std::size_t>(i)]);
  EXPECT_NE(c.next(), xs[0]);
  for (int i = 0; i < 100; ++i) {
    double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(a.below(7), 7u);
  }
}

TEST(Sampler, BiasedCoordinateFrequency) {
  ParameterLedger L = testutil::paper(2);
  MarginalSampler s(L);
  const int trials = 20000;
  int ones = 0, fair = 0;
  for (int i = 0; i < trials; ++i) {
    RngStream rng(1, static_cast<std::uint64_t>(i));
    WindowConfig w = s.sample(BigInt(-1), BigInt(0), rng);
    ones += w.at(BigInt(-1));
    fair += w.at(BigInt(0));
  }
  const double p = testutil::kEOverOnePlusE;
  EXPECT_NEAR(static_cast<double>(ones) / trials, p, 3 * std::sqrt(p * (1 - p) / trials));
  EXPECT_NEAR(static_cast<double>(fair) / trials, 0.5, 3 * std::sqrt(0.25 / trials));
}

TEST(Sampler, SegmentedWindowMergesRanges) {
  auto m = SegmentedWindow::merge({{BigInt(5), BigInt(8)}, {BigInt(-3), BigInt(0)}, {BigInt(1), BigInt(2)}, {BigInt(9), BigInt(7)}});
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], std::make_pair(BigInt(-3), BigInt(2)));
  EXPECT_EQ(m[1], std::make_pair(BigInt(5), BigInt(8)));
  ParameterLedger L = testutil::paper(2);
  RngStream rng(2, 0);
  SegmentedWindow w = SegmentedWindow::sample(MarginalSampler(L), m, rng);
  w.assign(Cylinder::parse("6..7:11"));
  EXPECT_TRUE(w.satisfies(Cylinder::parse("6..7:11")));
  EXPECT_THROW(w.count_ones(BigInt(2), BigInt(5)), Error);
}

TEST(Wilson, KnownIntervals) {
  WilsonInterval w = wilson(5, 10);
  EXPECT_NEAR(w.low, 0.236593, 1e-6);
  EXPECT_NEAR(w.high, 0.763407, 1e-6);
  EXPECT_EQ(wilson(0, 10).low, 0.0);
  EXPECT_EQ(wilson(10, 10).high, 1.0);
  EXPECT_GT(wilson(1, 10).low, 0.0);
}

TEST(RatioScan, IdentityAtTimeZero) {
  ParameterLedger L = testutil::paper(2);
  RatioScanResult r =
      ratio_set_scan(L, {Cylinder::parse("-1..1:101")}, RatioTarget::value(Rational(1)), Rational(1, 20), {BigInt(0)}, 1000, 7);
  EXPECT_EQ(r.verdict, Verdict::Evidence);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].indeterminate, 0u);
  const double p = 0.25 * testutil::kEOverOnePlusE;
  EXPECT_NEAR(r.rows[0].estimate, p, 4 * std::sqrt(p * (1 - p) / 1000));
}

TEST(RatioScan, MatchesOracleForLambda1) {
  // A = {w_10 = 1}; at n = 1 the derivative is e^{w_0 - w_{-2}} up to e^{+-1/2}.
  ParameterLedger L = testutil::paper(2);
  const std::uint64_t trials = 4000;
  RatioScanResult r = ratio_set_scan(L, {Cylinder::parse("10..10:1")}, RatioTarget::lambda(L, 1), Rational(3, 5),
                                     {BigInt(1)}, trials, 11);
  EnumeratedEvent ev = brute_event_prob(L, BigInt(-2), BigInt(0), [](const WindowConfig& w) {
    return w.at(BigInt(0)) == 1 && w.at(BigInt(-2)) == 0;
  });
  const double p = 0.25 * testutil::mid(ev.bounds);
  EXPECT_NEAR(p, 0.25 * testutil::kHalfOverOnePlusE, 1e-15);
  // w_0 = w_{-2} straddles the band edge and is never counted as a hit.
  EXPECT_GT(r.rows[0].indeterminate, 0u);
  EXPECT_NEAR(r.rows[0].estimate, p, 4 * std::sqrt(p * (1 - p) / static_cast<double>(trials)));
  EXPECT_LE(r.rows[0].wilsonLow, p);
  EXPECT_GE(r.rows[0].wilsonHigh, p);
}

TEST(RatioScan, NarrowBandIsIndeterminate) {
  ParameterLedger L = testutil::paper(2);
  RatioScanResult r = ratio_set_scan(L, {Cylinder::parse("10..10:1")}, RatioTarget::lambda(L, 1), Rational(1, 10),
                                     {BigInt(1)}, 500, 11);
  EXPECT_EQ(r.rows[0].hits, 0u);
  EXPECT_GT(r.rows[0].indeterminate, 0u);
  EXPECT_EQ(r.verdict, Verdict::NoEvidence);
}

TEST(RatioScan, FarTargetHasNoEvidence) {
  ParameterLedger L = testutil::paper(2);
  RatioScanResult r = ratio_set_scan(L, {Cylinder::parse("0..0:1")}, RatioTarget::value(Rational(1000000)),
                                     Rational(1, 20), {BigInt(0), BigInt(1), BigInt(2)}, 500, 7);
  EXPECT_EQ(r.verdict, Verdict::NoEvidence);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.hits, 0u);
    EXPECT_EQ(row.indeterminate, 0u);
  }
  std::string csv = scan_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,hits,indeterminate,trials,estimate,wilson_low,wilson_high");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(RatioScan, RejectsBadInput) {
  ParameterLedger L = testutil::paper(2);
  RatioTarget one = RatioTarget::value(Rational(1));
  EXPECT_THROW(ratio_set_scan(L, {}, one, Rational(1), {BigInt(0)}, 10, 1), Error);
  EXPECT_THROW(ratio_set_scan(L, {Cylinder::parse("0..0:1")}, one, Rational(1), {}, 10, 1), Error);
  EXPECT_THROW(ratio_set_scan(L, {Cylinder::parse("0..0:1")}, one, Rational(1), {BigInt(0)}, 0, 1), Error);
  EXPECT_THROW(RatioTarget::value(Rational(-1)), Error);
}

namespace {

struct ReturnFixture {
  ParameterLedger L = evc_toy_ledger();
  Cylinder c;
  WindowConfig w;

  ReturnFixture() {
    const BigInt N2 = L.level(2).N;
    c = Cylinder::zeros(BigInt(1) - N2, BigInt(0));
    c.bits()[c.offset(BigInt(-1))] = 1;
    for (long k = -38; k < -28; ++k) c.bits()[c.offset(BigInt(k))] = 1;
    w = Cylinder::zeros(BigInt(1) - L.level(3).N, BigInt(39 * 100 + 1));
    std::copy(c.bits().begin(), c.bits().end(), w.bits().begin() + static_cast<std::ptrdiff_t>(w.offset(c.lo())));
  }

  void place(long l) {
    DCylinder D = build_D(L, make_good_cylinder(L, c, 2), 1, BigInt(l));
    std::copy(D.d.bits().begin(), D.d.bits().end(), w.bits().begin() + static_cast<std::ptrdiff_t>(w.offset(D.d.lo())));
  }
};

}  // namespace

TEST(FirstReturn, FindsConstructedBlock) {
  ReturnFixture f;
  f.place(3);
  auto r = first_return_search(f.L, f.w, Cylinder(), 1, Rational(1, 32), 2);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->l, 3);
  EXPECT_EQ(r->phi, 3 * 39);
  EXPECT_TRUE(testutil::encloses(r->derivative.enclosure(), std::exp(1.0), 1e-12));
}

TEST(FirstReturn, ReturnsTheLeastBlock) {
  ReturnFixture f;
  f.place(7);
  f.place(2);
  auto r = first_return_search(f.L, f.w, Cylinder(), 1, Rational(1, 32), 2);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->l, 2);
}

TEST(FirstReturn, NoneWithoutABlock) {
  ReturnFixture f;
  EXPECT_FALSE(first_return_search(f.L, f.w, Cylinder(), 1, Rational(1, 32), 2).has_value());
  // The centered B = {w_0 = 1} never recurs on an all-zero future.
  EXPECT_FALSE(first_return_search(f.L, f.w, Cylinder::parse("0..0:1"), 1, Rational(1, 32), 2).has_value());
  EXPECT_THROW(first_return_search(f.L, f.w, Cylinder::parse("0..1:11"), 1, Rational(1, 32), 2), Error);
}
