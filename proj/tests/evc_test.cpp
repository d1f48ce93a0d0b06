#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace typeiii;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

Cylinder level2_cylinder(const ParameterLedger& L, const std::vector<long>& ones) {
  Cylinder c = Cylinder::zeros(BigInt(1) - L.level(2).N, BigInt(0));
  for (long k : ones) c.bits()[c.offset(BigInt(k))] = 1;
  return c;
}

std::vector<long> run(long from, long count) {
  std::vector<long> v;
  for (long i = 0; i < count; ++i) v.push_back(from + i);
  return v;
}

ParameterLedger toy_blocks(long blocks) {
  Overrides ov;
  ov[2].m = BigInt(39 * blocks);
  ov[3].n = BigInt(64);
  return build_ledger(EpsilonSpec::parse("explicit:1/2,4,1/64"), 3, LedgerMode::Toy, ov);
}

}  // namespace

TEST(Evc, FindP) {
  ParameterLedger L = testutil::paper(2);
  EXPECT_EQ(find_p(L, 2, Rational(-1)), BigInt(-32));
  EXPECT_EQ(find_p(L, 2, Rational(0)), BigInt(0));
  EXPECT_EQ(find_p(L, 2, Rational(3, 32)), BigInt(3));
  EXPECT_EQ(kind_of([&] { find_p(L, 2, Rational(1, 3)); }), ErrorKind::NotLambdaPower);
  EXPECT_EQ(kind_of([&] { find_p(L, 2, Rational(4)); }), ErrorKind::PropertyStarRange);
  EXPECT_EQ(find_p(L, 2, Rational(127, 32)), BigInt(127));
}

TEST(Evc, CtMembership) {
  ParameterLedger L = testutil::paper(2);
  EXPECT_TRUE(in_C_t(L, level2_cylinder(L, run(-518, 200)), 2).member);
  CtMembership low = in_C_t(L, level2_cylinder(L, run(-518, 100)), 2);
  EXPECT_FALSE(low.member);
  EXPECT_EQ(low.upsilonT, 100);
  EXPECT_TRUE(in_C_t(L, level2_cylinder(L, run(-518, 128)), 2).member);
  EXPECT_TRUE(in_C_t(L, level2_cylinder(L, run(-518, 384)), 2).member);
  EXPECT_FALSE(in_C_t(L, level2_cylinder(L, run(-518, 385)), 2).member);
  EXPECT_FALSE(in_C_t(L, level2_cylinder(L, run(-518, 127)), 2).member);
  EXPECT_EQ(kind_of([&] { in_C_t(L, Cylinder::parse("0..0:0"), 2); }), ErrorKind::CylinderShape);
  EXPECT_EQ(kind_of([&] { make_good_cylinder(L, level2_cylinder(L, run(-518, 100)), 2); }), ErrorKind::InvalidArgument);
}

TEST(Evc, BuildDMatchesHandComputation) {
  Overrides ov;
  ov[2].m = BigInt(519 * 4);
  ParameterLedger L = build_ledger(EpsilonSpec::parse("explicit:1/2,1/4"), 2, LedgerMode::Toy, ov);
  ASSERT_EQ(L.level(2).k, 5);
  ASSERT_EQ(L.level(2).n, 512);
  std::vector<long> ones = run(-518, 200);
  ones.push_back(-1);
  Cylinder c = level2_cylinder(L, ones);
  GoodCylinder gc = make_good_cylinder(L, c, 2);
  DCylinder D = build_D(L, gc, 1, BigInt(2));
  // log lambda_1 + Upsilon_1(c) = 2, i.e. lambda_2^64.
  EXPECT_EQ(D.pExponent, 64);
  EXPECT_EQ(D.ones, 264);
  EXPECT_EQ(D.d.lo(), 520);
  EXPECT_EQ(D.d.hi(), 1038);
  EXPECT_EQ(D.d.count_ones(BigInt(520), BigInt(1038)), 264);
  EXPECT_EQ(D.d.count_ones(BigInt(520), BigInt(783)), 264);
  EXPECT_TRUE(verify_D(L, D, c));
  IntervalValue p = cylinder_prob(L, D.d);
  EXPECT_TRUE(p.is_exact());
  EXPECT_TRUE(p.enclosure().contains(Enclosure::dyadic(1, 519)));

  EXPECT_EQ(kind_of([&] { build_D(L, gc, 1, BigInt(1)); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { build_D(L, gc, 1, BigInt(5)); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { build_D(L, gc, 2, BigInt(2)); }), ErrorKind::InvalidArgument);
}

TEST(Evc, ShiftedBIsFair) {
  ParameterLedger L = evc_toy_ledger();
  Cylinder B = Cylinder::parse("-2..2:10110");
  for (long l = 2; l <= 100; l += 7) {
    IntervalValue p = cylinder_prob(L, B.shifted_by(BigInt(-39 * l)));
    EXPECT_TRUE(p.is_exact());
    EXPECT_EQ(p.to_double(), std::ldexp(1.0, -5));
  }
}

TEST(Evc, ToyExperimentPasses) {
  ParameterLedger L = evc_toy_ledger();
  ExperimentReport rep = evc_experiment(L, Cylinder::parse("0..0:0"), 1, evc_toy_eps(), 2);
  EXPECT_EQ(rep.method, "exact");
  EXPECT_EQ(rep.blocks, 100);
  EXPECT_TRUE(testutil::encloses(rep.pB, 0.5, 0));
  EXPECT_TRUE(rep.meetsPrediction);
  EXPECT_TRUE(rep.predictionAbove09);
  EXPECT_TRUE(rep.unionAbove09);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(testutil::mid(rep.unionProb), 0.461104, 1e-6);
  EXPECT_LT(rep.unionProb.width(), 1e-12);
  ASSERT_EQ(rep.rows.size(), 100u);
  // Pooling the per-block rate over strata overstates the union.
  EXPECT_GT(testutil::mid(rep.pooledPrediction), testutil::mid(rep.unionProb));
  nlohmann::json j = to_json(rep);
  EXPECT_EQ(j.at("method"), "exact");
  EXPECT_FALSE(j.contains("trials"));
}

TEST(Evc, EverythingHitsWithAWideBand) {
  ParameterLedger L = evc_toy_ledger();
  ExperimentReport rep = evc_experiment(L, Cylinder(), 1, Rational(1000), 2);
  EXPECT_EQ(rep.method, "exact");
  EXPECT_TRUE(testutil::encloses(rep.unionProb, 1.0, 1e-12));
  EXPECT_TRUE(testutil::encloses(rep.blockHit, 1.0, 1e-12));
}

TEST(Evc, MonotoneInBandAndBlocks) {
  ParameterLedger L = evc_toy_ledger();
  Cylinder B = Cylinder::parse("0..0:1");
  double prev = -1;
  for (Rational eps : {Rational(3, 4), Rational(5, 4), Rational(9, 4)}) {
    ExperimentReport rep = evc_experiment(L, B, 1, eps, 2, {EvcOptions::Method::Exact});
    double u = testutil::mid(rep.unionProb);
    EXPECT_GE(u, prev);
    prev = u;
  }
  prev = -1;
  for (long blocks : {5L, 20L, 80L}) {
    ExperimentReport rep = evc_experiment(toy_blocks(blocks), B, 1, Rational(5, 4), 2, {EvcOptions::Method::Exact});
    double u = testutil::mid(rep.unionProb);
    EXPECT_GT(u, prev);
    prev = u;
  }
}

TEST(Evc, ExactAgreesWithDirectFirstReturnSampling) {
  // The union event is "w in B and some block l >= 2 returns to B with the right
  // derivative", which first_return_search decides for a single sampled point.
  ParameterLedger L = toy_blocks(20);
  Cylinder B = Cylinder::parse("-1..1:010");
  ExperimentReport rep = evc_experiment(L, B, 1, Rational(5, 4), 2, {EvcOptions::Method::Exact});
  MarginalSampler s(L);
  const BigInt lo = BigInt(1) - L.level(3).N, hi(39 * 20 + 2);
  const int trials = 1500;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    RngStream rng(99, static_cast<std::uint64_t>(i));
    WindowConfig w = s.sample(lo, hi, rng);
    for (std::size_t b = 0; b < B.size(); ++b) w.bits()[w.offset(B.lo() + static_cast<long>(b))] = B.bits()[b];
    if (first_return_search(L, w, B, 1, Rational(5, 4), 2)) ++hits;
  }
  const double pB = testutil::mid(rep.pB);
  const double expect = testutil::mid(rep.unionProb) / pB;
  const double sigma = std::sqrt(expect * (1 - expect) / trials);
  EXPECT_NEAR(static_cast<double>(hits) / trials, expect, 4 * sigma + 1e-9);
}

TEST(Evc, MonteCarloAgreesWithExact) {
  ParameterLedger L = toy_blocks(20);
  Cylinder B = Cylinder::parse("0..0:0");
  ExperimentReport ex = evc_experiment(L, B, 1, Rational(9, 4), 2, {EvcOptions::Method::Exact});
  ExperimentReport mc = evc_experiment(L, B, 1, Rational(9, 4), 2, {EvcOptions::Method::MonteCarlo, 1500, 3});
  EXPECT_EQ(mc.method, "montecarlo");
  EXPECT_TRUE(mc.unionProb.overlaps(ex.unionProb));
  EXPECT_NEAR(testutil::mid(mc.prediction), testutil::mid(ex.prediction), 0.05);
  ExperimentReport again = evc_experiment(L, B, 1, Rational(9, 4), 2, {EvcOptions::Method::MonteCarlo, 1500, 3});
  EXPECT_TRUE(mpfr_equal_p(again.unionProb.lo().get(), mc.unionProb.lo().get()));
}

TEST(Evc, Preconditions) {
  ParameterLedger L = evc_toy_ledger();
  Cylinder B = Cylinder::parse("0..0:0");
  EXPECT_EQ(kind_of([&] { evc_experiment(L, B, 2, evc_toy_eps(), 2); }), ErrorKind::InvalidArgument);
  EXPECT_THROW(evc_experiment(L, B, 1, evc_toy_eps(), 3), LedgerExhausted);
  EXPECT_EQ(kind_of([&] { evc_experiment(L, Cylinder::parse("0..1:00"), 1, evc_toy_eps(), 2); }), ErrorKind::CylinderShape);
  EXPECT_EQ(kind_of([&] { evc_experiment(L, Cylinder::zeros(BigInt(-20), BigInt(20)), 1, evc_toy_eps(), 2); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { evc_experiment(L, B, 1, Rational(1, 2), 2, {EvcOptions::Method::Exact}); }),
            ErrorKind::Infeasible);
}

TEST(Evc, PaperModeIsInfeasible) {
  try {
    evc_experiment(testutil::paper(3), Cylinder::parse("0..0:0"), 1, Rational(1, 20), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
    EXPECT_NE(std::string(e.what()).find("blocks"), std::string::npos);
  }
}
