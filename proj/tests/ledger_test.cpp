#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace typeiii;

TEST(Ledger, BaseLevelIsFixed) {
  ParameterLedger L = testutil::paper(1);
  const LevelParams& lv = L.level(1);
  EXPECT_EQ(lv.k, 0);
  EXPECT_EQ(lv.n, 2);
  EXPECT_EQ(lv.N, 3);
  EXPECT_EQ(lv.m, HugeInt(4L));
  EXPECT_EQ(lv.M, HugeInt(7L));
  EXPECT_EQ(lv.log_lambda(), Rational(1));
}

TEST(Ledger, SecondLevel) {
  ParameterLedger L = testutil::paper(2);
  const LevelParams& lv = L.level(2);
  EXPECT_EQ(lv.k, 5);
  EXPECT_EQ(lv.log_lambda(), Rational(1, 32));
  EXPECT_EQ(lv.n, 512);
  EXPECT_EQ(lv.N, 519);
  EXPECT_EQ(lv.m, HugeInt(BigInt(519) * (2 + pow2(1557))));
  EXPECT_EQ(lv.M, HugeInt(BigInt(519) * (2 + pow2(1557)) + 519));
  EXPECT_EQ(L.E(1), 2);
}

TEST(Ledger, MinimalKAndLambdaConstraint) {
  ParameterLedger L = testutil::paper(3);
  for (int t = 2; t <= 3; ++t) {
    const LevelParams& lv = L.level(t);
    BigInt Mp = L.M_prev(t).inline_value();
    EXPECT_LT(Rational(Mp), lv.epsilon * Rational(pow2(static_cast<std::uint64_t>(lv.k))));
    EXPECT_GE(Rational(Mp), lv.epsilon * Rational(pow2(static_cast<std::uint64_t>(lv.k - 1))));
    EXPECT_GT(lv.k, L.level(t - 1).k);
    EXPECT_TRUE(lv.N > L.level(t - 1).N);
  }
}

TEST(Ledger, LambdaPowersAgree) {
  ParameterLedger L = testutil::paper(3);
  for (int t = 2; t <= 3; ++t)
    for (int u = 1; u < t; ++u)
      EXPECT_EQ(Rational(pow2(static_cast<std::uint64_t>(L.level(t).k - L.level(u).k))) * L.level(t).log_lambda(),
                L.level(u).log_lambda());
}

TEST(Ledger, PropertyStarMinimum) {
  ParameterLedger L = testutil::paper(2);
  std::vector<LevelParams> one(L.levels.begin(), L.levels.begin() + 1);
  EXPECT_EQ(min_n_for_property_star(one, 5), 512);
  try {
    min_n_for_property_star(one, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonIncreasingK);
  }
  ParameterLedger L3 = testutil::paper(3);
  std::vector<LevelParams> two(L3.levels.begin(), L3.levels.begin() + 2);
  const std::int64_t k3 = L3.level(3).k;
  BigInt expect = 8 * (2 * pow2(static_cast<std::uint64_t>(k3)) + 512 * pow2(static_cast<std::uint64_t>(k3 - 5)));
  EXPECT_EQ(min_n_for_property_star(two, k3), expect);
  EXPECT_EQ(L3.level(3).n, expect);
}

TEST(Ledger, ConstraintWitnesses) {
  ConstraintReport rep = check_constraints(testutil::paper(2));
  EXPECT_TRUE(rep.all_hold());
  const ConstraintEntry* lam = rep.find(kLambdaConstraint, 2);
  ASSERT_NE(lam, nullptr);
  EXPECT_EQ(lam->witness, "7/32 < 1/4");
  EXPECT_EQ(rep.find(kLambdaConstraint, 1)->status, ConstraintStatus::NotApplicable);
}

TEST(Ledger, ToyOverrideRecordsRelaxation) {
  Overrides ov;
  ov[1].m = BigInt(6);
  ParameterLedger L = build_ledger(EpsilonSpec::parse("explicit:1/2"), 1, LedgerMode::Toy, ov);
  EXPECT_EQ(L.level(1).M, HugeInt(9L));
  ASSERT_EQ(L.relaxations.size(), 1u);
  EXPECT_EQ(L.relaxations[0].constraint, kMConstraint);
  ConstraintReport rep = check_constraints(L);
  const ConstraintEntry* m = rep.find(kMConstraint, 1);
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->status, ConstraintStatus::Violated);
  EXPECT_NE(m->witness.find("expected 1542, got 6"), std::string::npos);
}

TEST(Ledger, OverrideRejectedInPaperMode) {
  Overrides ov;
  ov[2].n = BigInt(16);
  try {
    build_ledger(EpsilonSpec::parse("geometric:1/2"), 2, LedgerMode::Paper, ov);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstraintViolation);
  }
}

TEST(Ledger, ToyMMustBeMultipleOfN) {
  Overrides ov;
  ov[2].m = BigInt(100);
  EXPECT_THROW(build_ledger(EpsilonSpec::parse("explicit:1/2,4"), 2, LedgerMode::Toy, ov), Error);
}

TEST(Ledger, JsonRoundTrip) {
  for (const ParameterLedger& L : {testutil::paper(3), evc_toy_ledger()}) {
    nlohmann::json j = to_json(L);
    EXPECT_EQ(j["schema"], "ledger-v1");
    ParameterLedger back = ledger_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_TRUE(back == L);
  }
}

TEST(Ledger, FourthPaperLevelIsNotRepresentable) {
  try {
    testutil::paper(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Representability);
  }
}

TEST(Ledger, EpsilonSpecParsing) {
  EXPECT_EQ(EpsilonSpec::parse("geometric:1/2").at(3), Rational(1, 8));
  EpsilonSpec ex = EpsilonSpec::parse("explicit:1/2,4,1/64");
  EXPECT_EQ(ex.at(2), Rational(4));
  EXPECT_EQ(ex.tail_after(1), Rational(4) + Rational(1, 64));
  EXPECT_EQ(ex.tail_after(3), Rational(0));
  EXPECT_THROW(EpsilonSpec::parse("geometric:3/2"), Error);
  EXPECT_THROW(EpsilonSpec::parse("explicit:1,-1"), Error);
}
