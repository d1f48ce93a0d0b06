#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "typeiii/evc.hpp"
#include "typeiii/oracle.hpp"

namespace typeiii {

struct VerifyConfig {
  std::uint64_t seed = 7;
  int tmax = 3;  // paper ledger depth for the cocycle suites (clamped to [2, 3])
};

struct SuiteResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;  // wall time; never serialized
  double limit = 0.0;    // runtime budget in seconds
};

/// Toy ledger for the block experiments: eps = (1/2, 4, 1/64), so N_2 = 39,
/// m_2 = 100 N_2 and a small level 3 that only bounds the next term.
inline ParameterLedger evc_toy_ledger() {
  Overrides ov;
  ov[2].m = BigInt(39 * 100);
  ov[3].n = BigInt(64);
  return build_ledger(EpsilonSpec::parse("explicit:1/2,4,1/64"), 3, LedgerMode::Toy, ov);
}

inline const Rational& evc_toy_eps() {
  static const Rational eps(9, 4);
  return eps;
}

namespace detail {

inline int cocycle_depth(const VerifyConfig& cfg) { return std::clamp(cfg.tmax, 2, 3); }

inline ParameterLedger paper_ledger(int tmax) {
  return build_ledger(EpsilonSpec::parse("geometric:1/2"), tmax, LedgerMode::Paper);
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Stream ids are namespaced per suite so suites do not share draws.
inline std::uint64_t stream_id(int suite, std::uint64_t i) { return (static_cast<std::uint64_t>(suite) << 48) | i; }

}  // namespace detail

inline SuiteResult verify_base(const VerifyConfig&) {
  SuiteResult r{1, "base-case", false, "", 0, 1};
  ParameterLedger L = detail::paper_ledger(1);
  const LevelParams& lv = L.level(1);
  bool ok = lv.k == 0 && lv.n == 2 && lv.N == 3 && lv.m == HugeInt(4L) && lv.M == HugeInt(7L);
  r.pass = ok;
  r.detail = "lambda_1=e^(1/2^" + std::to_string(lv.k) + ") n_1=" + to_decimal(lv.n) + " N_1=" + to_decimal(lv.N) +
             " m_1=" + lv.m.to_string() + " M_1=" + lv.M.to_string();
  return r;
}

inline SuiteResult verify_constraints(const VerifyConfig&) {
  SuiteResult r{2, "constraints", false, "", 0, 5};
  ParameterLedger L = detail::paper_ledger(3);
  ConstraintReport rep = check_constraints(L);
  bool ok = rep.all_hold();
  for (int t = 2; t <= 3; ++t) {
    const ConstraintEntry* lam = rep.find(kLambdaConstraint, t);
    const ConstraintEntry* m = rep.find(kMConstraint, t);
    ok = ok && lam && lam->status == ConstraintStatus::Holds && m && m->status == ConstraintStatus::Holds;
    // m_t = N_t (2 + 2^{3 N_t}) recomputed directly.
    const LevelParams& lv = L.level(t);
    if (lv.m.is_inline()) {
      BigInt expect = lv.N * (2 + pow2(static_cast<std::uint64_t>(to_int64(3 * lv.N))));
      ok = ok && lv.m.inline_value() == expect;
    }
  }
  r.pass = ok;
  auto size = [](const HugeInt& h) {
    std::string bits = to_decimal(h.bit_length());
    return bits.size() <= 20 ? bits + " bits" : "a " + std::to_string(bits.size()) + "-digit number of bits";
  };
  r.detail = std::to_string(rep.entries.size()) + " entries; m_2 has " + size(L.level(2).m) + ", m_3 has " +
             size(L.level(3).m);
  for (const auto& e : rep.entries)
    if (e.status == ConstraintStatus::Violated) r.detail += "; violated " + e.name + " t=" + std::to_string(e.level);
  return r;
}

inline SuiteResult verify_telescoping(const VerifyConfig& cfg) {
  SuiteResult r{3, "telescoping", false, "", 0, 30};
  ParameterLedger L = detail::paper_ledger(detail::cocycle_depth(cfg));
  MarginalSampler sampler(L);
  const BigInt lo = BigInt(1) - L.level(2).N;
  double worst = 0.0;
  int failures = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    RngStream rng(cfg.seed, detail::stream_id(3, i));
    WindowConfig w = sampler.sample(lo, BigInt(6), rng);
    for (int n = 3; n <= 6; ++n) {
      ApproxReport a = rn_derivative(L, w, BigInt(n));
      worst = std::max(worst, a.telescopeGap);
      if (!(a.telescopeGap <= 1e-12)) ++failures;
    }
  }
  r.pass = failures == 0;
  r.detail = "4000 checks, worst gap " + detail::fmt_double(worst) + ", failures " + std::to_string(failures);
  return r;
}

/// Toy ledger for the tail suite: n_2 = 16, so N_2 = 23 and the coordinates
/// [-22, -3] between -N_2 and -N_1 are enumerated exhaustively.
inline ParameterLedger tail_toy_ledger() {
  Overrides ov;
  ov[2].n = BigInt(16);
  return build_ledger(EpsilonSpec::parse("geometric:1/2"), 3, LedgerMode::Toy, ov);
}

inline SuiteResult verify_tail(const VerifyConfig&) {
  SuiteResult r{4, "tail-bound", false, "", 0, 60};
  ParameterLedger L = tail_toy_ledger();
  const std::int64_t N1 = to_int64(L.level(1).N), N2 = to_int64(L.level(2).N);
  const BigInt a(static_cast<long>(1 - N2)), b(static_cast<long>(-N1));
  const std::size_t len = static_cast<std::size_t>(N2 - N1);
  const Enclosure bound = Enclosure::from_rational(L.tail_after(1));
  std::uint64_t checked = 0, failures = 0;
  double worst = 0.0;
  for (long n = 1; n < N1; ++n) {
    // Extra factor prod_{k in [a, b]} P_{k-n}(w_k) / P_k(w_k), as a symbolic log.
    auto prof = marginal_profile(L, a - n, b);
    std::vector<std::int16_t> num(len), den(len);
    for (std::size_t i = 0; i < len; ++i) {
      num[i] = prof[i];
      den[i] = prof[i + static_cast<std::size_t>(n)];
    }
    std::map<LogForm, bool> seen;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << len); ++mask) {
      LogForm f(L.t_max());
      for (std::size_t i = 0; i < len; ++i) {
        if (num[i] == den[i]) continue;
        int bit = static_cast<int>((mask >> i) & 1u);
        f.add(num[i], bit, +1);
        f.add(den[i], bit, -1);
      }
      ++checked;
      auto it = seen.find(f);
      if (it == seen.end()) {
        Enclosure e = f.log_enclosure(L);
        double mag = std::max(std::fabs(e.lo().to_double(MPFR_RNDD)), std::fabs(e.hi().to_double(MPFR_RNDU)));
        worst = std::max(worst, mag);
        bool ok = mpfr_greaterequal_p(e.lo().get(), (-bound).hi().get()) && mpfr_lessequal_p(e.hi().get(), bound.lo().get());
        it = seen.emplace(f, ok).first;
      }
      if (!it->second) ++failures;
    }
  }
  r.pass = failures == 0;
  r.detail = std::to_string(checked) + " configurations over " + std::to_string(len) + " coordinates, worst |log| " +
             detail::fmt_double(worst) + " vs bound " + to_string(L.tail_after(1)) + ", failures " +
             std::to_string(failures);
  return r;
}

inline SuiteResult verify_chain(const VerifyConfig& cfg) {
  SuiteResult r{5, "chain-rule", false, "", 0, 30};
  ParameterLedger L = detail::paper_ledger(detail::cocycle_depth(cfg));
  MarginalSampler sampler(L);
  const BigInt lo = BigInt(1) - L.level(2).N;
  int failures = 0;
  std::uint64_t checks = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    RngStream rng(cfg.seed, detail::stream_id(5, i));
    WindowConfig w = sampler.sample(lo, BigInt(6), rng);
    for (int n = 0; n <= 3; ++n) {
      for (int m = 0; m <= 3; ++m) {
        ChainReport c = chain_check(L, w, BigInt(n), BigInt(m));
        worst = std::max(worst, c.gapUpper);
        ++checks;
        if (!c.ok) ++failures;
      }
    }
  }
  r.pass = failures == 0;
  r.detail = std::to_string(checks) + " checks, worst residual " + detail::fmt_double(worst) + ", failures " +
             std::to_string(failures);
  return r;
}

/// Toy ledger for D cylinders: eps = (1/2, 4), N_2 = 39, m_2 = 4 N_2.
inline ParameterLedger d_toy_ledger() {
  Overrides ov;
  ov[2].m = BigInt(39 * 4);
  return build_ledger(EpsilonSpec::parse("explicit:1/2,4"), 2, LedgerMode::Toy, ov);
}

inline SuiteResult verify_dcylinders(const VerifyConfig& cfg) {
  SuiteResult r{6, "d-cylinders", false, "", 0, 30};
  ParameterLedger L = d_toy_ledger();
  const LevelParams& lv = L.level(2);
  const BigInt blocks = lv.m.inline_value() / lv.N;
  MarginalSampler sampler(L);
  const Enclosure expect = Enclosure::dyadic(1, to_int64(lv.N));
  int good = 0, failures = 0, built = 0;
  for (std::uint64_t i = 0; good < 100 && i < 100000; ++i) {
    RngStream rng(cfg.seed, detail::stream_id(6, i));
    Cylinder c = sampler.sample(BigInt(1) - lv.N, BigInt(0), rng);
    if (!in_C_t(L, c, 2).member) continue;
    ++good;
    GoodCylinder gc = make_good_cylinder(L, c, 2);
    for (BigInt l = 2; l <= blocks; ++l) {
      DCylinder D = build_D(L, gc, 1, l);
      ++built;
      IntervalValue p = cylinder_prob(L, D.d);
      Enclosure pe = p.enclosure();
      bool exact = p.is_exact() && pe.is_point() && mpfr_equal_p(pe.lo().get(), expect.lo().get());
      if (!verify_D(L, D, c) || !exact) ++failures;
    }
  }
  r.pass = good == 100 && failures == 0;
  r.detail = std::to_string(good) + " good cylinders, " + std::to_string(built) + " D cylinders (blocks=" +
             to_decimal(blocks) + "), failures " + std::to_string(failures);
  return r;
}

inline SuiteResult verify_independence(const VerifyConfig& cfg) {
  SuiteResult r{7, "independence", false, "", 0, 30};
  ParameterLedger L = detail::paper_ledger(2);
  int failures = 0, dyadic = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    RngStream rng(cfg.seed, detail::stream_id(7, i));
    // Two disjoint ranges inside a span of at most 16 coordinates starting in [-20, 4].
    long start = -20 + static_cast<long>(rng.below(25));
    long lenE = 1 + static_cast<long>(rng.below(6));
    long gap = static_cast<long>(rng.below(4));
    long lenG = 1 + static_cast<long>(rng.below(6));
    long e0 = start, e1 = start + lenE - 1, g0 = e1 + 1 + gap, g1 = g0 + lenG - 1;
    std::vector<std::uint8_t> be(static_cast<std::size_t>(lenE)), bg(static_cast<std::size_t>(lenG));
    for (auto& x : be) x = static_cast<std::uint8_t>(rng.next() >> 63);
    for (auto& x : bg) x = static_cast<std::uint8_t>(rng.next() >> 63);
    Cylinder E(BigInt(e0), be), G(BigInt(g0), bg);
    EnumeratedEvent joint = brute_event_prob(
        L, BigInt(e0), BigInt(g1), [&](const WindowConfig& w) { return w.satisfies(E) && w.satisfies(G); }, "E and G");
    IntervalValue pe = cylinder_prob(L, E), pg = cylinder_prob(L, G);
    if (joint.count && pe.is_exact() && pg.is_exact()) {
      ++dyadic;
      Rational q(*joint.count, pow2(static_cast<std::uint64_t>(g1 - e0 + 1)));
      q.canonicalize();
      Rational prod = Rational(1, pow2(static_cast<std::uint64_t>(lenE + lenG)));
      if (q != prod) ++failures;
      continue;
    }
    Enclosure prod = pe.enclosure() * pg.enclosure();
    Enclosure diff = joint.bounds - prod;
    Real ref = prod.mid();
    double rel = std::max(std::fabs(diff.lo().to_double(MPFR_RNDD)), std::fabs(diff.hi().to_double(MPFR_RNDU))) /
                 ref.to_double();
    worst = std::max(worst, rel);
    if (!(rel <= 1e-12)) ++failures;
  }
  r.pass = failures == 0;
  r.detail = "200 pairs (" + std::to_string(dyadic) + " dyadic), worst relative gap " + detail::fmt_double(worst) +
             ", failures " + std::to_string(failures);
  return r;
}

inline SuiteResult verify_evc(const VerifyConfig&) {
  SuiteResult r{8, "evc-toy", false, "", 0, 300};
  ParameterLedger L = evc_toy_ledger();
  ExperimentReport rep = evc_experiment(L, Cylinder::parse("0..0:0"), 1, evc_toy_eps(), 2);
  bool infeasible = false;
  try {
    evc_experiment(detail::paper_ledger(3), Cylinder::parse("0..0:0"), 1, Rational(1, 20), 2);
  } catch (const Error& e) {
    infeasible = e.kind() == ErrorKind::Infeasible;
  }
  r.pass = rep.blocks >= 10 && rep.pass && infeasible;
  r.detail = "blocks=" + to_decimal(rep.blocks) + " method=" + rep.method + " union=" +
             rep.unionProb.lo().to_string(6) + " prediction=" + rep.prediction.lo().to_string(6) +
             " pooled=" + rep.pooledPrediction.lo().to_string(6) +
             " 0.9*P(B)=" + (Enclosure::from_rational(Rational(9, 10)) * rep.pB).hi().to_string(6) +
             (infeasible ? "; paper mode reported infeasible" : "; paper mode NOT reported infeasible");
  return r;
}

inline SuiteResult verify_kakutani(const VerifyConfig& cfg) {
  SuiteResult r{9, "kakutani", false, "", 0, 1};
  ParameterLedger L = detail::paper_ledger(std::max(3, cfg.tmax));
  int failures = 0;
  double worst = 0.0;
  for (int t = 1; t <= L.t_max(); ++t) {
    KakutaniTerm k = kakutani_term(L, t);
    Enclosure diff = k.term - (k.rawUpper + k.rawLower);
    double gap = std::max(std::fabs(diff.lo().to_double(MPFR_RNDD)), std::fabs(diff.hi().to_double(MPFR_RNDU)));
    worst = std::max(worst, gap);
    if (!(gap <= 1e-12)) ++failures;
    if (t >= 2) {
      const LevelParams& lv = L.level(t);
      Rational q(lv.epsilon.get_num(), lv.epsilon.get_den() * 2 * L.M_prev(t).inline_value());
      q.canonicalize();
      Enclosure cap = Enclosure::from_rational(q * q) * Enclosure::from_rational(Rational(1000001, 1000000));
      if (!mpfr_lessequal_p(k.term.hi().get(), cap.lo().get())) ++failures;
    }
  }
  r.pass = failures == 0;
  r.detail = std::to_string(L.t_max()) + " terms, worst gap " + detail::fmt_double(worst) + ", failures " +
             std::to_string(failures);
  return r;
}

inline SuiteResult verify_ratio(const VerifyConfig& cfg) {
  SuiteResult r{10, "ratio-set", false, "", 0, 120};
  ParameterLedger P = detail::paper_ledger(2);
  RatioScanResult one =
      ratio_set_scan(P, {Cylinder::parse("-1..1:101")}, RatioTarget::value(Rational(1)), Rational(1, 20), {BigInt(0)}, 1000,
                     cfg.seed);
  ParameterLedger L = evc_toy_ledger();
  const LevelParams& lv = L.level(2);
  const BigInt blocks = lv.m.inline_value() / lv.N;
  std::vector<BigInt> schedule;
  for (BigInt l = 2; l <= blocks; ++l) schedule.push_back(l * lv.N);
  RatioScanResult lam = ratio_set_scan(L, {Cylinder::parse("0..0:0")}, RatioTarget::lambda(L, 1), evc_toy_eps(),
                                       schedule, 200, cfg.seed);
  double best = 0.0;
  for (const auto& row : lam.rows) best = std::max(best, row.wilsonLow);
  r.pass = one.verdict == Verdict::Evidence && lam.verdict == Verdict::Evidence;
  r.detail = "a=1,n=0: " + to_string(one.verdict) + " (low " + detail::fmt_double(one.rows[0].wilsonLow) +
             "); a=lambda_1 over " + std::to_string(schedule.size()) + " return times: " + to_string(lam.verdict) +
             " (best low " + detail::fmt_double(best) + ")";
  return r;
}

struct SuiteInfo {
  int id;
  std::string name;
  std::function<SuiteResult(const VerifyConfig&)> run;
};

inline const std::vector<SuiteInfo>& verify_suites() {
  static const std::vector<SuiteInfo> suites = {
      {1, "base-case", verify_base},     {2, "constraints", verify_constraints}, {3, "telescoping", verify_telescoping},
      {4, "tail-bound", verify_tail},    {5, "chain-rule", verify_chain},        {6, "d-cylinders", verify_dcylinders},
      {7, "independence", verify_independence}, {8, "evc-toy", verify_evc},     {9, "kakutani", verify_kakutani},
      {10, "ratio-set", verify_ratio},
  };
  return suites;
}

/// Runs one suite by id or name, catching library errors as failures.
inline SuiteResult run_suite(const SuiteInfo& s, const VerifyConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  try {
    r = s.run(cfg);
  } catch (const std::exception& e) {
    r = SuiteResult{s.id, s.name, false, std::string("error: ") + e.what(), 0, 0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline const SuiteInfo* find_suite(const std::string& key) {
  for (const auto& s : verify_suites())
    if (s.name == key || std::to_string(s.id) == key) return &s;
  return nullptr;
}

}  // namespace typeiii
