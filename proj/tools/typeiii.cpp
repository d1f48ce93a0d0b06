#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "typeiii/typeiii.hpp"

using nlohmann::json;
using namespace typeiii;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct LedgerOpts {
  std::string eps = "geometric:1/2";
  int tmax = 2;
  std::string mode = "paper";
  std::vector<std::string> overrides;
  std::string file;  // ledger-v1 JSON; replaces the flags above

  ParameterLedger build() const {
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) fail(ErrorKind::InvalidArgument, "cannot read " + file);
      return ledger_from_json(json::parse(in));
    }
    Overrides ov;
    for (const auto& o : overrides) parse_override(o, ov);
    return build_ledger(EpsilonSpec::parse(eps), tmax, parse_mode(mode), ov);
  }

  json to_json() const {
    if (!file.empty()) return {{"file", file}};
    return {{"eps", eps}, {"tmax", tmax}, {"mode", mode}, {"overrides", overrides}};
  }
};

struct Common {
  LedgerOpts ledger;
  std::optional<std::uint64_t> seed;
  int precision = 0;
  std::string format = "json";
};

void add_ledger_opts(CLI::App* app, LedgerOpts& o) {
  app->add_option("--eps", o.eps, "epsilon spec: geometric:r or explicit:a,b,...")->capture_default_str();
  app->add_option("--tmax", o.tmax, "number of levels")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--mode", o.mode, "paper or toy")->capture_default_str()->check(CLI::IsMember({"paper", "toy"}));
  app->add_option("--override", o.overrides, "toy override t:n=V or t:m=V (repeatable)");
  app->add_option("--ledger", o.file, "read a ledger-v1 JSON file instead of building one");
}

void add_common(CLI::App* app, Common& c, bool seeded) {
  add_ledger_opts(app, c.ledger);
  app->add_option("--precision", c.precision, "MPFR precision in bits (64..4096)");
  app->add_option("--format", c.format, "json or csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
  if (seeded) app->add_option("--seed", c.seed, "64-bit seed")->required();
}

json interval_json(const IntervalValue& v) {
  return {{"value", v.value.to_string(17)}, {"logLow", v.logLow}, {"logHigh", v.logHigh}};
}

json report(const std::string& command, const Common& c, const json& params, json result) {
  json config = {{"ledger", c.ledger.to_json()}, {"precisionBits", precision_bits()}, {"format", c.format},
                 {"params", params}};
  if (c.seed) config["seed"] = *c.seed;
  return {{"schema", "report-v1"}, {"command", command}, {"config", config}, {"result", std::move(result)}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<BigInt> parse_bigint_list(const std::string& text) {
  std::vector<BigInt> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_bigint(item));
  return out;
}

CylinderUnion parse_union(const std::string& text) {
  CylinderUnion out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(Cylinder::parse(item));
  return out;
}

std::string status_name(ConstraintStatus s) { return to_string(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type III_1 Bernoulli shift toolkit"};
  app.require_subcommand(1);
  Common c;
  int code = kExitOk;
  std::function<void()> action;

  // ledger
  auto* ledger = app.add_subcommand("ledger", "parameter ledgers")->require_subcommand(1);
  auto* lbuild = ledger->add_subcommand("build", "print the ledger as JSON");
  auto* lcheck = ledger->add_subcommand("check", "check the recursive constraints");
  auto* lshow = ledger->add_subcommand("show", "print a readable table");
  for (auto* s : {lbuild, lcheck, lshow}) add_common(s, c, false);
  lbuild->callback([&] { action = [&] { emit(to_json(c.ledger.build())); }; });
  lcheck->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      ConstraintReport rep = check_constraints(L);
      json entries = json::array();
      for (const auto& e : rep.entries)
        entries.push_back({{"constraint", e.name}, {"level", e.level}, {"status", status_name(e.status)}, {"witness", e.witness}});
      json relax = json::array();
      for (const auto& r : L.relaxations) relax.push_back({{"constraint", r.constraint}, {"level", r.level}});
      emit(report("ledger check", c, json::object(),
                  {{"allHold", rep.all_hold()}, {"entries", entries}, {"relaxations", relax}}));
      if (!rep.all_hold()) code = kExitFail;
    };
  });
  lshow->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      std::cout << "mode " << to_string(L.mode) << ", epsilon " << L.spec.to_string() << "\n";
      std::printf("%3s %10s %6s %12s %12s %24s %24s\n", "t", "eps", "k", "n", "N", "m", "M");
      auto brief = [](const HugeInt& h) {
        std::string s = h.to_string();
        if (s.size() <= 24) return s;
        std::string bits = to_decimal(h.bit_length());
        return bits.size() <= 12 ? "~2^" + bits : "~2^(" + std::to_string(bits.size()) + " digits)";
      };
      for (const auto& lv : L.levels) {
        auto cell = [](const BigInt& v) {
          std::string s = to_decimal(v);
          return s.size() <= 12 ? s : "~2^" + std::to_string(bit_length(v));
        };
        std::printf("%3d %10s %6lld %12s %12s %24s %24s\n", lv.t, to_string(lv.epsilon).c_str(),
                    static_cast<long long>(lv.k), cell(lv.n).c_str(), cell(lv.N).c_str(), brief(lv.m).c_str(),
                    brief(lv.M).c_str());
      }
      for (const auto& r : L.relaxations) std::cout << "relaxed: " << r.constraint << " at t=" << r.level << "\n";
    };
  });

  // measure
  auto* measure = app.add_subcommand("measure", "product measure")->require_subcommand(1);
  std::string k_text = "0", cyl_text;
  int kak_t = 0;
  auto* mmarg = measure->add_subcommand("marginal", "marginal of coordinate k");
  auto* mcyl = measure->add_subcommand("cylinder", "probability of a cylinder");
  auto* mkak = measure->add_subcommand("kakutani", "Kakutani terms per level");
  for (auto* s : {mmarg, mcyl, mkak}) add_common(s, c, false);
  mmarg->add_option("--k", k_text, "coordinate")->required();
  mcyl->add_option("--cyl", cyl_text, "cylinder lo..hi:bits")->required();
  mkak->add_option("--t", kak_t, "single level (default: all)");
  mmarg->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      BigInt k = parse_bigint(k_text);
      Marginal m = marginal(L, k);
      auto p = [&](int bit) {
        Enclosure e = marginal_prob(L, m, bit);
        return json{{"symbol", m.symbol(bit)}, {"lo", e.lo().to_string(17)}, {"hi", e.hi().to_string(17)}};
      };
      emit(report("measure marginal", c, {{"k", k_text}},
                  {{"level", m.level}, {"biased", m.biased}, {"p1", p(1)}, {"p0", p(0)}}));
    };
  });
  mcyl->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      Cylinder cy = Cylinder::parse(cyl_text);
      emit(report("measure cylinder", c, {{"cyl", cyl_text}}, interval_json(cylinder_prob(L, cy))));
    };
  });
  mkak->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      json rows = json::array();
      for (int t = 1; t <= L.t_max(); ++t) {
        if (kak_t && t != kak_t) continue;
        KakutaniTerm k = kakutani_term(L, t);
        rows.push_back({{"t", t},
                        {"term", enclosure_json(k.term)},
                        {"boundarySquares", enclosure_json(k.rawUpper + k.rawLower)},
                        {"consistent", k.consistent}});
      }
      emit(report("measure kakutani", c, {{"t", kak_t}}, {{"terms", rows}}));
    };
  });

  // rn
  auto* rn = app.add_subcommand("rn", "Radon-Nikodym derivatives")->require_subcommand(1);
  std::string win_text, n_text = "1", m_text = "0";
  auto* rexact = rn->add_subcommand("exact", "finite product with tail bound");
  auto* rapprox = rn->add_subcommand("approx", "full derivative report");
  auto* rchain = rn->add_subcommand("chain", "cocycle identity residual");
  for (auto* s : {rexact, rapprox, rchain}) {
    add_common(s, c, false);
    s->add_option("--window", win_text, "window lo..hi:bits")->required();
    s->add_option("--n", n_text, "shift n >= 0")->required();
  }
  rchain->add_option("--m", m_text, "second shift m >= 0")->required();
  rexact->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      ApproxReport r = rn_derivative(L, Cylinder::parse(win_text), parse_bigint(n_text));
      json res = interval_json(r.exact);
      res["finite"] = interval_json(r.finite);
      res["tn"] = r.tn;
      res["tailBound"] = to_string(r.tailBound);
      emit(report("rn exact", c, {{"window", win_text}, {"n", n_text}}, res));
    };
  });
  rapprox->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      ApproxReport r = rn_derivative(L, Cylinder::parse(win_text), parse_bigint(n_text));
      json res = {{"n", to_decimal(r.n)},
                  {"tn", r.tn},
                  {"finite", interval_json(r.finite)},
                  {"exact", interval_json(r.exact)},
                  {"telescoped", r.telescoped.to_string()},
                  {"telescopedLog", to_string(r.telescoped.log_value())},
                  {"telescopeGap", r.telescopeGap},
                  {"lemmaRange", r.lemmaRange},
                  {"hBound", to_string(r.hBound)},
                  {"tailBound", to_string(r.tailBound)},
                  {"kBoundLog", r.kBoundLog}};
      if (r.lemma) {
        res["lemma"] = r.lemma->to_string();
        res["lemmaGap"] = to_string(r.lemmaGap);
        res["lemmaHolds"] = r.lemmaHolds;
      }
      emit(report("rn approx", c, {{"window", win_text}, {"n", n_text}}, res));
    };
  });
  rchain->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      ChainReport r = chain_check(L, Cylinder::parse(win_text), parse_bigint(n_text), parse_bigint(m_text));
      json res = {{"bound", to_string(r.bound)}, {"gapUpper", r.gapUpper}, {"exact", r.exact}, {"ok", r.ok}};
      if (r.exact) res["gap"] = to_string(r.gap);
      emit(report("rn chain", c, {{"window", win_text}, {"n", n_text}, {"m", m_text}}, res));
      if (!r.ok) code = kExitFail;
    };
  });

  // evc
  auto* evc = app.add_subcommand("evc", "essential value machinery")->require_subcommand(1);
  int evc_t = 2, t0 = 1, tau = 2;
  std::string l_text = "2", b_text = "empty", eps_text = "1/20", method = "auto";
  std::uint64_t trials = 4000;
  auto* ebuild = evc->add_subcommand("build-d", "construct D(c, t0, l)");
  auto* eexp = evc->add_subcommand("experiment", "union probability over return blocks");
  add_common(ebuild, c, false);
  add_common(eexp, c, true);
  ebuild->add_option("--cyl", cyl_text, "c on (-N_t, 0]")->required();
  ebuild->add_option("--t", evc_t, "level t")->capture_default_str();
  ebuild->add_option("--t0", t0, "target level t0 < t")->capture_default_str();
  ebuild->add_option("--l", l_text, "block index")->capture_default_str();
  eexp->add_option("--B", b_text, "centered cylinder -r..r:bits or empty")->capture_default_str();
  eexp->add_option("--t0", t0, "target level")->capture_default_str();
  eexp->add_option("--tau", tau, "block level")->capture_default_str();
  eexp->add_option("--band", eps_text, "band half-width in log scale")->capture_default_str();
  eexp->add_option("--method", method, "auto, exact or mc")->capture_default_str()->check(CLI::IsMember({"auto", "exact", "mc"}));
  eexp->add_option("--trials", trials, "Monte Carlo trials")->capture_default_str();
  ebuild->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      Cylinder cy = Cylinder::parse(cyl_text);
      CtMembership m = in_C_t(L, cy, evc_t);
      GoodCylinder gc = make_good_cylinder(L, cy, evc_t);
      DCylinder D = build_D(L, gc, t0, parse_bigint(l_text));
      json res = to_json(D);
      res["upsilonT"] = m.upsilonT;
      res["identityHolds"] = verify_D(L, D, cy);
      res["pD"] = interval_json(cylinder_prob(L, D.d));
      emit(report("evc build-d", c, {{"cyl", cyl_text}, {"t", evc_t}, {"t0", t0}, {"l", l_text}}, res));
      if (!res["identityHolds"].get<bool>()) code = kExitFail;
    };
  });
  eexp->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      EvcOptions o;
      o.method = method == "exact" ? EvcOptions::Method::Exact
                 : method == "mc"  ? EvcOptions::Method::MonteCarlo
                                   : EvcOptions::Method::Auto;
      o.trials = trials;
      o.seed = *c.seed;
      ExperimentReport r = evc_experiment(L, Cylinder::parse(b_text), t0, parse_rational(eps_text), tau, o);
      emit(report("evc experiment", c,
                  {{"B", b_text}, {"t0", t0}, {"tau", tau}, {"band", eps_text}, {"method", method}, {"trials", trials}},
                  to_json(r)));
      if (!r.pass) code = kExitFail;
    };
  });

  // scan
  auto* scan = app.add_subcommand("scan", "ratio set scans")->require_subcommand(1);
  std::string a_text = "1", union_text, schedule_text;
  auto* sratio = scan->add_subcommand("ratio", "estimate P(A and T^-n A and derivative near a)");
  auto* sreturn = scan->add_subcommand("return", "first return time on a window");
  add_common(sratio, c, true);
  add_common(sreturn, c, false);
  sratio->add_option("--A", union_text, "cylinders separated by ';'")->required();
  sratio->add_option("--a", a_text, "target: rational or lambda:t")->capture_default_str();
  sratio->add_option("--band", eps_text, "band half-width in log scale")->capture_default_str();
  sratio->add_option("--schedule", schedule_text, "comma separated n values (default l N_tau)");
  sratio->add_option("--tau", tau, "level for the default schedule")->capture_default_str();
  sratio->add_option("--trials", trials, "trials per n")->capture_default_str();
  sreturn->add_option("--window", win_text, "window lo..hi:bits")->required();
  sreturn->add_option("--B", b_text, "centered cylinder")->required();
  sreturn->add_option("--t0", t0, "target level")->capture_default_str();
  sreturn->add_option("--tau", tau, "block level")->capture_default_str();
  sreturn->add_option("--band", eps_text, "band half-width in log scale")->capture_default_str();
  sratio->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      std::vector<BigInt> schedule;
      if (!schedule_text.empty()) {
        schedule = parse_bigint_list(schedule_text);
      } else {
        const LevelParams& lv = L.level(tau);
        if (!lv.m.is_inline()) fail(ErrorKind::Infeasible, "default schedule needs m_tau/N_tau blocks");
        for (BigInt l = 2; l * lv.N <= lv.m.inline_value(); ++l) schedule.push_back(l * lv.N);
      }
      RatioScanResult r = ratio_set_scan(L, parse_union(union_text), RatioTarget::parse(L, a_text),
                                         parse_rational(eps_text), schedule, trials, *c.seed);
      if (c.format == "csv") {
        std::cout << scan_csv(r);
        return;
      }
      json rows = json::array();
      for (const auto& row : r.rows)
        rows.push_back({{"n", to_decimal(row.n)},
                        {"hits", row.hits},
                        {"indeterminate", row.indeterminate},
                        {"trials", row.trials},
                        {"estimate", row.estimate},
                        {"wilsonLow", row.wilsonLow},
                        {"wilsonHigh", row.wilsonHigh}});
      emit(report("scan ratio", c, {{"A", union_text}, {"a", a_text}, {"band", eps_text}, {"trials", trials}},
                  {{"a", r.a}, {"eps", to_string(r.eps)}, {"rows", rows}, {"verdict", to_string(r.verdict)}}));
    };
  });
  sreturn->callback([&] {
    action = [&] {
      ParameterLedger L = c.ledger.build();
      auto r = first_return_search(L, Cylinder::parse(win_text), Cylinder::parse(b_text), t0, parse_rational(eps_text), tau);
      json res = json::object();
      if (r) {
        res = {{"found", true}, {"phi", to_decimal(r->phi)}, {"l", to_decimal(r->l)}, {"derivative", interval_json(r->derivative)}};
      } else {
        res = {{"found", false}};
      }
      emit(report("scan return", c, {{"window", win_text}, {"B", b_text}, {"t0", t0}, {"tau", tau}, {"band", eps_text}}, res));
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "acceptance suites");
  std::string suite = "all";
  std::uint64_t vseed = 0;
  int vtmax = 3;
  verify->add_option("suite", suite, "all, a suite name or its number")->capture_default_str();
  verify->add_option("--seed", vseed, "64-bit seed")->required();
  verify->add_option("--tmax", vtmax, "paper ledger depth for the cocycle suites")->capture_default_str();
  verify->add_option("--precision", c.precision, "MPFR precision in bits (64..4096)");
  verify->callback([&] {
    action = [&] {
      VerifyConfig cfg{vseed, vtmax};
      std::vector<const SuiteInfo*> chosen;
      if (suite == "all") {
        for (const auto& s : verify_suites()) chosen.push_back(&s);
      } else if (const SuiteInfo* s = find_suite(suite)) {
        chosen.push_back(s);
      } else {
        throw CLI::ValidationError("suite", "unknown suite '" + suite + "'");
      }
      json rows = json::array();
      bool all = true;
      for (const SuiteInfo* s : chosen) {
        SuiteResult r = run_suite(*s, cfg);
        all = all && r.pass;
        rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
      }
      json out = {{"schema", "report-v1"},
                  {"command", "verify"},
                  {"config", {{"suite", suite}, {"seed", vseed}, {"tmax", vtmax}, {"precisionBits", precision_bits()}}},
                  {"result", {{"pass", all}, {"suites", rows}}}};
      emit(out);
      if (!all) code = kExitFail;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    int bits = c.precision;
    if (bits == 0) {
      if (const char* env = std::getenv("TYPEIII_PRECISION_BITS")) bits = std::atoi(env);
    }
    if (bits != 0) set_precision_bits(bits);
    if (action) action();
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::InvalidArgument ? kExitUsage : kExitFail;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return code;
}
