#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "typeiii/bigint.hpp"
#include "typeiii/errors.hpp"

namespace typeiii {

inline constexpr const char* kLambdaConstraint = "Constraint on lambda(t)";
inline constexpr const char* kMConstraint = "constraint of m(t)";
inline constexpr const char* kPropertyStar = "Property *";
inline constexpr const char* kBaseCase = "base case";

/// How epsilon_t is generated: r^t for a geometric ratio r, or a finite list.
struct EpsilonSpec {
  enum class Kind { Geometric, Explicit };

  Kind kind = Kind::Geometric;
  Rational ratio{1, 2};
  std::vector<Rational> values;

  static EpsilonSpec geometric(const Rational& r) {
    if (r <= 0 || r >= 1) fail(ErrorKind::InvalidArgument, "geometric ratio must lie in (0,1), got " + typeiii::to_string(r));
    EpsilonSpec s;
    s.kind = Kind::Geometric;
    s.ratio = r;
    return s;
  }

  static EpsilonSpec explicit_list(std::vector<Rational> list) {
    if (list.empty()) fail(ErrorKind::InvalidArgument, "explicit epsilon list is empty");
    for (const auto& v : list)
      if (v <= 0) fail(ErrorKind::InvalidArgument, "epsilon values must be positive, got " + typeiii::to_string(v));
    EpsilonSpec s;
    s.kind = Kind::Explicit;
    s.values = std::move(list);
    return s;
  }

  /// "geometric:1/2" or "explicit:1/2,4,1/64".
  static EpsilonSpec parse(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) fail(ErrorKind::InvalidArgument, "epsilon spec needs 'geometric:r' or 'explicit:a,b,...'");
    std::string head = text.substr(0, colon);
    std::string body = text.substr(colon + 1);
    if (head == "geometric") return geometric(parse_rational(body));
    if (head == "explicit") {
      std::vector<Rational> list;
      std::size_t pos = 0;
      while (true) {
        auto comma = body.find(',', pos);
        list.push_back(parse_rational(body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      return explicit_list(std::move(list));
    }
    fail(ErrorKind::InvalidArgument, "unknown epsilon kind '" + head + "'");
  }

  std::string to_string() const {
    if (kind == Kind::Geometric) return "geometric:" + typeiii::to_string(ratio);
    std::string out = "explicit:";
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + typeiii::to_string(values[i]);
    return out;
  }

  /// Last level an explicit list defines.
  std::optional<int> max_level() const {
    if (kind == Kind::Explicit) return static_cast<int>(values.size());
    return std::nullopt;
  }

  Rational at(int t) const {
    if (t < 1) fail(ErrorKind::InvalidArgument, "epsilon index starts at 1");
    if (kind == Kind::Explicit) {
      if (t > static_cast<int>(values.size()))
        fail(ErrorKind::InvalidArgument, "explicit epsilon list has no level " + std::to_string(t));
      return values[static_cast<std::size_t>(t - 1)];
    }
    Rational r;
    mpz_pow_ui(r.get_num_mpz_t(), ratio.get_num_mpz_t(), static_cast<unsigned long>(t));
    mpz_pow_ui(r.get_den_mpz_t(), ratio.get_den_mpz_t(), static_cast<unsigned long>(t));
    r.canonicalize();
    return r;
  }

  /// sum_{u > t} epsilon_u, exact. Explicit lists stop at their last entry.
  Rational tail_after(int t) const {
    if (kind == Kind::Geometric) return Rational(at(t + 1) / (Rational(1) - ratio));
    Rational sum = 0;
    for (std::size_t u = static_cast<std::size_t>(std::max(t, 0)); u < values.size(); ++u) sum += values[u];
    return sum;
  }

  bool operator==(const EpsilonSpec& o) const {
    return kind == o.kind && (kind == Kind::Geometric ? ratio == o.ratio : values == o.values);
  }
};

enum class LedgerMode { Paper, Toy };

inline std::string to_string(LedgerMode m) { return m == LedgerMode::Paper ? "paper" : "toy"; }

inline LedgerMode parse_mode(const std::string& s) {
  if (s == "paper") return LedgerMode::Paper;
  if (s == "toy") return LedgerMode::Toy;
  fail(ErrorKind::InvalidArgument, "mode must be 'paper' or 'toy', got '" + s + "'");
}

struct LevelOverride {
  std::optional<BigInt> n;
  std::optional<BigInt> m;
};

/// Per-level overrides keyed by t.
using Overrides = std::map<int, LevelOverride>;

/// Parse "t:n=V" / "t:m=V" items (CLI syntax), merging into `into`.
inline void parse_override(const std::string& text, Overrides& into) {
  auto colon = text.find(':');
  auto eq = text.find('=');
  if (colon == std::string::npos || eq == std::string::npos || eq < colon)
    fail(ErrorKind::InvalidArgument, "override must look like '2:n=16' or '2:m=156', got '" + text + "'");
  int t = std::stoi(text.substr(0, colon));
  std::string key = text.substr(colon + 1, eq - colon - 1);
  BigInt v = parse_bigint(text.substr(eq + 1));
  if (key == "n") {
    into[t].n = v;
  } else if (key == "m") {
    into[t].m = v;
  } else {
    fail(ErrorKind::InvalidArgument, "override key must be n or m, got '" + key + "'");
  }
}

struct LevelParams {
  int t = 1;
  Rational epsilon;
  std::int64_t k = 0;  // lambda_t = e^{1/2^k}
  BigInt n;
  BigInt N;
  HugeInt m;
  HugeInt M;
  bool n_overridden = false;
  bool m_overridden = false;

  /// log lambda_t = 1/2^k as an exact rational.
  Rational log_lambda() const { return pow2_rational(-k); }

  bool operator==(const LevelParams&) const = default;
};

struct Relaxation {
  std::string constraint;
  int level = 0;
  bool operator==(const Relaxation&) const = default;
};

class ParameterLedger {
 public:
  EpsilonSpec spec;
  LedgerMode mode = LedgerMode::Paper;
  std::vector<LevelParams> levels;
  std::vector<Relaxation> relaxations;
  std::vector<BigInt> max_exponent;  // E_t, index t-1
  Overrides overrides;

  int t_max() const { return static_cast<int>(levels.size()); }

  const LevelParams& level(int t) const {
    if (t < 1) fail(ErrorKind::InvalidArgument, "levels start at t=1");
    if (t > t_max()) throw LedgerExhausted(t, "ledger has " + std::to_string(t_max()) + " levels");
    return levels[static_cast<std::size_t>(t - 1)];
  }

  /// M_{t-1}, with M_0 = 1.
  HugeInt M_prev(int t) const { return t <= 1 ? HugeInt(1L) : level(t - 1).M; }

  const BigInt& E(int t) const {
    level(t);
    return max_exponent[static_cast<std::size_t>(t - 1)];
  }

  /// sum_{u > t} epsilon_u over the whole epsilon spec (not just built levels).
  Rational tail_after(int t) const { return spec.tail_after(t); }

  std::int64_t k_max() const { return levels.empty() ? 0 : levels.back().k; }

  bool operator==(const ParameterLedger& o) const {
    return spec == o.spec && mode == o.mode && levels == o.levels && relaxations == o.relaxations &&
           max_exponent == o.max_exponent;
  }
};

/// 8 * E_{t-1}, the least n with n/4 >= 2 E_{t-1}.
inline BigInt min_n_for_property_star(const std::vector<LevelParams>& prefix, std::int64_t k_t) {
  if (prefix.empty()) fail(ErrorKind::InvalidArgument, "Property * needs at least one earlier level");
  BigInt e = 0;
  for (const auto& lv : prefix) {
    if (k_t <= lv.k)
      fail(ErrorKind::NonIncreasingK,
           "k_t=" + std::to_string(k_t) + " does not exceed k_" + std::to_string(lv.t) + "=" + std::to_string(lv.k));
    e += shift_left(lv.n, static_cast<std::uint64_t>(k_t - lv.k));
  }
  return 8 * e;
}

/// N (2 + 2^{3N}).
inline HugeInt paper_m(const BigInt& N) { return HugeInt::shifted(N, 3 * N) + HugeInt(BigInt(2 * N)); }

namespace detail {
inline BigInt require_inline(const HugeInt& h, const std::string& what) {
  if (!h.is_inline())
    fail(ErrorKind::Representability, what + " has " + h.bit_length().get_str() + " bits; later levels are not representable");
  return h.inline_value();
}
}  // namespace detail

inline ParameterLedger build_ledger(const EpsilonSpec& spec, int t_max, LedgerMode mode, const Overrides& overrides = {}) {
  if (t_max < 1) fail(ErrorKind::InvalidArgument, "t_max must be >= 1");
  if (auto last = spec.max_level(); last && t_max > *last)
    fail(ErrorKind::InvalidArgument,
         "explicit epsilon list defines " + std::to_string(*last) + " levels, t_max=" + std::to_string(t_max));
  if (mode == LedgerMode::Paper && !overrides.empty()) {
    const auto& [t, ov] = *overrides.begin();
    fail(ErrorKind::ConstraintViolation,
         std::string(ov.m ? kMConstraint : (t == 1 ? kBaseCase : kPropertyStar)) + " is fixed in paper mode (override at t=" +
             std::to_string(t) + ")");
  }
  for (const auto& [t, ov] : overrides) {
    if (t < 1 || t > t_max) fail(ErrorKind::InvalidArgument, "override for level " + std::to_string(t) + " outside 1..t_max");
    if (ov.n && *ov.n <= 0) fail(ErrorKind::InvalidArgument, "n override must be positive");
    if (ov.m && *ov.m <= 0) fail(ErrorKind::InvalidArgument, "m override must be positive");
  }

  ParameterLedger L;
  L.spec = spec;
  L.mode = mode;
  L.overrides = overrides;

  for (int t = 1; t <= t_max; ++t) {
    LevelParams lv;
    lv.t = t;
    lv.epsilon = spec.at(t);
    const LevelOverride* ov = nullptr;
    if (auto it = overrides.find(t); it != overrides.end()) ov = &it->second;

    BigInt M_prev = t == 1 ? BigInt(1) : detail::require_inline(L.levels.back().M, "M_" + std::to_string(t - 1));
    if (t == 1) {
      lv.k = 0;
      lv.n = 2;
    } else {
      // k_t = floor(log2(M_{t-1} / eps_t)) + 1
      lv.k = floor_log2(Rational(M_prev) / lv.epsilon) + 1;
      lv.n = min_n_for_property_star(L.levels, lv.k);
    }
    if (ov && ov->n) {
      lv.n_overridden = true;
      if (t == 1) {
        L.relaxations.push_back({kBaseCase, t});
      } else if (*ov->n < lv.n) {
        L.relaxations.push_back({kPropertyStar, t});
      }
      lv.n = *ov->n;
    }
    lv.N = M_prev + lv.n;
    if (ov && ov->m) {
      if (*ov->m % lv.N != 0)
        fail(ErrorKind::ConstraintViolation, "toy m_" + std::to_string(t) + "=" + to_decimal(*ov->m) +
                                                 " is not a multiple of N_" + std::to_string(t) + "=" + to_decimal(lv.N));
      lv.m_overridden = true;
      lv.m = HugeInt(*ov->m);
      L.relaxations.push_back({kMConstraint, t});
    } else if (t == 1) {
      lv.m = HugeInt(4L);
    } else {
      lv.m = paper_m(lv.N);
    }
    lv.M = lv.m + HugeInt(lv.N);

    // E_t = sum_{u<=t} n_u 2^{k_t - k_u}
    BigInt E = lv.n;
    for (const auto& prev : L.levels) E += shift_left(prev.n, static_cast<std::uint64_t>(lv.k - prev.k));
    L.levels.push_back(std::move(lv));
    L.max_exponent.push_back(E);
  }
  return L;
}

// ---------------------------------------------------------------------------
// Constraint report
// ---------------------------------------------------------------------------

enum class ConstraintStatus { Holds, Violated, NotApplicable };

inline std::string to_string(ConstraintStatus s) {
  switch (s) {
    case ConstraintStatus::Holds: return "holds";
    case ConstraintStatus::Violated: return "violated";
    case ConstraintStatus::NotApplicable: return "not-applicable";
  }
  return "?";
}

struct ConstraintEntry {
  std::string name;
  int level = 0;
  ConstraintStatus status = ConstraintStatus::Holds;
  std::string witness;
};

struct ConstraintReport {
  std::vector<ConstraintEntry> entries;

  bool all_hold() const {
    for (const auto& e : entries)
      if (e.status == ConstraintStatus::Violated) return false;
    return true;
  }

  const ConstraintEntry* find(const std::string& name, int level) const {
    for (const auto& e : entries)
      if (e.name == name && e.level == level) return &e;
    return nullptr;
  }
};

inline ConstraintReport check_constraints(const ParameterLedger& L) {
  ConstraintReport rep;
  for (const auto& lv : L.levels) {
    const int t = lv.t;
    if (t == 1) {
      rep.entries.push_back({kLambdaConstraint, 1, ConstraintStatus::NotApplicable, "base level fixed (lambda_1 = e)"});
      rep.entries.push_back({kPropertyStar, 1, ConstraintStatus::NotApplicable, "no earlier levels"});
    } else {
      // M_{t-1} / 2^{k_t} < eps_t
      Rational lhs(L.M_prev(t).inline_value(), pow2(static_cast<std::uint64_t>(lv.k)));
      lhs.canonicalize();
      bool ok = lhs < lv.epsilon;
      rep.entries.push_back({kLambdaConstraint, t, ok ? ConstraintStatus::Holds : ConstraintStatus::Violated,
                             to_string(lhs) + (ok ? " < " : " >= ") + to_string(lv.epsilon)});

      std::vector<LevelParams> prefix(L.levels.begin(), L.levels.begin() + (t - 1));
      BigInt need = min_n_for_property_star(prefix, lv.k);
      bool star = lv.n >= need;
      rep.entries.push_back({kPropertyStar, t, star ? ConstraintStatus::Holds : ConstraintStatus::Violated,
                             "n=" + to_decimal(lv.n) + (star ? " >= " : " < ") + "8E=" + to_decimal(need)});
    }
    if (t == 1 && !lv.m_overridden) {
      rep.entries.push_back({kMConstraint, 1, ConstraintStatus::NotApplicable, "base level fixed (m_1 = 4)"});
    } else {
      HugeInt expected = paper_m(lv.N);
      bool ok = expected == lv.m;
      std::string witness = ok ? "m = N(2+2^{3N}) with N=" + to_decimal(lv.N)
                               : "expected " + expected.to_string() + ", got " + lv.m.to_string();
      rep.entries.push_back({kMConstraint, t, ok ? ConstraintStatus::Holds : ConstraintStatus::Violated, witness});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON ("ledger-v1")
// ---------------------------------------------------------------------------

inline nlohmann::json rational_json(const Rational& q) {
  return {{"num", to_decimal(q.get_num())}, {"den", to_decimal(q.get_den())}};
}

inline Rational rational_from_json(const nlohmann::json& j) {
  Rational q(parse_bigint(j.at("num").get<std::string>()), parse_bigint(j.at("den").get<std::string>()));
  if (q.get_den() == 0) fail(ErrorKind::InvalidArgument, "zero denominator");
  q.canonicalize();
  return q;
}

inline nlohmann::json epsilon_json(const EpsilonSpec& s) {
  if (s.kind == EpsilonSpec::Kind::Geometric) return {{"kind", "geometric"}, {"ratio", rational_json(s.ratio)}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& v : s.values) list.push_back(rational_json(v));
  return {{"kind", "explicit"}, {"values", list}};
}

inline EpsilonSpec epsilon_from_json(const nlohmann::json& j) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "geometric") return EpsilonSpec::geometric(rational_from_json(j.at("ratio")));
  if (kind == "explicit") {
    std::vector<Rational> vals;
    for (const auto& v : j.at("values")) vals.push_back(rational_from_json(v));
    return EpsilonSpec::explicit_list(std::move(vals));
  }
  fail(ErrorKind::InvalidArgument, "unknown epsilon kind '" + kind + "'");
}

inline nlohmann::json to_json(const ParameterLedger& L) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t i = 0; i < L.levels.size(); ++i) {
    const auto& lv = L.levels[i];
    levels.push_back({{"t", lv.t},
                      {"epsilon", rational_json(lv.epsilon)},
                      {"k", std::to_string(lv.k)},
                      {"lambda", "e^(1/2^" + std::to_string(lv.k) + ")"},
                      {"n", to_decimal(lv.n)},
                      {"N", to_decimal(lv.N)},
                      {"m", lv.m.to_string()},
                      {"M", lv.M.to_string()},
                      {"E", to_decimal(L.max_exponent[i])},
                      {"nOverridden", lv.n_overridden},
                      {"mOverridden", lv.m_overridden}});
  }
  nlohmann::json relax = nlohmann::json::array();
  for (const auto& r : L.relaxations) relax.push_back({{"constraint", r.constraint}, {"level", r.level}});
  return {{"schema", "ledger-v1"},
          {"mode", to_string(L.mode)},
          {"epsilon", epsilon_json(L.spec)},
          {"tMax", L.t_max()},
          {"M0", "1"},
          {"levels", levels},
          {"relaxations", relax}};
}

/// Rebuilds from the spec, mode and overrides recorded in `j`, then checks every
/// stored value against the rebuild.
inline ParameterLedger ledger_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "ledger-v1") fail(ErrorKind::InvalidArgument, "expected schema ledger-v1");
  EpsilonSpec spec = epsilon_from_json(j.at("epsilon"));
  LedgerMode mode = parse_mode(j.at("mode").get<std::string>());
  int t_max = j.at("tMax").get<int>();
  Overrides ov;
  for (const auto& lj : j.at("levels")) {
    int t = lj.at("t").get<int>();
    if (lj.value("nOverridden", false)) ov[t].n = parse_bigint(lj.at("n").get<std::string>());
    if (lj.value("mOverridden", false)) ov[t].m = parse_bigint(lj.at("m").get<std::string>());
  }
  ParameterLedger L = build_ledger(spec, t_max, mode, ov);
  if (to_json(L) != j) fail(ErrorKind::InvalidArgument, "stored ledger values disagree with a rebuild from its spec");
  return L;
}

}  // namespace typeiii
