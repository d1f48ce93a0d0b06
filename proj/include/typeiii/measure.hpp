#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "typeiii/cylinder.hpp"
#include "typeiii/interval.hpp"
#include "typeiii/ledger.hpp"

namespace typeiii {

/// The marginal P_k. Fair coordinates have p0 = p1 = 1/2; biased ones at level t
/// have p0 = 1/(1+lambda_t), p1 = lambda_t/(1+lambda_t).
struct Marginal {
  int level = 0;  // 0 for k >= 0, otherwise the t whose block (-M_t, -M_{t-1}] holds k
  bool biased = false;

  std::string symbol(int bit) const {
    if (!biased) return "1/2";
    std::string lam = "lambda_" + std::to_string(level);
    return bit ? lam + "/(1+" + lam + ")" : "1/(1+" + lam + ")";
  }

  bool operator==(const Marginal&) const = default;
};

namespace detail {

struct Region {
  Marginal marginal;
  std::optional<BigInt> last;  // last coordinate with the same marginal; none for k >= 0
};

inline Region region_of(const ParameterLedger& L, const BigInt& k) {
  if (k >= 0) return {{0, false}, std::nullopt};
  const BigInt j = -k;
  const HugeInt hj(j);
  // least t with j < M_t (M_0 = 1 <= j always)
  int lo = 1, hi = L.t_max();
  if (!(hj < L.level(hi).M))
    throw LedgerExhausted(L.t_max() + 1, "coordinate " + to_decimal(k) + " is below -M_" + std::to_string(L.t_max()));
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (hj < L.level(mid).M) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const LevelParams& lv = L.level(lo);
  if (j < lv.N) return {{lo, true}, BigInt(-L.M_prev(lo).inline_value())};
  return {{lo, false}, BigInt(-lv.N)};
}

}  // namespace detail

inline Marginal marginal(const ParameterLedger& L, const BigInt& k) { return detail::region_of(L, k).marginal; }

/// t(n) = min{t : n < N_t}.
inline int t_of(const ParameterLedger& L, const BigInt& n) {
  if (n < 0) fail(ErrorKind::InvalidArgument, "t(n) needs n >= 0");
  for (const auto& lv : L.levels)
    if (n < lv.N) return lv.t;
  throw LedgerExhausted(L.t_max() + 1, "n=" + to_decimal(n) + " >= N_" + std::to_string(L.t_max()));
}

/// Per-coordinate level codes on [lo, hi]: 0 for fair, t for biased at level t.
inline std::vector<std::int16_t> marginal_profile(const ParameterLedger& L, const BigInt& lo, const BigInt& hi) {
  std::vector<std::int16_t> out;
  if (hi < lo) return out;
  out.reserve(Cylinder::checked_length(lo, hi));
  BigInt k = lo;
  while (k <= hi) {
    detail::Region r = detail::region_of(L, k);
    BigInt last = r.last ? std::min(*r.last, hi) : hi;
    std::size_t run = static_cast<std::size_t>(BigInt(last - k + 1).get_ui());
    out.insert(out.end(), run, static_cast<std::int16_t>(r.marginal.biased ? r.marginal.level : 0));
    k = last + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constants per level
// ---------------------------------------------------------------------------

/// x_t = log lambda_t = 2^{-k_t}.
inline Enclosure log_lambda(const LevelParams& lv) { return Enclosure::dyadic(1, lv.k); }

/// log(1 + lambda_t).
inline Enclosure log_one_plus_lambda(const LevelParams& lv) {
  Enclosure x = log_lambda(lv);
  Enclosure e;
  mpfr_exp(e.lo().get(), x.lo().get(), MPFR_RNDD);
  mpfr_exp(e.hi().get(), x.hi().get(), MPFR_RNDU);
  return e.log1p();
}

/// lambda_t - 1, with full relative accuracy even when k_t is large.
inline Enclosure lambda_minus_one(const LevelParams& lv) {
  Enclosure x = log_lambda(lv);
  Enclosure e;
  mpfr_expm1(e.lo().get(), x.lo().get(), MPFR_RNDD);
  mpfr_expm1(e.hi().get(), x.hi().get(), MPFR_RNDU);
  return e;
}

/// 1/2 - p0 for the given marginal: 0 when fair, (lambda-1)/(2(1+lambda)) when biased.
inline Enclosure half_minus_p0(const ParameterLedger& L, const Marginal& m) {
  if (!m.biased) return Enclosure::exact_zero();
  Enclosure d = lambda_minus_one(L.level(m.level));
  return d / (d + Enclosure::from_int(2)).scaled(2);
}

inline Enclosure marginal_prob(const ParameterLedger& L, const Marginal& m, int bit) {
  if (!m.biased) return Enclosure::dyadic(1, 1);
  Enclosure d = half_minus_p0(L, m);
  Enclosure half = Enclosure::dyadic(1, 1);
  return bit ? half + d : half - d;
}

// ---------------------------------------------------------------------------
// LogForm: an exact symbolic logarithm
//   sum_u lam[u] * log lambda_u  +  ln2 * log 2  -  sum_u one_plus[u] * log(1+lambda_u)
// ---------------------------------------------------------------------------
struct LogForm {
  std::vector<std::int64_t> lam;       // index u-1
  std::int64_t ln2 = 0;
  std::vector<std::int64_t> one_plus;  // index u-1, subtracted

  explicit LogForm(int t_max = 0) : lam(static_cast<std::size_t>(t_max), 0), one_plus(static_cast<std::size_t>(t_max), 0) {}

  /// Adds sign * log P(bit) for a coordinate with level code `code`.
  void add(std::int16_t code, int bit, int sign) {
    if (code == 0) {
      ln2 -= sign;
      return;
    }
    auto u = static_cast<std::size_t>(code - 1);
    if (bit) lam[u] += sign;
    one_plus[u] += sign;
  }

  bool has_logs() const {
    return std::any_of(one_plus.begin(), one_plus.end(), [](std::int64_t v) { return v != 0; });
  }
  bool has_lambda() const {
    return std::any_of(lam.begin(), lam.end(), [](std::int64_t v) { return v != 0; });
  }

  /// Pure lambda exponent: sum_u lam[u] / 2^{k_u}, valid only if no log2 / log(1+lambda) terms remain.
  Rational dyadic_part(const ParameterLedger& L) const {
    Rational s = 0;
    for (std::size_t u = 0; u < lam.size(); ++u)
      if (lam[u] != 0) s += Rational(lam[u]) * L.level(static_cast<int>(u) + 1).log_lambda();
    return s;
  }

  bool is_dyadic() const { return ln2 == 0 && !has_logs(); }

  Enclosure log_enclosure(const ParameterLedger& L) const {
    Enclosure s = Enclosure::from_rational(dyadic_part(L));
    if (ln2 != 0) s = s + Enclosure::ln2().scaled(ln2);
    for (std::size_t u = 0; u < one_plus.size(); ++u)
      if (one_plus[u] != 0) s = s - log_one_plus_lambda(L.level(static_cast<int>(u) + 1)).scaled(one_plus[u]);
    return s;
  }

  IntervalValue evaluate(const ParameterLedger& L) const {
    if (!has_logs() && !has_lambda()) return IntervalValue::pow2(ln2);
    return IntervalValue::from_log(log_enclosure(L));
  }

  bool operator<(const LogForm& o) const {
    return std::tie(ln2, lam, one_plus) < std::tie(o.ln2, o.lam, o.one_plus);
  }
  bool operator==(const LogForm&) const = default;
};

// ---------------------------------------------------------------------------
// Cylinder probabilities
// ---------------------------------------------------------------------------

inline LogForm cylinder_log_form(const ParameterLedger& L, const Cylinder& c) {
  LogForm f(L.t_max());
  if (c.empty()) return f;
  auto prof = marginal_profile(L, c.lo(), c.hi());
  for (std::size_t i = 0; i < prof.size(); ++i) f.add(prof[i], c.bits()[i], +1);
  return f;
}

inline IntervalValue cylinder_prob(const ParameterLedger& L, const Cylinder& c) {
  return cylinder_log_form(L, c).evaluate(L);
}

// ---------------------------------------------------------------------------
// Kakutani terms
// ---------------------------------------------------------------------------

struct KakutaniTerm {
  int t = 1;
  Enclosure term;        // 2 ((lambda-1)/(2(1+lambda)))^2
  Enclosure rawUpper;    // (P_k(0) - P_{k-1}(0))^2 at k = -M_{t-1}+1
  Enclosure rawLower;    // same at k = -N_t+1
  bool consistent = false;  // term overlaps rawUpper + rawLower
};

inline KakutaniTerm kakutani_term(const ParameterLedger& L, int t) {
  const LevelParams& lv = L.level(t);
  KakutaniTerm out;
  out.t = t;
  Enclosure d = lambda_minus_one(lv);
  Enclosure ratio = d / (d + Enclosure::from_int(2)).scaled(2);
  out.term = ratio.square().scaled(2);

  auto boundary_diff = [&](const BigInt& k) {
    Marginal a = marginal(L, k);
    Marginal b = marginal(L, BigInt(k - 1));
    // p0(a) - p0(b) = (1/2 - p0(b)) - (1/2 - p0(a))
    return half_minus_p0(L, b) - half_minus_p0(L, a);
  };
  BigInt upper = BigInt(1) - L.M_prev(t).inline_value();
  BigInt lower = BigInt(1) - lv.N;
  out.rawUpper = boundary_diff(upper).square();
  out.rawLower = boundary_diff(lower).square();
  out.consistent = out.term.overlaps(out.rawUpper + out.rawLower);
  return out;
}

// ---------------------------------------------------------------------------
// Many configurations over a fixed set of coordinates
// ---------------------------------------------------------------------------

/// Probability structure of at most 64 coordinates. The probability of an
/// assignment only depends on how many ones fall on each biased level, so
/// assignments are grouped by that signature and each group is evaluated once.
class CoordinateMeasure {
 public:
  CoordinateMeasure(const ParameterLedger& L, std::vector<BigInt> coords) : L_(&L), coords_(std::move(coords)) {
    codes_.reserve(coords_.size());
    for (const auto& k : coords_) {
      Marginal m = marginal(L, k);
      codes_.push_back(static_cast<std::int16_t>(m.biased ? m.level : 0));
    }
    init_masks();
  }

  CoordinateMeasure(const ParameterLedger& L, const BigInt& lo, const BigInt& hi) : L_(&L) {
    codes_ = marginal_profile(L, lo, hi);
    for (std::size_t i = 0; i < codes_.size(); ++i) coords_.push_back(lo + static_cast<unsigned long>(i));
    init_masks();
  }

  std::size_t size() const { return codes_.size(); }
  const std::vector<std::int16_t>& codes() const { return codes_; }
  const std::vector<BigInt>& coords() const { return coords_; }

  bool all_fair() const { return level_masks_.empty(); }

  /// Packs the per-level one counts of an assignment (bit i = coordinate i).
  std::uint64_t signature(std::uint64_t mask) const {
    std::uint64_t key = 0;
    for (const auto& lm : level_masks_) key = key * 65 + static_cast<std::uint64_t>(__builtin_popcountll(mask & lm));
    return key;
  }

  LogForm log_form(std::uint64_t mask) const {
    LogForm f(L_->t_max());
    for (std::size_t i = 0; i < codes_.size(); ++i) f.add(codes_[i], static_cast<int>((mask >> i) & 1u), +1);
    return f;
  }

  IntervalValue prob(std::uint64_t mask) const {
    std::uint64_t sig = signature(mask);
    auto it = cache_.find(sig);
    if (it != cache_.end()) return it->second;
    IntervalValue v = log_form(mask).evaluate(*L_);
    cache_.emplace(sig, v);
    return v;
  }

  /// Double-precision probability of every mask, for search heuristics only.
  std::vector<double> approximate_probs() const {
    std::vector<double> p1(codes_.size());
    for (std::size_t i = 0; i < codes_.size(); ++i)
      p1[i] = codes_[i] == 0 ? 0.5 : marginal_prob(*L_, {codes_[i], true}, 1).mid().to_double();
    std::vector<double> out(std::size_t{1} << codes_.size());
    out[0] = 1.0;
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      std::size_t half = std::size_t{1} << i;
      for (std::size_t m = 0; m < half; ++m) {
        out[m | half] = out[m] * p1[i];
        out[m] *= 1.0 - p1[i];
      }
    }
    return out;
  }

 private:
  void init_masks() {
    if (codes_.size() > 64) fail(ErrorKind::WindowTooLarge, "CoordinateMeasure handles at most 64 coordinates");
    std::map<std::int16_t, std::uint64_t> by_level;
    for (std::size_t i = 0; i < codes_.size(); ++i)
      if (codes_[i] != 0) by_level[codes_[i]] |= std::uint64_t{1} << i;
    for (const auto& [lvl, m] : by_level) level_masks_.push_back(m);
  }

  const ParameterLedger* L_;
  std::vector<BigInt> coords_;
  std::vector<std::int16_t> codes_;
  std::vector<std::uint64_t> level_masks_;
  mutable std::unordered_map<std::uint64_t, IntervalValue> cache_;
};

/// Rigorous sum of probabilities over masks accepted by `pick`, grouping by signature.
template <class Pick>
Enclosure sum_masks(const CoordinateMeasure& cm, std::uint64_t count, Pick&& pick) {
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> groups;  // sig -> (count, representative)
  for (std::uint64_t m = 0; m < count; ++m) {
    if (!pick(m)) continue;
    auto [it, inserted] = groups.try_emplace(cm.signature(m), 0, m);
    ++it->second.first;
  }
  std::vector<std::uint64_t> keys;
  for (const auto& g : groups) keys.push_back(g.first);
  std::sort(keys.begin(), keys.end());
  Enclosure total = Enclosure::exact_zero();
  for (auto key : keys) {
    const auto& cr = groups[key];
    Enclosure p = cm.prob(cr.second).enclosure();
    total = total + p * Enclosure::from_bigint(BigInt(static_cast<unsigned long>(cr.first)));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Density of cylinders
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxUnionSupport = 24;

/// Smallest radius n and an assignment b on [-n, n] with P(A | [b]) > 1 - eps,
/// certified with interval arithmetic.
inline Cylinder approximate_by_cylinder(const ParameterLedger& L, const CylinderUnion& A, const Rational& eps) {
  if (eps <= 0 || eps >= 1) fail(ErrorKind::InvalidArgument, "eps must lie in (0,1)");
  if (A.empty()) fail(ErrorKind::NullSet, "empty cylinder union has probability 0");

  std::vector<BigInt> support;
  for (const auto& c : A)
    for (std::size_t i = 0; i < c.size(); ++i) support.push_back(c.lo() + static_cast<unsigned long>(i));
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (support.size() > kMaxUnionSupport)
    fail(ErrorKind::WindowTooLarge, "union support has " + std::to_string(support.size()) + " coordinates");

  auto index_of = [&](const BigInt& k) {
    return static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), k) - support.begin());
  };
  struct Pattern {
    std::uint64_t mask = 0, value = 0;
  };
  std::vector<Pattern> pats;
  for (const auto& c : A) {
    Pattern p;
    for (std::size_t i = 0; i < c.size(); ++i) {
      std::size_t s = index_of(c.lo() + static_cast<unsigned long>(i));
      p.mask |= std::uint64_t{1} << s;
      if (c.bits()[i]) p.value |= std::uint64_t{1} << s;
    }
    pats.push_back(p);
  }
  auto in_A = [&](std::uint64_t cfg) {
    for (const auto& p : pats)
      if ((cfg & p.mask) == p.value) return true;
    return false;
  };

  CoordinateMeasure cm(L, support);
  const std::uint64_t total = std::uint64_t{1} << support.size();
  const std::vector<double> approx = cm.approximate_probs();

  std::vector<BigInt> radii{BigInt(0)};
  for (const auto& s : support) radii.push_back(abs(s));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  Enclosure threshold = Enclosure::from_rational(Rational(1) - eps);
  for (const BigInt& n : radii) {
    std::uint64_t inner = 0;
    for (std::size_t i = 0; i < support.size(); ++i)
      if (abs(support[i]) <= n) inner |= std::uint64_t{1} << i;

    std::map<std::uint64_t, std::pair<double, double>> ratio;  // sigma -> (P(A and sigma), P(sigma))
    for (std::uint64_t cfg = 0; cfg < total; ++cfg) {
      auto& r = ratio[cfg & inner];
      if (in_A(cfg)) r.first += approx[cfg];
      r.second += approx[cfg];
    }
    std::uint64_t best = 0;
    double best_ratio = -1.0;
    for (const auto& [sigma, r] : ratio) {
      double q = r.first / r.second;
      if (q > best_ratio) {
        best_ratio = q;
        best = sigma;
      }
    }
    if (best_ratio <= 0.0) continue;

    bool certified = false;
    bool all_in = true;
    for (std::uint64_t cfg = 0; cfg < total && all_in; ++cfg)
      if ((cfg & inner) == best && !in_A(cfg)) all_in = false;
    if (all_in) {
      certified = true;
    } else {
      Enclosure num = sum_masks(cm, total, [&](std::uint64_t cfg) { return (cfg & inner) == best && in_A(cfg); });
      Enclosure den = sum_masks(cm, total, [&](std::uint64_t cfg) { return (cfg & inner) == best; });
      certified = (num / den).above(threshold);
    }
    if (!certified) continue;

    // Coordinates of [-n, n] outside the support take their more likely value (ties -> 0).
    Cylinder B = Cylinder::zeros(BigInt(-n), n);
    auto prof = marginal_profile(L, B.lo(), B.hi());
    for (std::size_t i = 0; i < prof.size(); ++i) B.bits()[i] = prof[i] != 0 ? 1 : 0;
    for (std::size_t i = 0; i < support.size(); ++i)
      if ((inner >> i) & 1u) B.bits()[B.offset(support[i])] = static_cast<std::uint8_t>((best >> i) & 1u);
    return B;
  }
  fail(ErrorKind::Infeasible, "no centered cylinder certified; eps too small for the working precision");
}

}  // namespace typeiii
