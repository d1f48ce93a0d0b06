#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "typeiii/measure.hpp"

namespace typeiii {

/// prod_u lambda_u^{e_u} = exp(sum_u e_u / 2^{k_u}) stored as integer exponents.
struct ExponentVector {
  std::vector<std::int64_t> e;  // e[u-1]
  std::vector<std::int64_t> k;  // k_u

  static ExponentVector zeros(const ParameterLedger& L, int t) {
    ExponentVector v;
    for (int u = 1; u <= t; ++u) {
      v.e.push_back(0);
      v.k.push_back(L.level(u).k);
    }
    return v;
  }

  int levels() const { return static_cast<int>(e.size()); }

  /// Denominator exponent shared by all entries.
  std::int64_t common_scale() const { return k.empty() ? 0 : k.back(); }

  /// sum_u e_u 2^{kmax - k_u}; the value is exp(scaled_numerator / 2^{kmax}).
  BigInt scaled_numerator() const {
    BigInt s = 0;
    const std::int64_t top = common_scale();
    for (std::size_t u = 0; u < e.size(); ++u)
      s += shift_left(BigInt(static_cast<long>(e[u])), static_cast<std::uint64_t>(top - k[u]));
    return s;
  }

  Rational log_value() const {
    Rational q(scaled_numerator(), pow2(static_cast<std::uint64_t>(common_scale())));
    q.canonicalize();
    return q;
  }

  bool is_zero() const {
    for (auto v : e)
      if (v != 0) return false;
    return true;
  }

  IntervalValue value() const {
    if (is_zero()) return IntervalValue::one();
    return IntervalValue::from_log(Enclosure::from_rational(log_value()));
  }

  ExponentVector operator-(const ExponentVector& o) const {
    if (k != o.k) fail(ErrorKind::InvalidArgument, "exponent vectors over different levels");
    ExponentVector r = *this;
    for (std::size_t u = 0; u < e.size(); ++u) r.e[u] -= o.e[u];
    return r;
  }

  bool operator==(const ExponentVector&) const = default;

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t u = 0; u < e.size(); ++u) s += (u ? "," : "") + std::to_string(e[u]);
    return s + ")";
  }
};

/// Index window (-N_u, -M_{u-1}] as [first, last].
struct BiasedBlock {
  BigInt first;
  BigInt last;
};

inline BiasedBlock biased_block(const ParameterLedger& L, int u) {
  return {BigInt(1 - L.level(u).N), BigInt(-L.M_prev(u).inline_value())};
}

/// Upsilon_u(T^n w): ones of w on (-N_u + n, -M_{u-1} + n]. Works for any source
/// with count_ones(a, b).
template <class Source>
std::int64_t upsilon_shifted(const ParameterLedger& L, const Source& w, int u, const BigInt& n) {
  BiasedBlock b = biased_block(L, u);
  return w.count_ones(b.first + n, b.last + n);
}

template <class Source>
std::int64_t upsilon(const ParameterLedger& L, const Source& w, int u) {
  return upsilon_shifted(L, w, u, BigInt(0));
}

/// Upsilon_u(w) for u = 1..t; requires w on (-N_t, 0].
inline ExponentVector f_exponents(const ParameterLedger& L, const WindowConfig& w, int t) {
  BigInt first = BigInt(1) - L.level(t).N;
  if (!w.covers(first, BigInt(0)))
    fail(ErrorKind::InsufficientWindow, "f_" + std::to_string(t) + " needs coordinates [" + to_decimal(first) + ", 0], have " +
                                            w.range_string());
  ExponentVector v = ExponentVector::zeros(L, t);
  for (int u = 1; u <= t; ++u) v.e[static_cast<std::size_t>(u - 1)] = upsilon(L, w, u);
  return v;
}

/// (Upsilon_u o T^n - Upsilon_u)_{u <= t}; equals log (T^n)' on the finite window
/// when t = t(n).
template <class Source>
ExponentVector telescoped_exponents(const ParameterLedger& L, const Source& w, const BigInt& n, int t) {
  ExponentVector v = ExponentVector::zeros(L, t);
  for (int u = 1; u <= t; ++u)
    v.e[static_cast<std::size_t>(u - 1)] = upsilon_shifted(L, w, u, n) - upsilon(L, w, u);
  return v;
}

/// sum_{k=a}^{b} [log P_{k-n}(w_k) - log P_k(w_k)] as a symbolic form.
inline LogForm rn_partial_form(const ParameterLedger& L, const WindowConfig& w, const BigInt& n, const BigInt& a,
                               const BigInt& b) {
  LogForm f(L.t_max());
  if (b < a) return f;
  if (!w.covers(a, b))
    fail(ErrorKind::InsufficientWindow,
         "derivative needs coordinates [" + to_decimal(a) + ", " + to_decimal(b) + "], have " + w.range_string());
  auto prof = marginal_profile(L, a - n, b);  // codes for k-n then k
  const std::size_t shift = static_cast<std::size_t>(n.get_ui());
  const std::size_t len = static_cast<std::size_t>(BigInt(b - a + 1).get_ui());
  const std::size_t base = w.offset(a);
  for (std::size_t i = 0; i < len; ++i) {
    std::int16_t num = prof[i];
    std::int16_t den = prof[i + shift];
    if (num == 0 && den == 0) continue;
    int bit = w.bits()[base + i];
    f.add(num, bit, +1);
    f.add(den, bit, -1);
  }
  return f;
}

/// Coordinates rn_finite reads for a given n: (-N_{t(n)}, n-1].
inline std::pair<BigInt, BigInt> rn_window(const ParameterLedger& L, const BigInt& n) {
  int t = t_of(L, n);
  return {BigInt(1 - L.level(t).N), BigInt(n - 1)};
}

inline LogForm rn_finite_form(const ParameterLedger& L, const WindowConfig& w, const BigInt& n) {
  if (n < 0) fail(ErrorKind::InvalidArgument, "n must be >= 0");
  if (n == 0) return LogForm(L.t_max());
  auto [a, b] = rn_window(L, n);
  return rn_partial_form(L, w, n, a, b);
}

/// prod_{k in (-N_{t(n)}, n-1]} P_{k-n}(w_k) / P_k(w_k).
inline IntervalValue rn_finite(const ParameterLedger& L, const WindowConfig& w, const BigInt& n) {
  if (n == 0) return IntervalValue::one();
  return rn_finite_form(L, w, n).evaluate(L);
}

/// Rational upper bound converted to a double that is not smaller.
inline double rational_up(const Rational& q) {
  Real r;
  mpfr_set_q(r.get(), q.get_mpq_t(), MPFR_RNDU);
  return r.to_double(MPFR_RNDU);
}

struct ApproxReport {
  BigInt n;
  int tn = 1;
  IntervalValue finite;       // rn_finite
  IntervalValue exact;        // finite widened by the tail
  ExponentVector telescoped;  // (Upsilon_u o T^n - Upsilon_u)_{u <= t(n)}
  bool lemmaRange = false;    // N_{t(n)-1} <= n < M_{t(n)-1}
  std::optional<ExponentVector> lemma;  // u < t(n)
  Rational hBound;            // M_{t(n)-1} / 2^{k_{t(n)}}
  Rational tailBound;         // sum_{u > t(n)} eps_u
  double hBoundLog = 0.0;
  double tailBoundLog = 0.0;
  double kBoundLog = 0.0;     // hBoundLog + tailBoundLog
  double telescopeGap = 0.0;  // upper bound on |log finite - log telescoped|
  Rational lemmaGap;          // |log telescoped - log lemma|, exact
  bool lemmaHolds = true;
};

inline ApproxReport rn_derivative(const ParameterLedger& L, const WindowConfig& w, const BigInt& n) {
  ApproxReport r;
  r.n = n;
  if (n == 0) {
    r.finite = IntervalValue::one();
    r.exact = IntervalValue::one();
    r.telescoped = ExponentVector::zeros(L, 1);
    return r;
  }
  r.tn = t_of(L, n);
  r.finite = rn_finite(L, w, n);
  r.tailBound = L.tail_after(r.tn);
  r.tailBoundLog = rational_up(r.tailBound);
  r.exact = r.finite.widened(r.tailBoundLog, r.tailBoundLog);
  r.telescoped = telescoped_exponents(L, w, n, r.tn);

  Enclosure gap = r.finite.log_enclosure() - Enclosure::from_rational(r.telescoped.log_value());
  r.telescopeGap = std::max(std::fabs(gap.lo().to_double(MPFR_RNDD)), std::fabs(gap.hi().to_double(MPFR_RNDU)));

  if (r.tn >= 2) {
    const LevelParams& prev = L.level(r.tn - 1);
    const BigInt M_prev = prev.M.inline_value();
    r.lemmaRange = n >= prev.N && n < M_prev;
    r.hBound = Rational(M_prev, pow2(static_cast<std::uint64_t>(L.level(r.tn).k)));
    r.hBound.canonicalize();
    r.hBoundLog = rational_up(r.hBound);
    ExponentVector lem = r.telescoped;
    lem.e.pop_back();
    lem.k.pop_back();
    r.lemmaGap = abs(Rational(r.telescoped.log_value() - lem.log_value()));
    r.lemma = std::move(lem);
    if (r.lemmaRange) r.lemmaHolds = r.lemmaGap <= r.hBound;
  }
  r.kBoundLog = detail::add_up(r.hBoundLog, r.tailBoundLog);
  return r;
}

struct ChainReport {
  Rational gap;    // |log rn(w, n+m) - log rn(T^m w, n) - log rn(w, m)|
  Rational bound;  // sum of the three tail bounds
  bool exact = true;   // all three logs were exact dyadic
  double gapUpper = 0.0;
  bool ok = false;
};

inline ChainReport chain_check(const ParameterLedger& L, const WindowConfig& w, const BigInt& n, const BigInt& m) {
  if (n < 0 || m < 0) fail(ErrorKind::InvalidArgument, "chain_check needs n, m >= 0");
  ChainReport r;
  const WindowConfig Tw = w.shifted_by(m);
  LogForm a = rn_finite_form(L, w, n + m);
  LogForm b = rn_finite_form(L, Tw, n);
  LogForm c = rn_finite_form(L, w, m);
  auto tail = [&](const BigInt& j) { return j == 0 ? Rational(0) : L.tail_after(t_of(L, j)); };
  r.bound = tail(n + m) + tail(n) + tail(m);
  if (a.is_dyadic() && b.is_dyadic() && c.is_dyadic()) {
    r.gap = abs(Rational(a.dyadic_part(L) - b.dyadic_part(L) - c.dyadic_part(L)));
    r.gapUpper = rational_up(r.gap);
    r.ok = r.gap <= r.bound;
    return r;
  }
  r.exact = false;
  Enclosure g = a.log_enclosure(L) - b.log_enclosure(L) - c.log_enclosure(L);
  r.gapUpper = std::max(std::fabs(g.lo().to_double(MPFR_RNDD)), std::fabs(g.hi().to_double(MPFR_RNDU)));
  r.ok = r.gapUpper <= rational_up(r.bound);
  return r;
}

}  // namespace typeiii
