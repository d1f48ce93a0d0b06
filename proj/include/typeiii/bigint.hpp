#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "typeiii/errors.hpp"

namespace typeiii {

using BigInt = mpz_class;
using Rational = mpq_class;

inline std::string to_decimal(const BigInt& v) { return v.get_str(10); }

inline BigInt parse_bigint(std::string_view text) {
  std::string s(text);
  if (s.empty()) fail(ErrorKind::InvalidArgument, "empty integer");
  std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (start == s.size() ||
      !std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    fail(ErrorKind::InvalidArgument, "not a decimal integer: '" + s + "'");
  if (s[0] == '+') s.erase(0, 1);
  return BigInt(s, 10);
}

/// Accepts "p/q", an integer, or a finite decimal such as "0.05" (read exactly).
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (auto slash = s.find('/'); slash != std::string::npos) {
    BigInt num = parse_bigint(s.substr(0, slash));
    BigInt den = parse_bigint(s.substr(slash + 1));
    if (den == 0) fail(ErrorKind::InvalidArgument, "zero denominator in '" + s + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    if (frac.empty()) frac = "0";
    BigInt w = parse_bigint(whole);
    BigInt f = parse_bigint(frac);
    if (f < 0) fail(ErrorKind::InvalidArgument, "malformed decimal '" + s + "'");
    BigInt scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    Rational q(negative ? BigInt(w * scale - f) : BigInt(w * scale + f), scale);
    q.canonicalize();
    return q;
  }
  return Rational(parse_bigint(s));
}

inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return to_decimal(q.get_num());
  return to_decimal(q.get_num()) + "/" + to_decimal(q.get_den());
}

inline BigInt pow2(std::uint64_t exponent) {
  BigInt r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), exponent);
  return r;
}

/// Number of bits of |v|; 0 for v == 0.
inline std::uint64_t bit_length(const BigInt& v) {
  if (v == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

inline bool fits_int64(const BigInt& v) {
  return v >= BigInt(std::numeric_limits<long>::min()) && v <= BigInt(std::numeric_limits<long>::max()) &&
         sizeof(long) == 8;
}

inline std::int64_t to_int64(const BigInt& v) {
  if (!fits_int64(v)) fail(ErrorKind::Representability, "integer does not fit in 64 bits");
  return v.get_si();
}

inline BigInt shift_left(const BigInt& v, std::uint64_t bits) {
  BigInt r;
  mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), bits);
  return r;
}

/// floor(log2(x)) for rational x > 0, computed exactly.
inline std::int64_t floor_log2(const Rational& x) {
  if (x <= 0) fail(ErrorKind::InvalidArgument, "floor_log2 of a non-positive rational");
  const BigInt& a = x.get_num();
  const BigInt& b = x.get_den();
  std::int64_t j = static_cast<std::int64_t>(bit_length(a)) - static_cast<std::int64_t>(bit_length(b));
  // 2^j <= a/b < 2^(j+1) after at most one downward correction.
  auto ge_pow = [&](std::int64_t e) {
    return e >= 0 ? a >= shift_left(b, static_cast<std::uint64_t>(e))
                  : shift_left(a, static_cast<std::uint64_t>(-e)) >= b;
  };
  if (!ge_pow(j)) --j;
  return j;
}

/// Exact power of two as a rational: 2^e for any signed e.
inline Rational pow2_rational(std::int64_t e) {
  if (e >= 0) return Rational(pow2(static_cast<std::uint64_t>(e)));
  return Rational(BigInt(1), pow2(static_cast<std::uint64_t>(-e)));
}

// ---------------------------------------------------------------------------
// HugeInt: nonnegative integers too large to materialize.
//
// A value is base + sum_i coeff_i * 2^{exp_i}, where exp_i are themselves
// BigInts. m_t = N_t (2 + 2^{3 N_t}) for t >= 3 has ~2^1580 bits, so it lives
// here; everything that has to be walked in memory stays an ordinary BigInt.
//
// Canonical form: the binary expansion is cut wherever a run of zeros is longer
// than kInlineBits; the cluster starting at or below bit kInlineBits is `base`,
// every other cluster is a term with odd coefficient.
// ---------------------------------------------------------------------------
class HugeInt {
 public:
  static constexpr std::uint64_t kInlineBits = 1u << 16;

  struct Term {
    BigInt coeff;  // odd, positive
    BigInt exp;    // > kInlineBits
    bool operator==(const Term&) const = default;
  };

  HugeInt() = default;
  HugeInt(const BigInt& v) : base_(v) {  // NOLINT(google-explicit-constructor)
    if (v < 0) fail(ErrorKind::InvalidArgument, "HugeInt is nonnegative");
    normalize();
  }
  HugeInt(long v) : HugeInt(BigInt(v)) {}  // NOLINT(google-explicit-constructor)

  /// coeff * 2^exp2 for coeff >= 0, exp2 >= 0.
  static HugeInt shifted(const BigInt& coeff, const BigInt& exp2) {
    if (coeff < 0 || exp2 < 0) fail(ErrorKind::InvalidArgument, "HugeInt::shifted needs nonnegative inputs");
    HugeInt h;
    h.pieces_.push_back({coeff, exp2});
    h.normalize();
    return h;
  }

  bool is_inline() const { return terms_.empty(); }

  const BigInt& inline_value() const {
    if (!is_inline())
      fail(ErrorKind::Representability, "value has about 2^" + approx_log2_bits() + " bits");
    return base_;
  }

  const BigInt& base() const { return base_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Exact bit length as a BigInt.
  BigInt bit_length() const {
    if (!terms_.empty()) return terms_.front().exp + BigInt(typeiii::bit_length(terms_.front().coeff));
    return BigInt(typeiii::bit_length(base_));
  }

  HugeInt& operator+=(const HugeInt& o) {
    collect_pieces();
    o.append_pieces(pieces_);
    normalize();
    return *this;
  }
  friend HugeInt operator+(HugeInt a, const HugeInt& b) { return a += b; }

  friend HugeInt operator*(const HugeInt& a, const BigInt& factor) {
    if (factor < 0) fail(ErrorKind::InvalidArgument, "HugeInt scale factor must be nonnegative");
    HugeInt r;
    a.append_pieces(r.pieces_);
    for (auto& p : r.pieces_) p.coeff *= factor;
    r.normalize();
    return r;
  }

  friend std::strong_ordering operator<=>(const HugeInt& a, const HugeInt& b) {
    int s = compare(a, b);
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  friend bool operator==(const HugeInt& a, const HugeInt& b) {
    return a.base_ == b.base_ && a.terms_ == b.terms_;
  }

  /// Decimal when inline, otherwise "c*2^e+...+base" with decimal pieces.
  std::string to_string() const {
    if (is_inline()) return to_decimal(base_);
    std::string out;
    for (const auto& t : terms_) {
      if (!out.empty()) out += "+";
      out += to_decimal(t.coeff) + "*2^" + to_decimal(t.exp);
    }
    if (base_ != 0) out += "+" + to_decimal(base_);
    return out;
  }

  static HugeInt parse(std::string_view text) {
    HugeInt h;
    std::size_t pos = 0;
    std::string s(text);
    if (s.empty()) fail(ErrorKind::InvalidArgument, "empty HugeInt");
    while (pos <= s.size()) {
      std::size_t plus = s.find('+', pos);
      std::string piece = s.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
      if (auto star = piece.find("*2^"); star != std::string::npos) {
        h.pieces_.push_back({parse_bigint(piece.substr(0, star)), parse_bigint(piece.substr(star + 3))});
      } else {
        h.pieces_.push_back({parse_bigint(piece), BigInt(0)});
      }
      if (h.pieces_.back().coeff < 0 || h.pieces_.back().exp < 0)
        fail(ErrorKind::InvalidArgument, "negative piece in HugeInt '" + s + "'");
      if (plus == std::string::npos) break;
      pos = plus + 1;
    }
    h.normalize();
    return h;
  }

 private:
  struct Piece {
    BigInt coeff;
    BigInt exp;
  };

  void append_pieces(std::vector<Piece>& out) const {
    if (base_ != 0) out.push_back({base_, BigInt(0)});
    for (const auto& t : terms_) out.push_back({t.coeff, t.exp});
  }

  void collect_pieces() {
    std::vector<Piece> mine;
    append_pieces(mine);
    base_ = 0;
    terms_.clear();
    for (auto& p : pieces_) mine.push_back(std::move(p));
    pieces_ = std::move(mine);
  }

  std::string approx_log2_bits() const {
    return std::to_string(typeiii::bit_length(bit_length()));
  }

  static void make_odd(Piece& p) {
    if (p.coeff == 0) return;
    mp_bitcnt_t tz = mpz_scan1(p.coeff.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(p.coeff.get_mpz_t(), p.coeff.get_mpz_t(), tz);
    p.exp += static_cast<unsigned long>(tz);
  }

  /// Split a piece at internal zero runs longer than kInlineBits.
  static void split_into(Piece p, std::vector<Piece>& out) {
    const mpz_srcptr c = p.coeff.get_mpz_t();
    mp_bitcnt_t pos = 0;
    mp_bitcnt_t cluster_start = 0;
    while (true) {
      mp_bitcnt_t zero = mpz_scan0(c, pos);
      mp_bitcnt_t one = mpz_scan1(c, zero);
      if (one == static_cast<mp_bitcnt_t>(-1)) break;
      if (one - zero > kInlineBits) {
        BigInt part;
        mpz_fdiv_r_2exp(part.get_mpz_t(), c, zero);
        mpz_fdiv_q_2exp(part.get_mpz_t(), part.get_mpz_t(), cluster_start);
        out.push_back({part, p.exp + static_cast<unsigned long>(cluster_start)});
        cluster_start = one;
      }
      pos = one;
    }
    BigInt rest;
    mpz_fdiv_q_2exp(rest.get_mpz_t(), c, cluster_start);
    out.push_back({rest, p.exp + static_cast<unsigned long>(cluster_start)});
  }

  void normalize() {
    if (!terms_.empty() || base_ != 0) collect_pieces();
    std::vector<Piece> ps;
    for (auto& p : pieces_)
      if (p.coeff != 0) ps.push_back(std::move(p));
    pieces_.clear();
    for (auto& p : ps) make_odd(p);
    std::sort(ps.begin(), ps.end(), [](const Piece& a, const Piece& b) { return a.exp < b.exp; });

    std::vector<Piece> merged;
    for (auto& p : ps) {
      if (!merged.empty()) {
        Piece& cur = merged.back();
        BigInt top = cur.exp + BigInt(typeiii::bit_length(cur.coeff));
        if (p.exp - top <= BigInt(kInlineBits)) {
          BigInt gap = p.exp - cur.exp;
          cur.coeff += shift_left(p.coeff, gap.get_ui());
          make_odd(cur);
          continue;
        }
      }
      merged.push_back(std::move(p));
    }
    std::vector<Piece> clusters;
    for (auto& p : merged) split_into(std::move(p), clusters);

    base_ = 0;
    terms_.clear();
    for (auto& p : clusters) {
      if (p.exp <= BigInt(kInlineBits)) {
        base_ += shift_left(p.coeff, p.exp.get_ui());
      } else {
        terms_.push_back({std::move(p.coeff), std::move(p.exp)});
      }
    }
    std::reverse(terms_.begin(), terms_.end());
  }

  /// Sign of a - b without materializing either side.
  static int compare(const HugeInt& a, const HugeInt& b) {
    struct Signed {
      BigInt coeff;
      BigInt exp;
      int sign;
    };
    std::vector<Signed> all;
    std::vector<Piece> pa, pb;
    a.append_pieces(pa);
    b.append_pieces(pb);
    for (auto& p : pa) all.push_back({p.coeff, p.exp, +1});
    for (auto& p : pb) all.push_back({p.coeff, p.exp, -1});
    std::sort(all.begin(), all.end(), [](const Signed& x, const Signed& y) { return x.exp > y.exp; });
    // suffix_top[i]: largest top bit among pieces i.. (their total is < 2^{suffix_top + 1}).
    std::vector<BigInt> suffix_top(all.size() + 1, BigInt(-1));
    for (std::size_t i = all.size(); i-- > 0;) {
      BigInt top = all[i].exp + BigInt(typeiii::bit_length(all[i].coeff));
      suffix_top[i] = std::max(top, suffix_top[i + 1]);
    }
    // The pieces from i on sum to less than 2^{suffix_top + margin}.
    const BigInt margin = BigInt(typeiii::bit_length(BigInt(static_cast<unsigned long>(all.size())))) + 1;
    BigInt acc = 0;
    BigInt cur = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (acc != 0) {
        if (cur >= suffix_top[i] + margin) return sgn(acc);
        BigInt shift = cur - all[i].exp;
        acc = shift_left(acc, shift.get_ui());
      }
      cur = all[i].exp;
      acc += all[i].sign > 0 ? all[i].coeff : BigInt(-all[i].coeff);
    }
    return sgn(acc);
  }

  BigInt base_ = 0;
  std::vector<Term> terms_;
  std::vector<Piece> pieces_;  // scratch, empty between operations
};

inline std::string to_string(const HugeInt& h) { return h.to_string(); }

}  // namespace typeiii
