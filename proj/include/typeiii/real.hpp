#pragma once

#include <mpfr.h>

#include <atomic>
#include <cstdint>
#include <string>
#include <utility>

#include "typeiii/bigint.hpp"
#include "typeiii/errors.hpp"

namespace typeiii {

namespace detail {
inline std::atomic<int>& precision_setting() {
  static std::atomic<int> bits{64};
  return bits;
}
}  // namespace detail

/// Working precision (bits) for every Real created without an explicit one.
inline int precision_bits() { return detail::precision_setting().load(std::memory_order_relaxed); }

inline void set_precision_bits(int bits) {
  if (bits < 64 || bits > 4096) fail(ErrorKind::InvalidArgument, "precision must be in [64, 4096] bits");
  detail::precision_setting().store(bits, std::memory_order_relaxed);
}

/// RAII owner of one mpfr_t.
class Real {
 public:
  Real() : Real(precision_bits()) {}
  explicit Real(int prec) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  static Real from_double(double d) {
    Real r(std::max(precision_bits(), 53));
    mpfr_set_d(r.v_, d, MPFR_RNDN);
    return r;
  }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  int precision() const { return static_cast<int>(mpfr_get_prec(v_)); }

  double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(v_, rnd); }

  /// Scientific notation with `digits` significant digits.
  std::string to_string(int digits = 20) const {
    if (mpfr_zero_p(v_)) return "0";
    mpfr_exp_t exp = 0;
    char* raw = mpfr_get_str(nullptr, &exp, 10, static_cast<std::size_t>(digits), v_, MPFR_RNDN);
    std::string mant(raw);
    mpfr_free_str(raw);
    bool negative = !mant.empty() && mant[0] == '-';
    if (negative) mant.erase(0, 1);
    std::string out = negative ? "-" : "";
    out += mant.substr(0, 1);
    if (mant.size() > 1) out += "." + mant.substr(1);
    out += "e" + std::to_string(static_cast<long>(exp) - 1);
    return out;
  }

  int sign() const { return mpfr_sgn(v_); }

 private:
  mpfr_t v_;
};

/// A closed interval [lo, hi] of reals with outward (directed) rounding.
/// Every operation returns an enclosure of the exact result.
class Enclosure {
 public:
  Enclosure() = default;

  static Enclosure exact_zero() { return Enclosure(); }

  static Enclosure from_int(std::int64_t v) {
    Enclosure e;
    mpfr_set_si(e.lo_.get(), v, MPFR_RNDD);
    mpfr_set_si(e.hi_.get(), v, MPFR_RNDU);
    return e;
  }

  static Enclosure from_bigint(const BigInt& v) {
    Enclosure e;
    mpfr_set_z(e.lo_.get(), v.get_mpz_t(), MPFR_RNDD);
    mpfr_set_z(e.hi_.get(), v.get_mpz_t(), MPFR_RNDU);
    return e;
  }

  static Enclosure from_rational(const Rational& q) {
    Enclosure e;
    mpfr_set_q(e.lo_.get(), q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(e.hi_.get(), q.get_mpq_t(), MPFR_RNDU);
    return e;
  }

  /// v * 2^{-shift}
  static Enclosure dyadic(std::int64_t v, std::int64_t shift) {
    Enclosure e = from_int(v);
    mpfr_div_2si(e.lo_.get(), e.lo_.get(), shift, MPFR_RNDD);
    mpfr_div_2si(e.hi_.get(), e.hi_.get(), shift, MPFR_RNDU);
    return e;
  }

  static Enclosure ln2() {
    Enclosure e;
    mpfr_const_log2(e.lo_.get(), MPFR_RNDD);
    mpfr_const_log2(e.hi_.get(), MPFR_RNDU);
    return e;
  }

  /// Enclosure of a double taken as an exact value.
  static Enclosure from_double(double d) {
    Enclosure e;
    mpfr_set_d(e.lo_.get(), d, MPFR_RNDD);
    mpfr_set_d(e.hi_.get(), d, MPFR_RNDU);
    return e;
  }

  static Enclosure hull(const Real& a, const Real& b) {
    Enclosure e;
    mpfr_min(e.lo_.get(), a.get(), b.get(), MPFR_RNDD);
    mpfr_max(e.hi_.get(), a.get(), b.get(), MPFR_RNDU);
    return e;
  }

  const Real& lo() const { return lo_; }
  const Real& hi() const { return hi_; }
  Real& lo() { return lo_; }
  Real& hi() { return hi_; }

  Real mid() const {
    Real m;
    mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
    mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
    return m;
  }

  double width() const {
    Real w;
    mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
    return w.to_double(MPFR_RNDU);
  }

  bool is_point() const { return mpfr_equal_p(lo_.get(), hi_.get()) != 0; }

  bool contains(const Enclosure& o) const {
    return mpfr_lessequal_p(lo_.get(), o.lo_.get()) && mpfr_lessequal_p(o.hi_.get(), hi_.get());
  }

  bool overlaps(const Enclosure& o) const {
    return mpfr_lessequal_p(lo_.get(), o.hi_.get()) && mpfr_lessequal_p(o.lo_.get(), hi_.get());
  }

  /// Entirely strictly below / above another enclosure.
  bool below(const Enclosure& o) const { return mpfr_less_p(hi_.get(), o.lo_.get()) != 0; }
  bool above(const Enclosure& o) const { return mpfr_greater_p(lo_.get(), o.hi_.get()) != 0; }

  Enclosure operator-() const {
    Enclosure e;
    mpfr_neg(e.lo_.get(), hi_.get(), MPFR_RNDD);
    mpfr_neg(e.hi_.get(), lo_.get(), MPFR_RNDU);
    return e;
  }

  friend Enclosure operator+(const Enclosure& a, const Enclosure& b) {
    Enclosure e;
    mpfr_add(e.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
    mpfr_add(e.hi_.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
    return e;
  }

  friend Enclosure operator-(const Enclosure& a, const Enclosure& b) { return a + (-b); }

  friend Enclosure operator*(const Enclosure& a, const Enclosure& b) {
    // General sign case: extremes among the four endpoint products.
    Enclosure e;
    Real t(e.lo_.precision());
    bool first = true;
    for (const Real* x : {&a.lo_, &a.hi_}) {
      for (const Real* y : {&b.lo_, &b.hi_}) {
        mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDD);
        if (first || mpfr_less_p(t.get(), e.lo_.get())) mpfr_set(e.lo_.get(), t.get(), MPFR_RNDD);
        mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDU);
        if (first || mpfr_greater_p(t.get(), e.hi_.get())) mpfr_set(e.hi_.get(), t.get(), MPFR_RNDU);
        first = false;
      }
    }
    return e;
  }

  /// Multiply by an exact integer.
  Enclosure scaled(std::int64_t k) const {
    Enclosure e;
    if (k >= 0) {
      mpfr_mul_si(e.lo_.get(), lo_.get(), k, MPFR_RNDD);
      mpfr_mul_si(e.hi_.get(), hi_.get(), k, MPFR_RNDU);
    } else {
      mpfr_mul_si(e.lo_.get(), hi_.get(), k, MPFR_RNDD);
      mpfr_mul_si(e.hi_.get(), lo_.get(), k, MPFR_RNDU);
    }
    return e;
  }

  /// Divide by a positive integer.
  Enclosure divided(std::int64_t k) const {
    if (k <= 0) fail(ErrorKind::InvalidArgument, "Enclosure::divided needs a positive divisor");
    Enclosure e;
    mpfr_div_si(e.lo_.get(), lo_.get(), k, MPFR_RNDD);
    mpfr_div_si(e.hi_.get(), hi_.get(), k, MPFR_RNDU);
    return e;
  }

  friend Enclosure operator/(const Enclosure& a, const Enclosure& b) {
    if (mpfr_sgn(b.lo_.get()) <= 0) fail(ErrorKind::InvalidArgument, "Enclosure division by a non-positive range");
    Enclosure inv;
    mpfr_ui_div(inv.lo_.get(), 1, b.hi_.get(), MPFR_RNDD);
    mpfr_ui_div(inv.hi_.get(), 1, b.lo_.get(), MPFR_RNDU);
    return a * inv;
  }

  Enclosure exp() const {
    Enclosure e;
    mpfr_exp(e.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_exp(e.hi_.get(), hi_.get(), MPFR_RNDU);
    return e;
  }

  Enclosure log() const {
    if (mpfr_sgn(lo_.get()) <= 0) fail(ErrorKind::InvalidArgument, "log of a non-positive range");
    Enclosure e;
    mpfr_log(e.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_log(e.hi_.get(), hi_.get(), MPFR_RNDU);
    return e;
  }

  Enclosure log1p() const {
    Enclosure e;
    mpfr_log1p(e.lo_.get(), lo_.get(), MPFR_RNDD);
    mpfr_log1p(e.hi_.get(), hi_.get(), MPFR_RNDU);
    return e;
  }

  Enclosure square() const {
    if (mpfr_sgn(lo_.get()) >= 0) return *this * *this;
    if (mpfr_sgn(hi_.get()) <= 0) return (-*this) * (-*this);
    Enclosure e;
    Real t;
    mpfr_sqr(e.hi_.get(), lo_.get(), MPFR_RNDU);
    mpfr_sqr(t.get(), hi_.get(), MPFR_RNDU);
    mpfr_max(e.hi_.get(), e.hi_.get(), t.get(), MPFR_RNDU);
    return e;
  }

  std::string to_string(int digits = 20) const { return "[" + lo_.to_string(digits) + ", " + hi_.to_string(digits) + "]"; }

 private:
  Real lo_;
  Real hi_;
};

}  // namespace typeiii
