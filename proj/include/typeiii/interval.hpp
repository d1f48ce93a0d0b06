#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "typeiii/real.hpp"

namespace typeiii {

namespace detail {
inline double round_down(const Real& r) { return r.to_double(MPFR_RNDD); }
inline double round_up(const Real& r) { return r.to_double(MPFR_RNDU); }

/// a + b in doubles, nudged one ulp outward so the sum stays a bound.
inline double add_down(double a, double b) { return std::nextafter(a + b, -std::numeric_limits<double>::infinity()); }
inline double add_up(double a, double b) { return std::nextafter(a + b, std::numeric_limits<double>::infinity()); }

/// Relative error budget for one correctly rounded MPFR operation at the
/// current precision, expressed in log space.
inline double rounding_log_slack(int prec) { return std::ldexp(1.0, -prec + 1); }
}  // namespace detail

/// A nonnegative real known up to multiplicative error: the true quantity lies
/// in [value * e^logLow, value * e^logHigh].
struct IntervalValue {
  Real value;
  double logLow = 0.0;
  double logHigh = 0.0;

  static IntervalValue one() {
    IntervalValue v;
    mpfr_set_ui(v.value.get(), 1, MPFR_RNDN);
    return v;
  }

  static IntervalValue zero() { return IntervalValue(); }

  /// Exactly 2^e.
  static IntervalValue pow2(long e) {
    IntervalValue v = one();
    mpfr_mul_2si(v.value.get(), v.value.get(), e, MPFR_RNDN);
    return v;
  }

  /// From a rational computed exactly; the only error is the final rounding.
  static IntervalValue from_rational(const Rational& q) {
    if (q < 0) fail(ErrorKind::InvalidArgument, "IntervalValue must be nonnegative");
    IntervalValue v;
    int inexact = mpfr_set_q(v.value.get(), q.get_mpq_t(), MPFR_RNDN);
    if (inexact != 0) {
      double s = detail::rounding_log_slack(v.value.precision());
      v.logLow = -s;
      v.logHigh = s;
    }
    return v;
  }

  /// Exponential of an enclosed logarithm.
  static IntervalValue from_log(const Enclosure& log_range) {
    IntervalValue v;
    Real mid = log_range.mid();
    mpfr_exp(v.value.get(), mid.get(), MPFR_RNDN);
    double s = detail::rounding_log_slack(v.value.precision());
    Real d;
    mpfr_sub(d.get(), log_range.lo().get(), mid.get(), MPFR_RNDD);
    v.logLow = detail::add_down(detail::round_down(d), -s);
    mpfr_sub(d.get(), log_range.hi().get(), mid.get(), MPFR_RNDU);
    v.logHigh = detail::add_up(detail::round_up(d), s);
    return v;
  }

  /// From an enclosure [lo, hi] with lo >= 0.
  static IntervalValue from_enclosure(const Enclosure& e) {
    if (e.lo().sign() < 0) fail(ErrorKind::InvalidArgument, "IntervalValue must be nonnegative");
    if (e.hi().sign() == 0) return zero();
    IntervalValue v;
    if (e.is_point()) {
      mpfr_set(v.value.get(), e.lo().get(), MPFR_RNDN);
      return v;
    }
    v.value = e.mid();
    Real r;
    if (e.lo().sign() == 0) {
      v.logLow = -std::numeric_limits<double>::infinity();
    } else {
      mpfr_div(r.get(), e.lo().get(), v.value.get(), MPFR_RNDD);
      mpfr_log(r.get(), r.get(), MPFR_RNDD);
      v.logLow = std::min(0.0, detail::round_down(r));
    }
    mpfr_div(r.get(), e.hi().get(), v.value.get(), MPFR_RNDU);
    mpfr_log(r.get(), r.get(), MPFR_RNDU);
    v.logHigh = std::max(0.0, detail::round_up(r));
    return v;
  }

  bool is_exact() const { return logLow == 0.0 && logHigh == 0.0; }
  bool is_zero() const { return value.sign() == 0; }

  /// [lower, upper] bounds of the true quantity.
  Enclosure enclosure() const {
    Enclosure e;
    Real f;
    mpfr_set_d(f.get(), logLow, MPFR_RNDD);
    mpfr_exp(f.get(), f.get(), MPFR_RNDD);
    mpfr_mul(e.lo().get(), value.get(), f.get(), MPFR_RNDD);
    mpfr_set_d(f.get(), logHigh, MPFR_RNDU);
    mpfr_exp(f.get(), f.get(), MPFR_RNDU);
    mpfr_mul(e.hi().get(), value.get(), f.get(), MPFR_RNDU);
    return e;
  }

  /// Enclosure of log(true quantity). Requires a positive value.
  Enclosure log_enclosure() const {
    if (value.sign() <= 0) fail(ErrorKind::InvalidArgument, "log of a zero IntervalValue");
    Enclosure e;
    Real t;
    mpfr_log(e.lo().get(), value.get(), MPFR_RNDD);
    mpfr_set_d(t.get(), logLow, MPFR_RNDD);
    mpfr_add(e.lo().get(), e.lo().get(), t.get(), MPFR_RNDD);
    mpfr_log(e.hi().get(), value.get(), MPFR_RNDU);
    mpfr_set_d(t.get(), logHigh, MPFR_RNDU);
    mpfr_add(e.hi().get(), e.hi().get(), t.get(), MPFR_RNDU);
    return e;
  }

  double to_double() const { return value.to_double(); }

  /// Same value, bounds widened by e^{-low} and e^{+high}.
  IntervalValue widened(double low, double high) const {
    IntervalValue v = *this;
    v.logLow = detail::add_down(logLow, -low);
    v.logHigh = detail::add_up(logHigh, high);
    return v;
  }

  friend IntervalValue operator*(const IntervalValue& a, const IntervalValue& b) {
    IntervalValue v;
    int inexact = mpfr_mul(v.value.get(), a.value.get(), b.value.get(), MPFR_RNDN);
    double s = inexact != 0 ? detail::rounding_log_slack(v.value.precision()) : 0.0;
    if (a.logLow != 0.0 || b.logLow != 0.0 || s != 0.0)
      v.logLow = detail::add_down(detail::add_down(a.logLow, b.logLow), -s);
    if (a.logHigh != 0.0 || b.logHigh != 0.0 || s != 0.0)
      v.logHigh = detail::add_up(detail::add_up(a.logHigh, b.logHigh), s);
    return v;
  }

  /// Sum of two nonnegative quantities.
  friend IntervalValue operator+(const IntervalValue& a, const IntervalValue& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_exact() && b.is_exact()) {
      IntervalValue v;
      int inexact = mpfr_add(v.value.get(), a.value.get(), b.value.get(), MPFR_RNDN);
      if (inexact == 0) return v;
    }
    return from_enclosure(a.enclosure() + b.enclosure());
  }

  std::string to_string(int digits = 17) const {
    return value.to_string(digits) + " [log " + std::to_string(logLow) + ", " + std::to_string(logHigh) + "]";
  }
};

}  // namespace typeiii
