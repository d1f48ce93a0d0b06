#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "typeiii/cocycle.hpp"
#include "typeiii/rng.hpp"

namespace typeiii {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

inline WilsonInterval wilson(double hits, double trials, double z = kWilsonZ95) {
  if (trials <= 0) return {0.0, 1.0};
  double p = hits / trials;
  double z2 = z * z;
  double denom = 1.0 + z2 / trials;
  double center = (p + z2 / (2 * trials)) / denom;
  double half = z * std::sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom;
  WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (hits <= 0) w.low = 0.0;
  if (hits >= trials) w.high = 1.0;
  return w;
}

/// Draws coordinates from their marginals. A biased bit is 1 when a 64-bit word
/// falls below floor(2^64 * lambda/(1+lambda)), so draws are exact integer
/// comparisons and identical on every platform.
class MarginalSampler {
 public:
  explicit MarginalSampler(const ParameterLedger& L) : L_(&L) {
    for (int t = 1; t <= L.t_max(); ++t) {
      Real p = marginal_prob(L, {t, true}, 1).mid();
      mpfr_mul_2ui(p.get(), p.get(), 64, MPFR_RNDN);
      BigInt th;
      mpfr_get_z(th.get_mpz_t(), p.get(), MPFR_RNDD);
      thresholds_.push_back(th.get_ui());
    }
  }

  std::uint8_t draw(std::int16_t code, std::uint64_t word) const {
    if (code == 0) return static_cast<std::uint8_t>(word >> 63);
    return word < thresholds_[static_cast<std::size_t>(code - 1)] ? 1 : 0;
  }

  /// Fills [lo, hi] using consecutive words of `rng`.
  Cylinder sample(const BigInt& lo, const BigInt& hi, RngStream& rng) const {
    Cylinder w = Cylinder::zeros(lo, hi);
    auto prof = marginal_profile(*L_, lo, hi);
    for (std::size_t i = 0; i < prof.size(); ++i) w.bits()[i] = draw(prof[i], rng.next());
    return w;
  }

  const ParameterLedger& ledger() const { return *L_; }

 private:
  const ParameterLedger* L_;
  std::vector<std::uint64_t> thresholds_;
};

inline WindowConfig sample_window(const ParameterLedger& L, const BigInt& lo, const BigInt& hi, RngStream& rng) {
  if (hi < lo) fail(ErrorKind::InvalidArgument, "sample_window needs lo <= hi");
  return MarginalSampler(L).sample(lo, hi, rng);
}

/// A point known on several disjoint ranges.
class SegmentedWindow {
 public:
  SegmentedWindow() = default;

  /// Merges overlapping or adjacent ranges, then samples each.
  static SegmentedWindow sample(const MarginalSampler& s, std::vector<std::pair<BigInt, BigInt>> ranges, RngStream& rng) {
    SegmentedWindow w;
    for (const auto& [a, b] : merge(std::move(ranges))) w.segs_.push_back(s.sample(a, b, rng));
    return w;
  }

  static std::vector<std::pair<BigInt, BigInt>> merge(std::vector<std::pair<BigInt, BigInt>> ranges) {
    ranges.erase(std::remove_if(ranges.begin(), ranges.end(), [](const auto& r) { return r.second < r.first; }),
                 ranges.end());
    std::sort(ranges.begin(), ranges.end());
    std::vector<std::pair<BigInt, BigInt>> out;
    for (auto& r : ranges) {
      if (!out.empty() && r.first <= out.back().second + 1) {
        out.back().second = std::max(out.back().second, r.second);
      } else {
        out.push_back(std::move(r));
      }
    }
    return out;
  }

  const std::vector<Cylinder>& segments() const { return segs_; }

  std::int64_t count_ones(const BigInt& a, const BigInt& b) const {
    if (b < a) return 0;
    return segment_for(a, b).count_ones(a, b);
  }

  bool satisfies(const Cylinder& c) const {
    if (c.empty()) return true;
    return segment_for(c.lo(), c.hi()).satisfies(c);
  }

  /// Overwrites the sampled bits on c's range with c's bits.
  void assign(const Cylinder& c) {
    if (c.empty()) return;
    Cylinder& s = const_cast<Cylinder&>(segment_for(c.lo(), c.hi()));
    std::copy(c.bits().begin(), c.bits().end(), s.bits().begin() + static_cast<std::ptrdiff_t>(s.offset(c.lo())));
  }

 private:
  const Cylinder& segment_for(const BigInt& a, const BigInt& b) const {
    auto it = std::upper_bound(segs_.begin(), segs_.end(), a, [](const BigInt& x, const Cylinder& s) { return x < s.lo(); });
    if (it != segs_.begin()) {
      const Cylinder& s = *std::prev(it);
      if (s.covers(a, b)) return s;
    }
    fail(ErrorKind::InsufficientWindow, "coordinates [" + to_decimal(a) + ", " + to_decimal(b) + "] not sampled");
  }

  std::vector<Cylinder> segs_;
};

// ---------------------------------------------------------------------------
// Target values and band classification
// ---------------------------------------------------------------------------

/// A target a > 0 for the ratio set, either lambda_t (exact log) or a rational.
struct RatioTarget {
  std::string label;
  std::optional<Rational> exactLog;
  Enclosure logEnclosure;

  static RatioTarget lambda(const ParameterLedger& L, int t) {
    RatioTarget r;
    r.label = "lambda_" + std::to_string(t);
    r.exactLog = L.level(t).log_lambda();
    r.logEnclosure = Enclosure::from_rational(*r.exactLog);
    return r;
  }

  static RatioTarget value(const Rational& a) {
    if (a <= 0) fail(ErrorKind::InvalidArgument, "ratio target must be positive");
    RatioTarget r;
    r.label = to_string(a);
    if (a == 1) r.exactLog = Rational(0);
    r.logEnclosure = Enclosure::from_rational(a).log();
    return r;
  }

  /// "lambda:t" or a rational such as "1" or "3/2".
  static RatioTarget parse(const ParameterLedger& L, const std::string& text) {
    if (text.rfind("lambda:", 0) == 0) return lambda(L, std::stoi(text.substr(7)));
    return value(parse_rational(text));
  }
};

enum class BandResult { Hit, Miss, Indeterminate };

/// Classifies log-derivative range [center - tail, center + tail] against the
/// band [log a - eps, log a + eps]. Hit only if the whole range is inside.
inline BandResult classify(const Rational& center, const Rational& tail, const RatioTarget& a, const Rational& eps) {
  if (a.exactLog) {
    Rational lo = center - tail, hi = center + tail;
    Rational blo = *a.exactLog - eps, bhi = *a.exactLog + eps;
    if (lo >= blo && hi <= bhi) return BandResult::Hit;
    if (hi < blo || lo > bhi) return BandResult::Miss;
    return BandResult::Indeterminate;
  }
  Enclosure d = Enclosure::from_rational(center) - a.logEnclosure;
  Enclosure t = Enclosure::from_rational(tail);
  Enclosure e = Enclosure::from_rational(eps);
  Enclosure lo = d - t, hi = d + t;
  if (mpfr_greaterequal_p(lo.lo().get(), (-e).hi().get()) && mpfr_lessequal_p(hi.hi().get(), e.lo().get()))
    return BandResult::Hit;
  if (hi.below(-e) || lo.above(e)) return BandResult::Miss;
  return BandResult::Indeterminate;
}

// ---------------------------------------------------------------------------
// Ratio-set scan
// ---------------------------------------------------------------------------

struct RatioScanRow {
  BigInt n;
  std::uint64_t hits = 0;
  std::uint64_t indeterminate = 0;
  std::uint64_t trials = 0;
  double estimate = 0.0;
  double wilsonLow = 0.0;
  double wilsonHigh = 1.0;
};

enum class Verdict { Evidence, NoEvidence };

inline std::string to_string(Verdict v) { return v == Verdict::Evidence ? "evidence" : "noEvidence"; }

struct RatioScanResult {
  std::string a;
  Rational eps;
  std::vector<RatioScanRow> rows;
  Verdict verdict = Verdict::NoEvidence;
};

/// Ranges a sample needs for the derivative at n: the biased blocks of levels
/// u <= t(n) and their images under T^n.
inline std::vector<std::pair<BigInt, BigInt>> derivative_ranges(const ParameterLedger& L, const BigInt& n) {
  std::vector<std::pair<BigInt, BigInt>> r;
  if (n == 0) return r;
  int t = t_of(L, n);
  for (int u = 1; u <= t; ++u) {
    BiasedBlock b = biased_block(L, u);
    r.emplace_back(b.first, b.last);
    r.emplace_back(b.first + n, b.last + n);
  }
  return r;
}

/// log of the finite derivative (exact, via the telescoping identity) and the tail bound.
template <class Source>
std::pair<Rational, Rational> log_derivative(const ParameterLedger& L, const Source& w, const BigInt& n) {
  if (n == 0) return {Rational(0), Rational(0)};
  int t = t_of(L, n);
  return {telescoped_exponents(L, w, n, t).log_value(), L.tail_after(t)};
}

inline RatioScanResult ratio_set_scan(const ParameterLedger& L, const CylinderUnion& A, const RatioTarget& a,
                                      const Rational& eps, const std::vector<BigInt>& schedule, std::uint64_t trials,
                                      std::uint64_t seed) {
  if (A.empty()) fail(ErrorKind::NullSet, "A is an empty union");
  if (schedule.empty()) fail(ErrorKind::InvalidArgument, "schedule is empty");
  if (trials == 0) fail(ErrorKind::InvalidArgument, "trials must be positive");
  if (eps < 0) fail(ErrorKind::InvalidArgument, "eps must be >= 0");
  MarginalSampler sampler(L);
  RatioScanResult res;
  res.a = a.label;
  res.eps = eps;
  for (std::size_t si = 0; si < schedule.size(); ++si) {
    const BigInt& n = schedule[si];
    if (n < 0) fail(ErrorKind::InvalidArgument, "schedule entries must be >= 0");
    if (n > 0) t_of(L, n);  // ledger must reach n
    auto ranges = derivative_ranges(L, n);
    for (const auto& c : A) {
      if (c.empty()) continue;
      ranges.emplace_back(c.lo(), c.hi());
      ranges.emplace_back(c.lo() + n, c.hi() + n);
    }
    auto in_A = [&](const SegmentedWindow& w, const BigInt& shift) {
      for (const auto& c : A)
        if (w.satisfies(c.shifted_by(BigInt(-shift)))) return true;
      return false;
    };
    RatioScanRow row;
    row.n = n;
    row.trials = trials;
    for (std::uint64_t tr = 0; tr < trials; ++tr) {
      RngStream rng(seed, (static_cast<std::uint64_t>(si) << 40) | tr);
      SegmentedWindow w = SegmentedWindow::sample(sampler, ranges, rng);
      if (!in_A(w, 0) || !in_A(w, n)) continue;
      auto [center, tail] = log_derivative(L, w, n);
      switch (classify(center, tail, a, eps)) {
        case BandResult::Hit: ++row.hits; break;
        case BandResult::Indeterminate: ++row.indeterminate; break;
        case BandResult::Miss: break;
      }
    }
    row.estimate = static_cast<double>(row.hits) / static_cast<double>(row.trials);
    WilsonInterval wi = wilson(static_cast<double>(row.hits), static_cast<double>(row.trials));
    row.wilsonLow = wi.low;
    row.wilsonHigh = wi.high;
    if (row.wilsonLow > 0) res.verdict = Verdict::Evidence;
    res.rows.push_back(std::move(row));
  }
  return res;
}

inline std::string scan_csv(const RatioScanResult& r) {
  std::string out = "n,hits,indeterminate,trials,estimate,wilson_low,wilson_high\n";
  char buf[128];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, ",%llu,%llu,%llu,%.17g,%.17g,%.17g\n", static_cast<unsigned long long>(row.hits),
                  static_cast<unsigned long long>(row.indeterminate), static_cast<unsigned long long>(row.trials),
                  row.estimate, row.wilsonLow, row.wilsonHigh);
    out += to_decimal(row.n) + buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// First return map
// ---------------------------------------------------------------------------

struct FirstReturn {
  BigInt phi;  // l * N_tau
  BigInt l;
  IntervalValue derivative;
};

/// Radius r of a centered cylinder [b]_{-r}^{r}; the empty cylinder has none.
inline std::optional<BigInt> centered_radius(const Cylinder& B) {
  if (B.empty()) return std::nullopt;
  if (B.lo() != -B.hi()) fail(ErrorKind::CylinderShape, "B must be centered, got " + B.range_string());
  return B.hi();
}

/// Least l >= 2 (l * N_tau <= m_tau) with T^{l N_tau} w in B and (T^{l N_tau})'(w) within
/// lambda_{t0} e^{+-eps}.
inline std::optional<FirstReturn> first_return_search(const ParameterLedger& L, const WindowConfig& w, const Cylinder& B,
                                                      int t0, const Rational& eps, int tau) {
  if (t0 < 1 || t0 > L.t_max()) fail(ErrorKind::InvalidArgument, "t0 out of range");
  centered_radius(B);
  const LevelParams& lt = L.level(tau);
  if (!lt.m.is_inline())
    fail(ErrorKind::Infeasible, "m_" + std::to_string(tau) + " has " + lt.m.bit_length().get_str() + " bits");
  const BigInt blocks = lt.m.inline_value() / lt.N;
  RatioTarget a = RatioTarget::lambda(L, t0);
  for (BigInt l = 2; l <= blocks; ++l) {
    const BigInt n = l * lt.N;
    const std::string where = "l=" + to_decimal(l) + " (n=" + to_decimal(n) + ")";
    Cylinder shifted = B.shifted_by(BigInt(-n));
    if (!B.empty() && !w.covers(shifted.lo(), shifted.hi()))
      fail(ErrorKind::InsufficientWindow, where + ": window " + w.range_string() + " does not cover " + shifted.range_string());
    if (!w.satisfies(shifted)) continue;
    std::pair<Rational, Rational> d;
    try {
      d = log_derivative(L, w, n);
    } catch (const LedgerExhausted&) {
      throw;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientWindow) throw;
      fail(ErrorKind::InsufficientWindow, where + ": " + e.what());
    }
    BandResult c = classify(d.first, d.second, a, eps);
    if (c == BandResult::Indeterminate)
      fail(ErrorKind::InsufficientWindow, where + ": derivative interval straddles the band edge");
    if (c == BandResult::Hit) {
      double tl = rational_up(d.second);
      IntervalValue v = IntervalValue::from_log(Enclosure::from_rational(d.first)).widened(tl, tl);
      return FirstReturn{n, l, v};
    }
  }
  return std::nullopt;
}

}  // namespace typeiii
