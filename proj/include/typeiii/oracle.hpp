#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "typeiii/measure.hpp"

namespace typeiii {

inline constexpr std::size_t kOracleCap = 24;

struct EnumeratedEvent {
  BigInt lo;
  BigInt hi;
  std::string predicateId;
  IntervalValue prob;
  Enclosure bounds;              // rigorous [lower, upper] of the probability
  std::optional<BigInt> count;   // satisfying configurations, when every marginal is 1/2
};

namespace detail {
inline std::size_t oracle_length(const BigInt& lo, const BigInt& hi) {
  if (hi < lo) fail(ErrorKind::InvalidArgument, "empty enumeration range");
  BigInt len = hi - lo + 1;
  if (len > BigInt(static_cast<unsigned long>(kOracleCap)))
    fail(ErrorKind::WindowTooLarge, to_decimal(len) + " coordinates exceed the cap of " + std::to_string(kOracleCap));
  return static_cast<std::size_t>(len.get_ui());
}

inline void fill_bits(WindowConfig& w, std::uint64_t mask) {
  auto& bits = w.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
}
}  // namespace detail

/// Calls visit(config, probability) for all 2^len configurations on [lo, hi],
/// in increasing order of the bitmask (bit i is coordinate lo + i).
template <class Visit>
void enumerate_window(const ParameterLedger& L, const BigInt& lo, const BigInt& hi, Visit&& visit) {
  const std::size_t len = detail::oracle_length(lo, hi);
  CoordinateMeasure cm(L, lo, hi);
  WindowConfig w = Cylinder::zeros(lo, hi);
  const std::uint64_t total = std::uint64_t{1} << len;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    detail::fill_bits(w, mask);
    visit(static_cast<const WindowConfig&>(w), cm.prob(mask));
  }
}

inline std::vector<std::pair<WindowConfig, IntervalValue>> enumerate_window(const ParameterLedger& L, const BigInt& lo,
                                                                            const BigInt& hi) {
  std::vector<std::pair<WindowConfig, IntervalValue>> out;
  enumerate_window(L, lo, hi, [&](const WindowConfig& w, const IntervalValue& p) { out.emplace_back(w, p); });
  return out;
}

/// Probability that `pred(config)` holds, summed by signature group.
template <class Pred>
EnumeratedEvent brute_event_prob(const ParameterLedger& L, const BigInt& lo, const BigInt& hi, Pred&& pred,
                                 std::string predicate_id = "predicate") {
  const std::size_t len = detail::oracle_length(lo, hi);
  CoordinateMeasure cm(L, lo, hi);
  WindowConfig w = Cylinder::zeros(lo, hi);
  const std::uint64_t total = std::uint64_t{1} << len;
  EnumeratedEvent ev;
  ev.lo = lo;
  ev.hi = hi;
  ev.predicateId = std::move(predicate_id);
  std::uint64_t hits = 0;
  ev.bounds = sum_masks(cm, total, [&](std::uint64_t mask) {
    detail::fill_bits(w, mask);
    bool ok = pred(static_cast<const WindowConfig&>(w));
    hits += ok ? 1 : 0;
    return ok;
  });
  if (cm.all_fair()) {
    ev.count = BigInt(static_cast<unsigned long>(hits));
    Rational q(*ev.count, pow2(len));
    q.canonicalize();
    ev.prob = IntervalValue::from_rational(q);
    ev.bounds = Enclosure::from_rational(q);
  } else {
    ev.prob = IntervalValue::from_enclosure(ev.bounds);
  }
  return ev;
}

/// Total enumerated mass on [lo, hi]; should enclose 1.
inline Enclosure total_mass(const ParameterLedger& L, const BigInt& lo, const BigInt& hi) {
  return brute_event_prob(L, lo, hi, [](const WindowConfig&) { return true; }, "true").bounds;
}

}  // namespace typeiii
