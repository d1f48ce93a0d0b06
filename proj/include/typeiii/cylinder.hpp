#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "typeiii/bigint.hpp"
#include "typeiii/errors.hpp"

namespace typeiii {

/// A 0/1 assignment on the integer range [lo, hi]. With no bits it is the empty
/// cylinder, i.e. the whole space.
class Cylinder {
 public:
  Cylinder() = default;
  Cylinder(BigInt lo, std::vector<std::uint8_t> bits) : lo_(std::move(lo)), bits_(std::move(bits)) {
    for (auto b : bits_)
      if (b > 1) fail(ErrorKind::InvalidArgument, "cylinder bits must be 0 or 1");
  }

  static Cylinder zeros(const BigInt& lo, const BigInt& hi) {
    if (hi < lo) return Cylinder();
    return Cylinder(lo, std::vector<std::uint8_t>(checked_length(lo, hi), 0));
  }

  /// "lo..hi:bits", or "" / "empty" for the whole space.
  static Cylinder parse(const std::string& text) {
    if (text.empty() || text == "empty") return Cylinder();
    auto dots = text.find("..");
    auto colon = text.find(':');
    if (dots == std::string::npos || colon == std::string::npos || colon < dots)
      fail(ErrorKind::InvalidArgument, "cylinder must look like 'lo..hi:bits', got '" + text + "'");
    BigInt lo = parse_bigint(text.substr(0, dots));
    BigInt hi = parse_bigint(text.substr(dots + 2, colon - dots - 2));
    std::string bits = text.substr(colon + 1);
    if (hi < lo) fail(ErrorKind::InvalidArgument, "cylinder range has hi < lo in '" + text + "'");
    if (BigInt(hi - lo + 1) != BigInt(static_cast<unsigned long>(bits.size())))
      fail(ErrorKind::InvalidArgument, "cylinder '" + text + "' has " + std::to_string(bits.size()) +
                                           " bits for a range of length " + to_decimal(hi - lo + 1));
    std::vector<std::uint8_t> v;
    v.reserve(bits.size());
    for (char c : bits) {
      if (c != '0' && c != '1') fail(ErrorKind::InvalidArgument, "cylinder bits must be 0/1 in '" + text + "'");
      v.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return Cylinder(lo, std::move(v));
  }

  std::string to_string() const {
    if (empty()) return "empty";
    std::string bits;
    bits.reserve(bits_.size());
    for (auto b : bits_) bits.push_back(static_cast<char>('0' + b));
    return to_decimal(lo_) + ".." + to_decimal(hi()) + ":" + bits;
  }

  bool empty() const { return bits_.empty(); }
  std::size_t size() const { return bits_.size(); }
  const BigInt& lo() const { return lo_; }
  BigInt hi() const { return lo_ + static_cast<unsigned long>(bits_.size()) - 1; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::vector<std::uint8_t>& bits() { return bits_; }

  bool covers(const BigInt& a, const BigInt& b) const {
    if (b < a) return true;
    return !empty() && a >= lo_ && b <= hi();
  }

  bool contains(const BigInt& k) const { return covers(k, k); }

  /// Offset of coordinate k inside the bit vector; k must be covered.
  std::size_t offset(const BigInt& k) const {
    if (!contains(k)) fail(ErrorKind::InsufficientWindow, "coordinate " + to_decimal(k) + " outside " + range_string());
    return static_cast<std::size_t>(BigInt(k - lo_).get_ui());
  }

  std::uint8_t at(const BigInt& k) const { return bits_[offset(k)]; }

  /// Ones among coordinates [a, b]; an empty range counts 0.
  std::int64_t count_ones(const BigInt& a, const BigInt& b) const {
    if (b < a) return 0;
    if (!covers(a, b))
      fail(ErrorKind::InsufficientWindow,
           "need coordinates [" + to_decimal(a) + ", " + to_decimal(b) + "], have " + range_string());
    std::size_t i = offset(a), j = offset(b);
    std::int64_t c = 0;
    for (std::size_t p = i; p <= j; ++p) c += bits_[p];
    return c;
  }

  /// The same bits seen through T^m: (T^m w)_i = w_{i+m}, so the range moves down by m.
  Cylinder shifted_by(const BigInt& m) const {
    if (empty()) return *this;
    return Cylinder(lo_ - m, bits_);
  }

  /// Restriction to [a, b] (must be covered).
  Cylinder slice(const BigInt& a, const BigInt& b) const {
    if (b < a) return Cylinder();
    if (!covers(a, b))
      fail(ErrorKind::InsufficientWindow, "slice [" + to_decimal(a) + ", " + to_decimal(b) + "] outside " + range_string());
    std::size_t i = offset(a), j = offset(b);
    return Cylinder(a, std::vector<std::uint8_t>(bits_.begin() + static_cast<std::ptrdiff_t>(i),
                                                 bits_.begin() + static_cast<std::ptrdiff_t>(j) + 1));
  }

  /// Whether a point known on this window lies in `c` (c must be covered).
  bool satisfies(const Cylinder& c) const {
    if (c.empty()) return true;
    if (!covers(c.lo(), c.hi()))
      fail(ErrorKind::InsufficientWindow, "window " + range_string() + " does not cover " + c.range_string());
    std::size_t base = offset(c.lo());
    for (std::size_t i = 0; i < c.size(); ++i)
      if (bits_[base + i] != c.bits_[i]) return false;
    return true;
  }

  std::string range_string() const {
    if (empty()) return "(empty window)";
    return "[" + to_decimal(lo_) + ", " + to_decimal(hi()) + "]";
  }

  bool operator==(const Cylinder& o) const { return bits_ == o.bits_ && (empty() || lo_ == o.lo_); }

  static std::size_t checked_length(const BigInt& lo, const BigInt& hi) {
    BigInt len = hi - lo + 1;
    if (len > BigInt(static_cast<unsigned long>(1) << 40))
      fail(ErrorKind::Representability, "window of length " + to_decimal(len) + " cannot be materialized");
    return static_cast<std::size_t>(len.get_ui());
  }

 private:
  BigInt lo_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// A partial point of X known on a contiguous range.
using WindowConfig = Cylinder;

/// Finite union of cylinders.
using CylinderUnion = std::vector<Cylinder>;

}  // namespace typeiii
