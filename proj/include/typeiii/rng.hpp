#pragma once

#include <array>
#include <cstdint>

namespace typeiii {

/// Philox4x32-10 (Salmon et al., SC'11). Pure function of (counter, key).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Counter-based stream: draw i of (seed, stream) is the same on every platform
/// and independent of the order in which draws are requested.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// 64-bit word number i.
  std::uint64_t word(std::uint64_t i) const {
    std::uint64_t block = i >> 1;
    if (block != cached_block_ || !cache_valid_) {
      cached_ = philox4x32({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                           {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
      cached_block_ = block;
      cache_valid_ = true;
    }
    std::size_t j = (i & 1u) * 2;
    return (static_cast<std::uint64_t>(cached_[j + 1]) << 32) | cached_[j];
  }

  /// Sequential convenience interface.
  std::uint64_t next() { return word(position_++); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    while (true) {
      std::uint64_t x = next();
      if (x >= limit) return x % bound;
    }
  }

  std::uint64_t position() const { return position_; }
  void seek(std::uint64_t pos) { position_ = pos; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  mutable std::array<std::uint32_t, 4> cached_{};
  mutable std::uint64_t cached_block_ = 0;
  mutable bool cache_valid_ = false;
};

}  // namespace typeiii
