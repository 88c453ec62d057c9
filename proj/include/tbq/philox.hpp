#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// A stream is identified by a 64-bit key (the user seed) and two 32-bit
// stream words; the remaining 64 bits of the counter index blocks within the
// stream. Distinct (seed, stream) pairs never share counters, so samples can
// be drawn in any order or in parallel with identical results.

#include <array>
#include <cstdint>
#include <limits>

namespace tbq {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/// UniformRandomBitGenerator over one Philox stream.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(std::uint64_t seed, std::uint32_t stream_hi, std::uint32_t stream_lo) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_hi_(stream_hi),
        stream_lo_(stream_lo) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (used_ == 2) {
      block_ = philox4x32_10({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                              stream_lo_, stream_hi_},
                             key_);
      ++counter_;
      used_ = 0;
    }
    const result_type out = (std::uint64_t{block_[2 * used_ + 1]} << 32) | block_[2 * used_];
    ++used_;
    return out;
  }

 private:
  PhiloxKey key_;
  std::uint32_t stream_hi_;
  std::uint32_t stream_lo_;
  std::uint64_t counter_ = 0;
  PhiloxBlock block_{};
  int used_ = 2;
};

}  // namespace tbq
