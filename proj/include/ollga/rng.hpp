#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace ollga {

/// One SplitMix64 step. Used for seeding and for deriving child streams.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Splitmix-style hash of (seed, index) into a fresh 64-bit seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  std::uint64_t h = splitmix64_next(s);
  h ^= splitmix64_next(s);
  return h;
}

/// Seedable pseudo-random stream (xoshiro256++, state filled by SplitMix64).
///
/// Guarantees: identical seed gives an identical, bit-exact output sequence on
/// every platform; the generator uses integer operations only. Streams derived
/// via child() from distinct indices are independent for practical purposes.
/// A stream is single-owner: never share one instance between threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound). Unbiased via power-of-two mask rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("RngStream::next_below: bound must be positive");
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  /// Independent stream number `index` derived from this stream's seed.
  RngStream child(std::uint64_t index) const noexcept {
    return RngStream(mix_seed(seed_, index));
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
};

}  // namespace ollga
