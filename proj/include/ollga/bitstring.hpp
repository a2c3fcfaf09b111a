#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ollga/distributions.hpp"
#include "ollga/rng.hpp"

namespace ollga {

/// Fixed-length binary search point, stored packed in 64-bit words.
/// The length is immutable after creation. Positions are 0-based.
/// Immutable-by-convention value type: copies are cheap to reason about and
/// instances can be shared across threads once construction is done.
class BitString {
 public:
  explicit BitString(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {
    if (n == 0) throw std::invalid_argument("BitString: length must be positive");
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max()))
      throw std::invalid_argument("BitString: length exceeds supported maximum");
  }

  static BitString random(std::size_t n, RngStream& rng) {
    BitString s(n);
    for (auto& w : s.words_) w = rng.next_u64();
    s.mask_tail();
    return s;
  }

  static BitString ones(std::size_t n) {
    BitString s(n);
    for (auto& w : s.words_) w = ~std::uint64_t{0};
    s.mask_tail();
    return s;
  }

  /// Parse "0101..."; character i gives the bit at position i.
  static BitString from_string(std::string_view bits) {
    BitString s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1')
        s.set(i, true);
      else if (bits[i] != '0')
        throw std::invalid_argument("BitString: characters must be 0 or 1");
    }
    return s;
  }

  std::size_t size() const noexcept { return n_; }

  bool get(std::size_t i) const noexcept {
    assert(i < n_);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(std::size_t i, bool v) noexcept {
    assert(i < n_);
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  void flip(std::size_t i) noexcept {
    assert(i < n_);
    words_[i >> 6] ^= std::uint64_t{1} << (i & 63);
  }

  std::size_t count_ones() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  BitString complemented() const {
    BitString s(*this);
    for (auto& w : s.words_) w = ~w;
    s.mask_tail();
    return s;
  }

  std::string to_string() const {
    std::string out(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i)) out[i] = '1';
    return out;
  }

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const BitString& a, const BitString& b) noexcept {
    return a.n_ == b.n_ && a.words_ == b.words_;
  }

 private:
  void mask_tail() noexcept {
    const std::size_t used = n_ & 63;
    if (used != 0) words_.back() &= (~std::uint64_t{0}) >> (64 - used);
  }

  std::size_t n_;
  std::vector<std::uint64_t> words_;
};

inline std::size_t hamming(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i)
    d += static_cast<std::size_t>(std::popcount(a.words()[i] ^ b.words()[i]));
  return d;
}

/// Generalized OneMax instance: fitness of x is the number of positions in
/// which x agrees with the hidden target z. The target is the unique maximum
/// with fitness n. Classic OneMax is z = all-ones.
class OneMaxInstance {
 public:
  explicit OneMaxInstance(BitString target) : target_(std::move(target)) {}

  static OneMaxInstance classic(std::size_t n) { return OneMaxInstance(BitString::ones(n)); }

  std::size_t size() const noexcept { return target_.size(); }
  const BitString& target() const noexcept { return target_; }

  /// Number of agreeing positions, in [0..n]. Pure: owns no evaluation
  /// counter; callers that account for evaluations do their own counting.
  int evaluate(const BitString& x) const {
    if (x.size() != target_.size())
      throw std::invalid_argument("OneMaxInstance::evaluate: length mismatch");
    return static_cast<int>(target_.size() - hamming(x, target_));
  }

  /// n minus fitness: the number of disagreeing positions.
  int fitness_distance(const BitString& x) const {
    if (x.size() != target_.size())
      throw std::invalid_argument("OneMaxInstance::fitness_distance: length mismatch");
    return static_cast<int>(hamming(x, target_));
  }

 private:
  BitString target_;
};

/// Good/bad-bit accounting of an offspring xp relative to a parent x:
/// good counts positions where x disagrees with the target but xp agrees,
/// bad counts positions where x agrees but xp disagrees. The surviving
/// counts restrict to positions whose xp-value made it into a crossover
/// result y. good + bad always equals the Hamming distance of x and xp.
struct BitAccounting {
  std::int64_t good = 0;
  std::int64_t bad = 0;
  std::int64_t survivingGood = 0;
  std::int64_t survivingBad = 0;
  std::int64_t hamming = 0;
};

inline BitAccounting account(const OneMaxInstance& inst, const BitString& x,
                             const BitString& xp) {
  if (x.size() != inst.size() || xp.size() != inst.size())
    throw std::invalid_argument("account: length mismatch");
  BitAccounting acc;
  const auto& z = inst.target().words();
  for (std::size_t i = 0; i < x.words().size(); ++i) {
    const std::uint64_t xd = x.words()[i] ^ z[i];
    const std::uint64_t pd = xp.words()[i] ^ z[i];
    acc.good += std::popcount(xd & ~pd);
    acc.bad += std::popcount(~xd & pd);
  }
  acc.hamming = acc.good + acc.bad;
  return acc;
}

inline BitAccounting account(const OneMaxInstance& inst, const BitString& x,
                             const BitString& xp, const BitString& y) {
  if (y.size() != inst.size()) throw std::invalid_argument("account: length mismatch");
  BitAccounting acc = account(inst, x, xp);
  const auto& z = inst.target().words();
  for (std::size_t i = 0; i < x.words().size(); ++i) {
    const std::uint64_t xd = x.words()[i] ^ z[i];
    const std::uint64_t pd = xp.words()[i] ^ z[i];
    const std::uint64_t yd = y.words()[i] ^ z[i];
    acc.survivingGood += std::popcount(xd & ~pd & ~yd);
    acc.survivingBad += std::popcount(~xd & pd & yd);
  }
  return acc;
}

/// A point at fitness distance exactly d from the target, with the d
/// disagreeing positions a uniformly random d-subset.
inline BitString make_state_at_distance(const OneMaxInstance& inst, std::size_t d,
                                        RngStream& rng) {
  if (d > inst.size())
    throw std::invalid_argument("make_state_at_distance: distance out of range");
  BitString x = inst.target();
  static thread_local std::vector<std::uint32_t> flips;
  sample_k_subset_into(inst.size(), d, rng, flips);
  for (auto pos : flips) x.flip(pos);
  return x;
}

}  // namespace ollga
