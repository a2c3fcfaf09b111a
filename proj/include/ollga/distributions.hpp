#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ollga/rng.hpp"

namespace ollga {

namespace detail {

/// base^e by binary exponentiation. Pure IEEE multiplications, so the result
/// is bit-identical on every conforming platform.
inline double pow_int(double base, std::uint64_t e) noexcept {
  double acc = 1.0;
  double b = base;
  while (e != 0) {
    if (e & 1) acc *= b;
    b *= b;
    e >>= 1;
  }
  return acc;
}

/// Sequential-search inversion for Binomial(m, q), q <= 1/2.
/// Caller keeps m*q small enough that (1-q)^m stays representable.
inline std::int64_t binomial_inversion(std::int64_t m, double q, RngStream& rng) {
  const double ratio = q / (1.0 - q);
  double f = pow_int(1.0 - q, static_cast<std::uint64_t>(m));
  double u = rng.next_double();
  std::int64_t x = 0;
  while (u > f && x < m) {
    u -= f;
    ++x;
    f *= ratio * static_cast<double>(m - x + 1) / static_cast<double>(x);
  }
  return x;
}

// extended precision keeps pmf sums within 1e-12 of 1 for supports of
// thousands of points
inline long double log_choose(std::int64_t a, std::int64_t b) {
  return std::lgamma(static_cast<long double>(a) + 1.0L) -
         std::lgamma(static_cast<long double>(b) + 1.0L) -
         std::lgamma(static_cast<long double>(a - b) + 1.0L);
}

}  // namespace detail

/// One biased coin flip: true with probability p.
inline bool bernoulli(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli: p outside [0,1]");
  return rng.next_double() < p;
}

/// Uniform pick from a nonempty sequence.
template <typename T>
const T& uniform_choice(std::span<const T> items, RngStream& rng) {
  if (items.empty()) throw std::invalid_argument("uniform_choice: empty sequence");
  return items[static_cast<std::size_t>(rng.next_below(items.size()))];
}

template <typename T>
const T& uniform_choice(const std::vector<T>& items, RngStream& rng) {
  return uniform_choice(std::span<const T>(items), rng);
}

/// Draw from Binomial(n, p).
///
/// Sequential-search inversion on blocks: n is split into blocks with
/// block * min(p,1-p) <= 250 so the block's start mass (1-q)^m never
/// underflows, and the block draws are summed (a sum of independent binomials
/// with the same p is binomial). p > 1/2 is handled by symmetry. The draw
/// consumes one uniform per block, and the arithmetic is +,-,*,/ only, so the
/// output is bit-exact across platforms. Expected work O(1 + n*min(p,1-p)).
inline std::int64_t sample_binomial(std::int64_t n, double p, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("sample_binomial: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_binomial: p outside [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  const auto block = std::max<std::int64_t>(1, static_cast<std::int64_t>(250.0 / q));
  std::int64_t total = 0;
  std::int64_t left = n;
  while (left > 0) {
    const std::int64_t m = std::min(left, block);
    total += detail::binomial_inversion(m, q, rng);
    left -= m;
  }
  return flip ? n - total : total;
}

/// Uniformly random subset of `count` distinct positions from [0..n).
///
/// Partial Fisher-Yates over a persistent identity array, with complement
/// sampling when count > n/2; the array is restored afterwards, so the
/// expected work per call is O(count) after a one-time O(n) setup per thread.
/// Positions are returned in sampling order (treat the result as a set).
inline void sample_k_subset_into(std::size_t n, std::size_t count, RngStream& rng,
                                 std::vector<std::uint32_t>& out) {
  if (count > n) throw std::invalid_argument("sample_k_subset: count exceeds n");
  out.clear();
  if (count == 0) return;
  static thread_local std::vector<std::uint32_t> pool;
  static thread_local std::vector<std::uint32_t> swaps;
  if (pool.size() < n) {
    const std::size_t old = pool.size();
    pool.resize(n);
    for (std::size_t i = old; i < n; ++i) pool[i] = static_cast<std::uint32_t>(i);
  }
  const bool complement = count > n / 2;
  const std::size_t m = complement ? n - count : count;
  swaps.clear();
  swaps.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    swaps.push_back(static_cast<std::uint32_t>(j));
    std::swap(pool[i], pool[j]);
  }
  if (complement) {
    out.assign(pool.begin() + static_cast<std::ptrdiff_t>(m),
               pool.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
  }
  for (std::size_t i = m; i-- > 0;) std::swap(pool[i], pool[swaps[i]]);
}

inline std::vector<std::uint32_t> sample_k_subset(std::size_t n, std::size_t count,
                                                  RngStream& rng) {
  std::vector<std::uint32_t> out;
  sample_k_subset_into(n, count, rng, out);
  return out;
}

/// Probability mass function on a contiguous integer support.
class Pmf {
 public:
  Pmf(std::int64_t lo, std::vector<double> probs) : lo_(lo), p_(std::move(probs)) {
    if (p_.empty()) throw std::invalid_argument("Pmf: empty support");
    double sum = 0.0;
    for (double v : p_) {
      if (!(v >= 0.0)) throw std::invalid_argument("Pmf: negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Pmf: probabilities must sum to 1");
  }

  static Pmf point(std::int64_t v) { return Pmf(v, {1.0}); }

  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return lo_ + static_cast<std::int64_t>(p_.size()) - 1; }
  std::size_t size() const noexcept { return p_.size(); }
  const std::vector<double>& probabilities() const noexcept { return p_; }

  double at(std::int64_t v) const noexcept {
    if (v < lo_ || v > hi()) return 0.0;
    return p_[static_cast<std::size_t>(v - lo_)];
  }

  double mean() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i)
      m += static_cast<double>(lo_ + static_cast<std::int64_t>(i)) * p_[i];
    return m;
  }

  /// Inverse-CDF draw.
  std::int64_t sample(RngStream& rng) const noexcept {
    double u = rng.next_double();
    for (std::size_t i = 0; i + 1 < p_.size(); ++i) {
      if (u < p_[i]) return lo_ + static_cast<std::int64_t>(i);
      u -= p_[i];
    }
    return hi();
  }

 private:
  std::int64_t lo_;
  std::vector<double> p_;
};

/// Exact Binomial(n, p) probabilities via log-gamma.
inline Pmf binomial_pmf(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial_pmf: n must be >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_pmf: p outside [0,1]");
  if (p == 0.0) return Pmf::point(0);
  if (p == 1.0) return Pmf::point(n);
  std::vector<double> probs(static_cast<std::size_t>(n) + 1);
  const long double lp = std::log(static_cast<long double>(p));
  const long double lq = std::log1p(-static_cast<long double>(p));
  for (std::int64_t i = 0; i <= n; ++i) {
    probs[static_cast<std::size_t>(i)] = static_cast<double>(
        std::exp(detail::log_choose(n, i) + static_cast<long double>(i) * lp +
                 static_cast<long double>(n - i) * lq));
  }
  return Pmf(0, std::move(probs));
}

/// Exact hypergeometric probabilities, parameterized as (n, N, m):
/// a uniformly random N-element subset is drawn from an n-element universe
/// containing m marked elements; X counts marked elements in the sample.
/// E[X] = N*m/n.
inline Pmf hypergeometric_pmf(std::int64_t n, std::int64_t N, std::int64_t m) {
  if (n < 0 || N < 0 || N > n || m < 0 || m > n)
    throw std::invalid_argument("hypergeometric_pmf: invalid parameters");
  const std::int64_t lo = std::max<std::int64_t>(0, N + m - n);
  const std::int64_t hi = std::min(N, m);
  std::vector<double> probs(static_cast<std::size_t>(hi - lo) + 1);
  const long double denom = detail::log_choose(n, N);
  for (std::int64_t x = lo; x <= hi; ++x) {
    probs[static_cast<std::size_t>(x - lo)] = static_cast<double>(
        std::exp(detail::log_choose(m, x) + detail::log_choose(n - m, N - x) - denom));
  }
  return Pmf(lo, std::move(probs));
}

/// Total variation distance. Supports need not coincide; probabilities
/// outside a pmf's support count as zero.
inline double tvd(const Pmf& a, const Pmf& b) {
  const std::int64_t lo = std::min(a.lo(), b.lo());
  const std::int64_t hi = std::max(a.hi(), b.hi());
  double s = 0.0;
  for (std::int64_t v = lo; v <= hi; ++v) s += std::abs(a.at(v) - b.at(v));
  return 0.5 * s;
}

}  // namespace ollga
