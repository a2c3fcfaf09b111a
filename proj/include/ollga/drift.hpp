#pragma once

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ollga/bitstring.hpp"
#include "ollga/distributions.hpp"
#include "ollga/engine.hpp"
#include "ollga/rng.hpp"

namespace ollga {

/// One-iteration fitness-gain observation from a prescribed fitness distance.
/// In the standard variant gain is the surviving parent's fitness minus the
/// starting fitness (nonnegative by elitism); in the all-compete variant it
/// is the best offspring's fitness minus the starting fitness, which may be
/// negative. gain <= ell always, since every offspring of an iteration is
/// within Hamming distance ell of the parent.
struct DriftSample {
  int d0 = 0;
  int ell = 0;
  int gain = 0;
  BitAccounting winnerAccounting{};  // accounting of the final selection candidate
};

/// Run `reps` independent single iterations, each from a fresh uniformly
/// random point at fitness distance d0, using the shipped iteration code
/// path. Repetition i uses the child stream master.child(i), so batches are
/// reproducible and order-independent.
inline std::vector<DriftSample> probe_drift(const GaParams& params, const OneMaxInstance& inst,
                                            std::size_t d0, std::size_t reps,
                                            const RngStream& master) {
  params.validate();
  if (params.n != inst.size())
    throw std::invalid_argument("probe_drift: params/instance size mismatch");
  if (d0 > params.n) throw std::invalid_argument("probe_drift: d0 out of range");
  if (reps < 1) throw std::invalid_argument("probe_drift: reps must be >= 1");

  std::vector<DriftSample> samples;
  samples.reserve(reps);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng = master.child(rep);
    BitString x = make_state_at_distance(inst, d0, rng);
    int fx = static_cast<int>(params.n - d0);
    const int before = fx;
    IterationTrace t = step(params, inst, x, fx, rng);
    DriftSample s;
    s.d0 = static_cast<int>(d0);
    s.ell = t.ell;
    s.gain = (params.variant == Variant::all_compete)
                 ? t.bestOffspringFitness - before
                 : t.parentFitnessAfter - before;
    s.winnerAccounting = t.selectionCandidate;
    samples.push_back(s);
  }
  return samples;
}

/// Exact probability law over all bitstrings of a small length (full 2^n
/// table, index = bit pattern with position 0 in the lowest bit).
class ExactLaw {
 public:
  static constexpr std::size_t max_length = 12;

  explicit ExactLaw(std::size_t n) : n_(n), p_(std::size_t{1} << n, 0.0) {
    if (n == 0 || n > max_length)
      throw std::invalid_argument("ExactLaw: length must be in [1..12]");
  }

  std::size_t length() const noexcept { return n_; }
  std::size_t size() const noexcept { return p_.size(); }
  double& operator[](std::size_t mask) noexcept { return p_[mask]; }
  double operator[](std::size_t mask) const noexcept { return p_[mask]; }

  double total() const noexcept {
    double s = 0.0;
    for (double v : p_) s += v;
    return s;
  }

 private:
  std::size_t n_;
  std::vector<double> p_;
};

inline double tvd(const ExactLaw& a, const ExactLaw& b) {
  if (a.length() != b.length()) throw std::invalid_argument("tvd: law shape mismatch");
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) s += std::abs(a[m] - b[m]);
  return 0.5 * s;
}

namespace detail {

inline std::size_t low_bits_mask_of(const BitString& x) {
  return static_cast<std::size_t>(x.words()[0]);
}

inline std::vector<std::vector<double>> choose_table(std::size_t n) {
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i <= n; ++i) {
    c[i][0] = 1.0;
    for (std::size_t j = 1; j <= i; ++j)
      c[i][j] = c[i - 1][j - 1] + (j <= i - 1 ? c[i - 1][j] : 0.0);
  }
  return c;
}

}  // namespace detail

/// Law of one point obtained from x by flipping each bit independently with
/// the given rate.
inline ExactLaw exact_standard_mutation_law(const BitString& x, double rate) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw std::invalid_argument("exact_standard_mutation_law: rate outside [0,1]");
  const std::size_t n = x.size();
  ExactLaw law(n);
  const std::size_t xmask = detail::low_bits_mask_of(x);
  std::vector<double> byWeight(n + 1);
  for (std::size_t s = 0; s <= n; ++s)
    byWeight[s] = detail::pow_int(rate, s) * detail::pow_int(1.0 - rate, n - s);
  for (std::size_t m = 0; m < law.size(); ++m)
    law[m] = byWeight[static_cast<std::size_t>(std::popcount(m ^ xmask))];
  return law;
}

/// Exact law of one pre-selection crossover offspring cross_{r/k}(x, mut_ell(x))
/// with ell ~ B(n, k/n), by summation over ell with binomial weights and
/// combinatorial counting of flip subsets and crossover takes: a flip set K
/// arises iff the mutation subset S contains K and the crossover takes
/// exactly K out of S, so P(flip set = K) depends only on |K| and equals
/// sum_ell pmf(ell) * C(n-|K|, ell-|K|)/C(n, ell) * c^|K| (1-c)^(ell-|K|).
/// No sampling, and no independence assumption about the composed law.
inline ExactLaw exact_composed_offspring_law(const BitString& x, double k, double r) {
  const std::size_t n = x.size();
  if (n > ExactLaw::max_length)
    throw std::invalid_argument("exact_composed_offspring_law: n exceeds the enumeration cap");
  if (!(k > 0.0) || k > static_cast<double>(n) || !(r > 0.0) || r > k)
    throw std::invalid_argument("exact_composed_offspring_law: need 0 < r <= k <= n");

  const Pmf lpmf = binomial_pmf(static_cast<std::int64_t>(n), k / static_cast<double>(n));
  const double c = r / k;
  const auto choose = detail::choose_table(n);

  std::vector<double> w(n + 1, 0.0);
  for (std::size_t s = 0; s <= n; ++s) {
    for (std::size_t ell = s; ell <= n; ++ell) {
      w[s] += lpmf.at(static_cast<std::int64_t>(ell)) * choose[n - s][ell - s] /
              choose[n][ell] * detail::pow_int(c, s) * detail::pow_int(1.0 - c, ell - s);
    }
  }

  ExactLaw law(n);
  const std::size_t xmask = detail::low_bits_mask_of(x);
  for (std::size_t m = 0; m < law.size(); ++m)
    law[m] = w[static_cast<std::size_t>(std::popcount(m ^ xmask))];
  return law;
}

/// Cross-validation route for exact_composed_offspring_law: literal
/// enumeration of every mutation subset S and every crossover take-mask M,
/// accumulating the law of x xor (S intersect M). O(4^n), small n only.
inline ExactLaw exact_composed_offspring_law_enumerated(const BitString& x, double k, double r) {
  const std::size_t n = x.size();
  if (n > ExactLaw::max_length)
    throw std::invalid_argument("exact_composed_offspring_law_enumerated: n exceeds the cap");
  if (!(k > 0.0) || k > static_cast<double>(n) || !(r > 0.0) || r > k)
    throw std::invalid_argument("exact_composed_offspring_law_enumerated: need 0 < r <= k <= n");

  const Pmf lpmf = binomial_pmf(static_cast<std::int64_t>(n), k / static_cast<double>(n));
  const double c = r / k;
  const auto choose = detail::choose_table(n);
  std::vector<double> takeWeight(n + 1);
  for (std::size_t j = 0; j <= n; ++j)
    takeWeight[j] = detail::pow_int(c, j) * detail::pow_int(1.0 - c, n - j);

  ExactLaw law(n);
  const std::size_t xmask = detail::low_bits_mask_of(x);
  const std::size_t full = std::size_t{1} << n;
  for (std::size_t subset = 0; subset < full; ++subset) {
    const auto ell = static_cast<std::size_t>(std::popcount(subset));
    const double subsetWeight = lpmf.at(static_cast<std::int64_t>(ell)) / choose[n][ell];
    for (std::size_t take = 0; take < full; ++take) {
      law[xmask ^ (subset & take)] +=
          subsetWeight * takeWeight[static_cast<std::size_t>(std::popcount(take))];
    }
  }
  return law;
}

/// Law of the number of target-disagreeing positions hit by a uniform
/// ell-subset flip when the parent is at fitness distance d: hypergeometric
/// with universe n, sample ell, marked d.
inline Pmf exact_goodbits_law(std::int64_t n, std::int64_t ell, std::int64_t d) {
  if (ell < 0 || ell > n || d < 0 || d > n)
    throw std::invalid_argument("exact_goodbits_law: parameters out of range");
  return hypergeometric_pmf(n, ell, d);
}

namespace detail {

/// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  const double logPrefix = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(logPrefix);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return h * std::exp(logPrefix);
}

}  // namespace detail

inline double chi_square_pvalue(double statistic, int degreesOfFreedom) {
  if (degreesOfFreedom < 1) throw std::invalid_argument("chi_square_pvalue: df must be >= 1");
  return detail::gamma_q(0.5 * degreesOfFreedom, 0.5 * statistic);
}

/// Histogram of sampled values plus a chi-square goodness-of-fit test against
/// a reference pmf.
struct EmpiricalLaw {
  std::int64_t lo = 0;                 // support start of the reference
  std::vector<std::int64_t> counts;    // raw counts per reference support point
  double statistic = 0.0;
  int degreesOfFreedom = 0;
  double pValue = 0.0;
};

/// Draw `reps` samples and test them against `reference`.
///
/// Bucket rule: walking the support from the left, bins accumulate into one
/// bucket until its expected count reaches 5, so undersized bins (tails and
/// zero-probability bins) merge into their neighbor; an undersized trailing
/// bucket merges backwards. Samples outside the support clamp into the
/// nearest boundary bin. Fewer than two buckets means the sample is below
/// the expected-count floor and is an error.
template <typename Sampler>
EmpiricalLaw empirical_law(Sampler&& draw, std::int64_t reps, const Pmf& reference,
                           RngStream& rng) {
  if (reps < 1) throw std::invalid_argument("empirical_law: reps must be >= 1");
  EmpiricalLaw out;
  out.lo = reference.lo();
  out.counts.assign(reference.size(), 0);
  for (std::int64_t i = 0; i < reps; ++i) {
    std::int64_t v = draw(rng);
    if (v < reference.lo()) v = reference.lo();
    if (v > reference.hi()) v = reference.hi();
    ++out.counts[static_cast<std::size_t>(v - reference.lo())];
  }

  std::vector<double> expected;
  std::vector<double> observed;
  double accE = 0.0;
  double accO = 0.0;
  const double total = static_cast<double>(reps);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    accE += total * reference.probabilities()[i];
    accO += static_cast<double>(out.counts[i]);
    if (accE >= 5.0) {
      expected.push_back(accE);
      observed.push_back(accO);
      accE = 0.0;
      accO = 0.0;
    }
  }
  if (accE > 0.0 || accO > 0.0) {
    if (expected.empty()) {
      expected.push_back(accE);
      observed.push_back(accO);
    } else {
      expected.back() += accE;
      observed.back() += accO;
    }
  }
  if (expected.size() < 2)
    throw std::invalid_argument("empirical_law: too few samples for the reference support");

  double stat = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double diff = observed[i] - expected[i];
    stat += diff * diff / expected[i];
  }
  out.statistic = stat;
  out.degreesOfFreedom = static_cast<int>(expected.size()) - 1;
  out.pValue = chi_square_pvalue(out.statistic, out.degreesOfFreedom);
  return out;
}

/// Empirical mean of X ~ B(n, p) conditioned on X >= k, by rejection, with
/// the work split into deterministic partitions each on its own child
/// stream. Supports the conditional-expectation bound
/// E[X | X >= k] <= k + (n-k)p.
struct ConditionalMean {
  double mean = 0.0;
  double standardError = 0.0;
  std::uint64_t totalDraws = 0;
};

inline ConditionalMean conditional_binomial_mean(std::int64_t n, double p, std::int64_t k,
                                                 std::int64_t reps, const RngStream& master,
                                                 unsigned workers = 1) {
  if (reps < 2) throw std::invalid_argument("conditional_binomial_mean: reps must be >= 2");
  if (k < 0 || k > n) throw std::invalid_argument("conditional_binomial_mean: k out of range");
  workers = std::max(1u, workers);

  // fixed stratification: results do not depend on the worker count
  const std::int64_t strata = std::min<std::int64_t>(64, reps);
  std::vector<double> sums(static_cast<std::size_t>(strata), 0.0);
  std::vector<double> squares(static_cast<std::size_t>(strata), 0.0);
  std::vector<std::uint64_t> draws(static_cast<std::size_t>(strata), 0);
  const std::int64_t each = reps / strata;
  std::atomic<std::int64_t> nextStratum{0};
  auto work = [&] {
    for (;;) {
      const std::int64_t s = nextStratum.fetch_add(1);
      if (s >= strata) return;
      RngStream rng = master.child(static_cast<std::uint64_t>(s));
      const std::int64_t mine = (s + 1 == strata) ? reps - each * (strata - 1) : each;
      for (std::int64_t i = 0; i < mine; ++i) {
        std::int64_t x;
        do {
          x = sample_binomial(n, p, rng);
          ++draws[static_cast<std::size_t>(s)];
        } while (x < k);
        sums[static_cast<std::size_t>(s)] += static_cast<double>(x);
        squares[static_cast<std::size_t>(s)] += static_cast<double>(x) * static_cast<double>(x);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  double sum = 0.0, sq = 0.0;
  std::uint64_t total = 0;
  for (std::int64_t s = 0; s < strata; ++s) {
    sum += sums[static_cast<std::size_t>(s)];
    sq += squares[static_cast<std::size_t>(s)];
    total += draws[static_cast<std::size_t>(s)];
  }
  ConditionalMean result;
  const double m = static_cast<double>(reps);
  result.mean = sum / m;
  const double var = (sq - sum * sum / m) / (m - 1.0);
  result.standardError = std::sqrt(std::max(0.0, var) / m);
  result.totalDraws = total;
  return result;
}

}  // namespace ollga
