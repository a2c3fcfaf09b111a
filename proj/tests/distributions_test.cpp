#include <catch2/catch.hpp>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "ollga/distributions.hpp"
#include "ollga/drift.hpp"
#include "ollga/rng.hpp"

using namespace ollga;

TEST_CASE("equal seeds give identical sequences") {
  RngStream a(123456), b(123456);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RngStream c(99), d(99);
  std::vector<std::uint32_t> sa, sb;
  for (int i = 0; i < 200; ++i) {
    REQUIRE(sample_binomial(50, 0.3, c) == sample_binomial(50, 0.3, d));
    REQUIRE(bernoulli(0.4, c) == bernoulli(0.4, d));
    sample_k_subset_into(20, 7, c, sa);
    sample_k_subset_into(20, 7, d, sb);
    REQUIRE(sa == sb);
    REQUIRE(c.next_below(17) == d.next_below(17));
  }

  RngStream e(1), f(2);
  bool anyDiff = false;
  for (int i = 0; i < 16 && !anyDiff; ++i) anyDiff = e.next_u64() != f.next_u64();
  REQUIRE(anyDiff);
}

TEST_CASE("child streams are reproducible and distinct") {
  RngStream master(7);
  RngStream c0 = master.child(0);
  RngStream c0again = master.child(0);
  RngStream c1 = master.child(1);
  REQUIRE(c0.next_u64() == c0again.next_u64());
  REQUIRE(c0.seed() != c1.seed());
}

TEST_CASE("bernoulli extremes and mean") {
  RngStream rng(3);
  for (int i = 0; i < 100; ++i) {
    REQUIRE_FALSE(bernoulli(0.0, rng));
    REQUIRE(bernoulli(1.0, rng));
  }
  REQUIRE_THROWS_AS(bernoulli(1.5, rng), std::invalid_argument);

  const int reps = 1000000;
  int ones = 0;
  for (int i = 0; i < reps; ++i) ones += bernoulli(0.5, rng);
  REQUIRE(std::abs(static_cast<double>(ones) / reps - 0.5) < 0.002);
}

TEST_CASE("uniform_choice is uniform") {
  RngStream rng(31);
  const std::vector<int> one{42};
  for (int i = 0; i < 10; ++i) REQUIRE(uniform_choice(one, rng) == 42);

  const std::vector<int> empty;
  REQUIRE_THROWS_AS(uniform_choice(empty, rng), std::invalid_argument);

  for (std::size_t len : {2u, 3u}) {
    std::vector<int> items(len);
    std::vector<int> counts(len, 0);
    for (std::size_t i = 0; i < len; ++i) items[i] = static_cast<int>(i);
    const int reps = 600000;
    for (int i = 0; i < reps; ++i) ++counts[static_cast<std::size_t>(uniform_choice(items, rng))];
    for (std::size_t i = 0; i < len; ++i) {
      const double freq = static_cast<double>(counts[i]) / reps;
      REQUIRE(std::abs(freq - 1.0 / static_cast<double>(len)) < 0.002);
    }
  }
}

TEST_CASE("sample_binomial degenerate parameters") {
  RngStream rng(5);
  for (int i = 0; i < 50; ++i) {
    REQUIRE(sample_binomial(20, 0.0, rng) == 0);
    REQUIRE(sample_binomial(20, 1.0, rng) == 20);
    REQUIRE(sample_binomial(0, 0.7, rng) == 0);
  }
  REQUIRE_THROWS_AS(sample_binomial(10, -0.1, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_binomial(10, 1.1, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_binomial(-1, 0.5, rng), std::invalid_argument);
}

TEST_CASE("sample_binomial matches the exact pmf") {
  RngStream rng(0xb10);
  const Pmf ref = binomial_pmf(20, 0.25);
  const std::int64_t reps = 1000000;
  double sum = 0.0;
  EmpiricalLaw law = empirical_law(
      [&](RngStream& r) {
        const std::int64_t v = sample_binomial(20, 0.25, r);
        sum += static_cast<double>(v);
        return v;
      },
      reps, ref, rng);
  REQUIRE(std::abs(sum / static_cast<double>(reps) - 5.0) < 0.1);
  REQUIRE(law.pValue > 0.01);
}

TEST_CASE("sample_binomial block path matches the exact pmf") {
  // n*p = 600 exceeds the single-block limit, so this exercises block summing
  RngStream rng(0xb11);
  const Pmf ref = binomial_pmf(2000, 0.3);
  EmpiricalLaw law = empirical_law(
      [](RngStream& r) { return sample_binomial(2000, 0.3, r); }, 200000, ref, rng);
  REQUIRE(law.pValue > 0.01);

  // p > 1/2 goes through the symmetry path
  RngStream rng2(0xb12);
  const Pmf ref2 = binomial_pmf(60, 0.85);
  EmpiricalLaw law2 = empirical_law(
      [](RngStream& r) { return sample_binomial(60, 0.85, r); }, 200000, ref2, rng2);
  REQUIRE(law2.pValue > 0.01);
}

TEST_CASE("conditional binomial mean obeys the conditional-expectation bound") {
  // E[X | X >= k] <= k + (n-k)p, checked at 4 standard errors
  RngStream master(0xc0d);
  const ConditionalMean c = conditional_binomial_mean(20, 0.3, 8, 200000, master, 2);
  REQUIRE(c.mean <= 8.0 + 12.0 * 0.3 + 4.0 * c.standardError);
  REQUIRE(c.mean >= 8.0);

  // stratified accumulation: the worker count must not change the result
  const ConditionalMean c1 = conditional_binomial_mean(20, 0.3, 8, 50000, master, 1);
  const ConditionalMean c2 = conditional_binomial_mean(20, 0.3, 8, 50000, master, 2);
  REQUIRE(c1.mean == c2.mean);
  REQUIRE(c1.totalDraws == c2.totalDraws);
}

TEST_CASE("sample_k_subset extremes and errors") {
  RngStream rng(9);
  REQUIRE(sample_k_subset(10, 0, rng).empty());
  auto full = sample_k_subset(10, 10, rng);
  std::set<std::uint32_t> fullSet(full.begin(), full.end());
  REQUIRE(fullSet.size() == 10);
  REQUIRE(*fullSet.begin() == 0);
  REQUIRE(*fullSet.rbegin() == 9);
  REQUIRE_THROWS_AS(sample_k_subset(10, 11, rng), std::invalid_argument);
}

TEST_CASE("sample_k_subset is uniform over subsets") {
  RngStream rng(0x5eb);
  std::map<std::uint32_t, int> counts;
  const int reps = 1000000;
  for (int i = 0; i < reps; ++i) {
    auto subset = sample_k_subset(5, 2, rng);
    std::uint32_t mask = 0;
    for (auto pos : subset) mask |= 1u << pos;
    ++counts[mask];
  }
  REQUIRE(counts.size() == 10);
  for (const auto& [mask, count] : counts) {
    const double freq = static_cast<double>(count) / reps;
    REQUIRE(std::abs(freq - 0.1) < 0.003);
  }
}

TEST_CASE("sample_k_subset marginal inclusion probability") {
  RngStream rng(0x5ec);
  for (std::size_t count : {3u, 7u}) {  // 7 of 10 exercises the complement path
    std::vector<int> hits(10, 0);
    const int reps = 200000;
    std::vector<std::uint32_t> subset;
    for (int i = 0; i < reps; ++i) {
      sample_k_subset_into(10, count, rng, subset);
      REQUIRE(subset.size() == count);
      for (auto pos : subset) ++hits[pos];
    }
    const double expectation = static_cast<double>(count) / 10.0;
    const double se = std::sqrt(expectation * (1.0 - expectation) / reps);
    for (int i = 0; i < 10; ++i) {
      const double freq = static_cast<double>(hits[i]) / reps;
      REQUIRE(std::abs(freq - expectation) < 4.5 * se);
    }
  }
}

TEST_CASE("binomial pmf values") {
  const Pmf p = binomial_pmf(3, 0.5);
  REQUIRE(p.lo() == 0);
  REQUIRE(p.size() == 4);
  // (1/2 + 1/2)^3 expanded: 1/8, 3/8, 3/8, 1/8
  REQUIRE(p.at(0) == Approx(0.125).margin(1e-12));
  REQUIRE(p.at(1) == Approx(0.375).margin(1e-12));
  REQUIRE(p.at(2) == Approx(0.375).margin(1e-12));
  REQUIRE(p.at(3) == Approx(0.125).margin(1e-12));

  REQUIRE(binomial_pmf(7, 0.0).at(0) == 1.0);
  REQUIRE(binomial_pmf(7, 1.0).at(7) == 1.0);
}

TEST_CASE("binomial pmf equals iterated bernoulli convolution") {
  const std::int64_t n = 24;
  const double p = 0.3;
  std::vector<double> law{1.0};
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<double> next(law.size() + 1, 0.0);
    for (std::size_t j = 0; j < law.size(); ++j) {
      next[j] += law[j] * (1.0 - p);
      next[j + 1] += law[j] * p;
    }
    law = std::move(next);
  }
  REQUIRE(tvd(binomial_pmf(n, p), Pmf(0, law)) < 1e-12);
}

TEST_CASE("hypergeometric pmf") {
  SECTION("drawing the whole universe is a point mass") {
    const Pmf p = hypergeometric_pmf(10, 10, 4);
    REQUIRE(p.size() == 1);
    REQUIRE(p.at(4) == Approx(1.0).margin(1e-12));
  }
  SECTION("mean is N*m/n") {
    REQUIRE(hypergeometric_pmf(20, 5, 8).mean() == Approx(2.0).margin(1e-9));
    for (std::int64_t n : {6, 11, 30}) {
      for (std::int64_t N = 0; N <= n; N += 3) {
        for (std::int64_t m = 1; m <= n; m += 4) {
          const double mean = hypergeometric_pmf(n, N, m).mean();
          const double expected = static_cast<double>(N * m) / static_cast<double>(n);
          REQUIRE(mean == Approx(expected).margin(1e-9));
        }
      }
    }
  }
  SECTION("invalid ranges") {
    REQUIRE_THROWS_AS(hypergeometric_pmf(5, 6, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(hypergeometric_pmf(5, 2, 6), std::invalid_argument);
  }
}

TEST_CASE("pmf sampling follows the pmf") {
  RngStream rng(0xabc);
  const Pmf ref = binomial_pmf(12, 0.4);
  EmpiricalLaw law =
      empirical_law([&](RngStream& r) { return ref.sample(r); }, 200000, ref, rng);
  REQUIRE(law.pValue > 0.01);
}

TEST_CASE("tvd on pmfs") {
  const Pmf a = binomial_pmf(6, 0.5);
  REQUIRE(tvd(a, a) == 0.0);
  REQUIRE(tvd(Pmf::point(0), Pmf::point(3)) == Approx(1.0));
  REQUIRE(tvd(binomial_pmf(1, 0.5), Pmf::point(0)) == Approx(0.5));
}

TEST_CASE("Pmf validation") {
  REQUIRE_THROWS_AS(Pmf(0, std::vector<double>{}), std::invalid_argument);
  REQUIRE_THROWS_AS(Pmf(0, std::vector<double>{0.5, 0.6}), std::invalid_argument);
  REQUIRE_THROWS_AS(Pmf(0, std::vector<double>{-0.1, 1.1}), std::invalid_argument);
}
