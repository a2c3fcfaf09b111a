#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ollga/analysis.hpp"
#include "ollga/bitstring.hpp"
#include "ollga/distributions.hpp"
#include "ollga/rng.hpp"

namespace ollga {

enum class Variant { standard, all_compete };

inline const char* to_string(Variant v) noexcept {
  return v == Variant::standard ? "standard" : "all-compete";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "standard") return Variant::standard;
  if (s == "all-compete") return Variant::all_compete;
  throw std::invalid_argument("unknown variant: " + s);
}

/// Default evaluation budget: 10^4 * n * log2(n) (clamped log), two orders of
/// magnitude above the expected optimum so that runs terminate.
inline std::uint64_t default_budget(std::size_t n) {
  return static_cast<std::uint64_t>(1e4 * static_cast<double>(n) * log2c(static_cast<double>(n)));
}

/// Parameters of the one-parent GA with lambda mutation offspring sharing one
/// step size and lambda biased-crossover offspring. The mutation probability
/// is p = k/n and the crossover bias is c = r/k.
struct GaParams {
  std::size_t n = 0;
  int lambda = 1;                        // offspring per phase, >= 1
  double k = 1.0;                        // expected mutation step size, 0 < k <= n
  double r = 1.0;                        // crossover strength, 0 < r <= k
  Variant variant = Variant::standard;
  std::uint64_t budget = 0;              // max evaluations; 0 means default_budget(n)

  double p() const noexcept { return k / static_cast<double>(n); }
  double c() const noexcept { return r / k; }

  void validate() const {
    if (n == 0) throw std::invalid_argument("GaParams: n must be positive");
    if (lambda < 1) throw std::invalid_argument("GaParams: lambda must be >= 1");
    if (!(k > 0.0) || k > static_cast<double>(n))
      throw std::invalid_argument("GaParams: need 0 < k <= n");
    if (!(r > 0.0) || r > k) throw std::invalid_argument("GaParams: need 0 < r <= k");
  }

  /// The suggested setting lambda = k = round(lambda_star(n)), r = 1.
  static GaParams suggested(std::size_t n) {
    GaParams g;
    g.n = n;
    g.lambda = static_cast<int>(std::lround(std::max(1.0, lambda_star(static_cast<double>(n)))));
    g.k = std::min(static_cast<double>(g.lambda), static_cast<double>(n));
    g.r = 1.0;
    return g;
  }
};

/// Measured outcome of one run. T counts iterations (the stopping iteration
/// included, even when partial); F counts every fitness evaluation in order,
/// the initial evaluation included. On success F is the index of the first
/// evaluation of an optimal point, so T = ceil((F-1)/(2*lambda)) and
/// 2*(T-1)*lambda + 1 < F <= 2*lambda*T + 1 whenever T >= 1.
struct RunOutcome {
  std::uint64_t iterations = 0;    // T
  std::uint64_t evaluations = 0;   // F
  bool success = false;
  std::uint64_t seed = 0;
  std::size_t finalDistance = 0;   // distance of the best point evaluated
};

/// Per-iteration instrumentation. One record per iteration when tracing is
/// enabled, the stopping iteration included. Fitness fields are -1 when the
/// corresponding phase did not complete (early optimum or budget stop).
struct IterationTrace {
  int ell = 0;
  int parentFitnessBefore = 0;
  int parentFitnessAfter = 0;
  int mutationWinnerFitness = -1;
  int crossoverWinnerFitness = -1;
  int bestOffspringFitness = -1;           // best of all 2*lambda offspring
  BitAccounting mutationWinner{};
  BitAccounting selectionCandidate{};      // candidate of the final selection
  std::uint64_t evalsUsed = 0;
  bool optimumEvaluated = false;
  bool budgetExhausted = false;
  int bestEvaluatedFitness = std::numeric_limits<int>::min();
};

/// Flip exactly ell distinct random bits of x; the flipped set is uniform
/// among all ell-subsets. x itself is not modified.
inline BitString mutate(const BitString& x, std::size_t ell, RngStream& rng) {
  if (ell > x.size()) throw std::invalid_argument("mutate: ell exceeds length");
  BitString out(x);
  static thread_local std::vector<std::uint32_t> flips;
  sample_k_subset_into(x.size(), ell, rng, flips);
  for (auto pos : flips) out.flip(pos);
  return out;
}

/// Biased uniform crossover: per position, take xp's bit with probability c,
/// otherwise keep x's bit. Positions where x and xp agree are unchanged, so
/// only the differing positions consume randomness (one coin each, in
/// increasing position order).
inline BitString crossover(const BitString& x, const BitString& xp, double c, RngStream& rng) {
  if (x.size() != xp.size()) throw std::invalid_argument("crossover: length mismatch");
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("crossover: c outside [0,1]");
  BitString out(x);
  for (std::size_t w = 0; w < x.words().size(); ++w) {
    std::uint64_t diff = x.words()[w] ^ xp.words()[w];
    while (diff != 0) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(diff));
      diff &= diff - 1;
      if (bernoulli(c, rng)) out.flip(w * 64 + bit);
    }
  }
  return out;
}

namespace detail {

// Streaming uniform-among-argmax selection: processing candidates in order,
// each maximal-fitness candidate survives with probability 1/(ties so far).
struct OffspringReservoir {
  int fitness = std::numeric_limits<int>::min();
  std::uint64_t ties = 0;
  std::vector<std::uint32_t> flips;
  bool fromCrossover = false;

  void consider(int f, const std::vector<std::uint32_t>& candidateFlips, bool isCrossover,
                RngStream& rng) {
    if (f > fitness) {
      fitness = f;
      ties = 1;
      flips = candidateFlips;
      fromCrossover = isCrossover;
    } else if (f == fitness) {
      ++ties;
      if (rng.next_below(ties) == 0) {
        flips = candidateFlips;
        fromCrossover = isCrossover;
      }
    }
  }
};

}  // namespace detail

/// One full iteration of the GA on the current parent: sample ell once,
/// create lambda mutants all with that ell, pick the mutation winner u.a.r.
/// among the fittest, create lambda crossover offspring of (x, winner), pick
/// the crossover winner likewise, then replace x by the selection candidate
/// iff its fitness is at least f(x). In the all-compete variant the selection
/// candidate is the best of all 2*lambda offspring instead of the crossover
/// winner. Offspring are represented by their flip sets relative to x and
/// fitness is updated incrementally; the arithmetic agrees exactly with
/// re-evaluating materialized offspring.
///
/// Evaluations stop as soon as an optimal point is evaluated or evalsLeft is
/// exhausted; x and fx are updated in place.
inline IterationTrace step(const GaParams& params, const OneMaxInstance& inst, BitString& x,
                           int& fx, RngStream& rng,
                           std::uint64_t evalsLeft = std::numeric_limits<std::uint64_t>::max()) {
  const auto n = static_cast<int>(params.n);
  const bool allCompete = params.variant == Variant::all_compete;
  const auto& z = inst.target();

  IterationTrace t;
  t.parentFitnessBefore = fx;
  t.parentFitnessAfter = fx;

  const auto ell = static_cast<std::size_t>(
      sample_binomial(static_cast<std::int64_t>(params.n), params.p(), rng));
  t.ell = static_cast<int>(ell);

  detail::OffspringReservoir mutation, cross, all;
  std::uint64_t evals = 0;
  int bestOffspring = std::numeric_limits<int>::min();

  auto countGood = [&](const std::vector<std::uint32_t>& flips) {
    int g = 0;
    for (auto pos : flips) g += static_cast<int>(x.get(pos) != z.get(pos));
    return g;
  };
  auto finishOptimum = [&](const BitAccounting& acct) {
    t.optimumEvaluated = true;
    t.selectionCandidate = acct;
    x = z;
    fx = n;
    t.parentFitnessAfter = n;
    t.bestOffspringFitness = n;
    t.evalsUsed = evals;
    t.bestEvaluatedFitness = std::max(t.bestEvaluatedFitness, n);
  };

  static thread_local std::vector<std::uint32_t> flips;
  for (int i = 0; i < params.lambda; ++i) {
    if (evals >= evalsLeft) {
      t.budgetExhausted = true;
      t.evalsUsed = evals;
      return t;
    }
    sample_k_subset_into(params.n, ell, rng, flips);
    const int good = countGood(flips);
    const int f = fx + 2 * good - static_cast<int>(ell);
    ++evals;
    t.bestEvaluatedFitness = std::max(t.bestEvaluatedFitness, f);
    if (f == n) {
      finishOptimum({good, static_cast<int>(ell) - good, good, static_cast<int>(ell) - good,
                     static_cast<int>(ell)});
      return t;
    }
    bestOffspring = std::max(bestOffspring, f);
    mutation.consider(f, flips, false, rng);
    if (allCompete) all.consider(f, flips, false, rng);
  }

  t.mutationWinnerFitness = mutation.fitness;
  const int winnerGood = countGood(mutation.flips);
  const int ellInt = static_cast<int>(ell);
  t.mutationWinner = {winnerGood, ellInt - winnerGood, 0, 0, ellInt};

  // crossover coins are drawn per differing position in increasing position
  // order, matching crossover()
  std::sort(mutation.flips.begin(), mutation.flips.end());

  // goodness per winner flip, reused by every crossover offspring
  static thread_local std::vector<unsigned char> winnerFlipGood;
  winnerFlipGood.resize(mutation.flips.size());
  for (std::size_t j = 0; j < mutation.flips.size(); ++j)
    winnerFlipGood[j] = static_cast<unsigned char>(x.get(mutation.flips[j]) != z.get(mutation.flips[j]));

  const double c = params.c();
  static thread_local std::vector<std::uint32_t> taken;
  for (int i = 0; i < params.lambda; ++i) {
    if (evals >= evalsLeft) {
      t.budgetExhausted = true;
      t.bestOffspringFitness = bestOffspring;
      t.evalsUsed = evals;
      return t;
    }
    taken.clear();
    int takenGood = 0;
    for (std::size_t j = 0; j < mutation.flips.size(); ++j) {
      if (bernoulli(c, rng)) {
        taken.push_back(mutation.flips[j]);
        takenGood += winnerFlipGood[j];
      }
    }
    const int takenBad = static_cast<int>(taken.size()) - takenGood;
    const int f = fx + takenGood - takenBad;
    ++evals;
    t.bestEvaluatedFitness = std::max(t.bestEvaluatedFitness, f);
    if (f == n) {
      finishOptimum({winnerGood, ellInt - winnerGood, takenGood, takenBad, ellInt});
      return t;
    }
    bestOffspring = std::max(bestOffspring, f);
    cross.consider(f, taken, true, rng);
    if (allCompete) all.consider(f, taken, true, rng);
  }

  t.crossoverWinnerFitness = cross.fitness;
  t.bestOffspringFitness = bestOffspring;

  const detail::OffspringReservoir& candidate = allCompete ? all : cross;
  const int candGood = countGood(candidate.flips);
  const int candSize = static_cast<int>(candidate.flips.size());
  if (candidate.fromCrossover) {
    t.selectionCandidate = {winnerGood, ellInt - winnerGood, candGood, candSize - candGood, ellInt};
  } else {
    t.selectionCandidate = {candGood, ellInt - candGood, candGood, ellInt - candGood, ellInt};
  }

  if (candidate.fitness >= fx) {
    for (auto pos : candidate.flips) x.flip(pos);
    fx = candidate.fitness;
  }
  t.parentFitnessAfter = fx;
  t.evalsUsed = evals;
  return t;
}

/// Full run from a uniformly random initial point. Stops at the first
/// evaluation of an optimal point (mid-phase stops allowed, the remainder of
/// the phase is not executed) or when the evaluation budget is exhausted.
/// An ell = 0 iteration still evaluates its lambda parent copies; every
/// evaluation counts towards F, duplicates included.
inline RunOutcome run(const GaParams& params, const OneMaxInstance& inst, RngStream& rng,
                      std::vector<IterationTrace>* trace = nullptr) {
  params.validate();
  if (params.n != inst.size()) throw std::invalid_argument("run: params/instance size mismatch");
  const std::uint64_t budget = params.budget != 0 ? params.budget : default_budget(params.n);

  RunOutcome out;
  out.seed = rng.seed();

  BitString x = BitString::random(params.n, rng);
  int fx = inst.evaluate(x);
  std::uint64_t evaluations = 1;
  int bestSeen = fx;
  if (fx == static_cast<int>(params.n)) {
    out.iterations = 0;
    out.evaluations = 1;
    out.success = true;
    out.finalDistance = 0;
    return out;
  }

  std::uint64_t iterations = 0;
  for (;;) {
    if (evaluations >= budget) break;
    IterationTrace t = step(params, inst, x, fx, rng, budget - evaluations);
    evaluations += t.evalsUsed;
    ++iterations;
    bestSeen = std::max(bestSeen, t.bestEvaluatedFitness);
    if (trace) trace->push_back(t);
    if (t.optimumEvaluated) {
      out.iterations = iterations;
      out.evaluations = evaluations;
      out.success = true;
      out.finalDistance = 0;
      return out;
    }
    if (t.budgetExhausted) break;
  }
  out.iterations = iterations;
  out.evaluations = evaluations;
  out.success = false;
  out.finalDistance = params.n - static_cast<std::size_t>(bestSeen);
  return out;
}

/// Baseline (1+1) EA: flip each bit independently with the given rate, accept
/// iff the offspring is at least as fit. Implemented as ell ~ B(n, rate)
/// followed by a uniform ell-subset, which has exactly the independent
/// per-bit flip distribution. One evaluation per iteration, F = T + 1 on
/// success.
inline RunOutcome run_opo_ea(std::size_t n, double rate, const OneMaxInstance& inst,
                             RngStream& rng, std::uint64_t budget = 0) {
  if (!(rate > 0.0 && rate <= 1.0))
    throw std::invalid_argument("run_opo_ea: rate must be in (0,1]");
  if (n != inst.size()) throw std::invalid_argument("run_opo_ea: size mismatch");
  if (budget == 0) budget = default_budget(n);

  RunOutcome out;
  out.seed = rng.seed();

  BitString x = BitString::random(n, rng);
  const auto& z = inst.target();
  int fx = inst.evaluate(x);
  std::uint64_t evaluations = 1;
  int bestSeen = fx;
  if (fx == static_cast<int>(n)) {
    out.evaluations = 1;
    out.success = true;
    return out;
  }

  static thread_local std::vector<std::uint32_t> flips;
  std::uint64_t iterations = 0;
  while (evaluations < budget) {
    const auto ell = static_cast<std::size_t>(
        sample_binomial(static_cast<std::int64_t>(n), rate, rng));
    sample_k_subset_into(n, ell, rng, flips);
    int good = 0;
    for (auto pos : flips) good += static_cast<int>(x.get(pos) != z.get(pos));
    const int f = fx + 2 * good - static_cast<int>(ell);
    ++evaluations;
    ++iterations;
    bestSeen = std::max(bestSeen, f);
    if (f == static_cast<int>(n)) {
      out.iterations = iterations;
      out.evaluations = evaluations;
      out.success = true;
      out.finalDistance = 0;
      return out;
    }
    if (f >= fx) {
      for (auto pos : flips) x.flip(pos);
      fx = f;
    }
  }
  out.iterations = iterations;
  out.evaluations = evaluations;
  out.success = false;
  out.finalDistance = n - static_cast<std::size_t>(bestSeen);
  return out;
}

}  // namespace ollga
