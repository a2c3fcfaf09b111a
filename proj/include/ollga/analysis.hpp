#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "ollga/rng.hpp"

namespace ollga {

// Log conventions used by all closed-form predictors: binary log with
// log2c(v) = 1 for v <= 2, natural log with lnc(v) = 1 for v <= e. The
// clamps make iterated logarithms total and positive.
inline double log2c(double v) noexcept { return v <= 2.0 ? 1.0 : std::log2(v); }
inline double lnc(double v) noexcept { return v <= std::exp(1.0) ? 1.0 : std::log(v); }

/// Optimal offspring population size sqrt(log n * loglog n / logloglog n).
inline double lambda_star(double n) {
  if (n < 1.0) throw std::invalid_argument("lambda_star: n must be >= 1");
  const double l = log2c(n);
  const double ll = log2c(l);
  const double lll = log2c(ll);
  return std::sqrt(l * ll / lll);
}

/// Expected optimization time at the optimal parameters: n log n / lambda_star,
/// equivalently n * sqrt(log n * logloglog n / loglog n).
inline double f_star(double n) {
  if (n < 1.0) throw std::invalid_argument("f_star: n must be >= 1");
  return n * log2c(n) / lambda_star(n);
}

/// Two-term runtime shape max{n log n / lambda, n lambda loglog(lambda)/log(lambda)},
/// evaluated with constant factor 1. Compare shapes and ratios only, never
/// absolute values.
inline double two_term_runtime(double n, double lambda) {
  if (n < 2.0) throw std::invalid_argument("two_term_runtime: n must be >= 2");
  if (lambda < 1.0) throw std::invalid_argument("two_term_runtime: lambda must be >= 1");
  const double first = n * log2c(n) / lambda;
  const double ll = log2c(lambda);
  const double second = n * lambda * log2c(ll) / ll;
  return std::max(first, second);
}

struct TwoTermScan {
  std::uint64_t argminLambda = 1;
  double minValue = 0.0;
};

/// Brute-force integer-lambda minimizer of two_term_runtime over [1..lambdaMax].
/// Ties resolve to the smallest lambda. Optionally splits the range over
/// worker threads; the combined result is independent of the split.
inline TwoTermScan scan_two_term_argmin(double n, std::uint64_t lambdaMax,
                                        unsigned workers = 1) {
  if (lambdaMax < 1) throw std::invalid_argument("scan_two_term_argmin: empty range");
  workers = std::max(1u, workers);
  auto scan_range = [n](std::uint64_t lo, std::uint64_t hi) {
    TwoTermScan best{lo, two_term_runtime(n, static_cast<double>(lo))};
    for (std::uint64_t lam = lo + 1; lam <= hi; ++lam) {
      const double v = two_term_runtime(n, static_cast<double>(lam));
      if (v < best.minValue) {
        best.minValue = v;
        best.argminLambda = lam;
      }
    }
    return best;
  };
  if (workers == 1 || lambdaMax < 4 * workers) return scan_range(1, lambdaMax);
  std::vector<TwoTermScan> partial(workers);
  std::vector<std::thread> threads;
  const std::uint64_t step = lambdaMax / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = 1 + w * step;
    const std::uint64_t hi = (w + 1 == workers) ? lambdaMax : (w + 1) * step;
    threads.emplace_back([&partial, w, lo, hi, &scan_range] { partial[w] = scan_range(lo, hi); });
  }
  for (auto& t : threads) t.join();
  TwoTermScan best = partial[0];
  for (unsigned w = 1; w < workers; ++w) {
    if (partial[w].minValue < best.minValue ||
        (partial[w].minValue == best.minValue && partial[w].argminLambda < best.argminLambda))
      best = partial[w];
  }
  return best;
}

/// Additive drift hitting time: distance x0 over per-step drift delta.
inline double additive_drift_time(double x0, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("additive_drift_time: delta must be positive");
  if (x0 < 0.0) throw std::invalid_argument("additive_drift_time: x0 must be >= 0");
  return x0 / delta;
}

/// Multiplicative drift lower bound on the expected hitting time:
/// (ln s0 - ln smin)/delta * (1-beta)/(1+beta).
inline double multiplicative_drift_lower(double s0, double smin, double delta, double beta) {
  if (!(smin >= 1.0) || !(s0 >= smin))
    throw std::invalid_argument("multiplicative_drift_lower: need s0 >= smin >= 1");
  if (!(delta > 0.0 && delta <= 1.0) || !(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("multiplicative_drift_lower: delta, beta must be in (0,1]");
  return (std::log(s0) - std::log(smin)) / delta * (1.0 - beta) / (1.0 + beta);
}

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double standardError = 0.0;
  double ciLow = 0.0;
  double ciHigh = 0.0;
};

/// Mean, median, standard error and a seeded bootstrap percentile 95% CI of
/// the mean. Deterministic given the seed; permutation-invariant.
inline SummaryStats summarize(std::span<const double> values, int bootstrapResamples = 2000,
                              std::uint64_t bootstrapSeed = 0x0b007'57a7ULL) {
  if (values.empty()) throw std::invalid_argument("summarize: empty input");
  SummaryStats s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = s.count / 2;
  s.median = (s.count % 2 == 1) ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.standardError = std::sqrt(ss / static_cast<double>(s.count - 1)) /
                      std::sqrt(static_cast<double>(s.count));
  }

  RngStream rng(bootstrapSeed);
  std::vector<double> means(static_cast<std::size_t>(bootstrapResamples));
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.count; ++i)
      acc += sorted[static_cast<std::size_t>(rng.next_below(s.count))];
    m = acc / static_cast<double>(s.count);
  }
  std::sort(means.begin(), means.end());
  auto percentile = [&means](double q) {
    const double idx = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  s.ciLow = percentile(0.025);
  s.ciHigh = percentile(0.975);
  return s;
}

struct UShapeSummary {
  double argminX = 0.0;
  double minValue = 0.0;
  double firstRatio = 0.0;  // curve value at the smallest x over the minimum
  double lastRatio = 0.0;   // curve value at the largest x over the minimum
};

/// Locate the minimum of a (x, value) curve; ties resolve to the smallest x.
inline UShapeSummary locate_u_shape(std::span<const std::pair<double, double>> curve) {
  if (curve.empty()) throw std::invalid_argument("locate_u_shape: empty curve");
  std::vector<std::pair<double, double>> pts(curve.begin(), curve.end());
  std::sort(pts.begin(), pts.end());
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].second < pts[best].second) best = i;
  UShapeSummary u;
  u.argminX = pts[best].first;
  u.minValue = pts[best].second;
  u.firstRatio = pts.front().second / u.minValue;
  u.lastRatio = pts.back().second / u.minValue;
  return u;
}

}  // namespace ollga
