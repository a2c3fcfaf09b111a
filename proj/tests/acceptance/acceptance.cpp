// Acceptance suite: one check per shipped guarantee, each printed as a
// single PASS/FAIL line. Exit status 0 iff every check passes. Seeds are
// pinned so every number below is reproducible; statistical tolerances are
// part of the check, not calibration knobs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ollga/ollga.hpp"

using namespace ollga;

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<bool(std::string&)> check;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------- 1
bool composition_law_oracle(std::string& detail) {
  RngStream xrng(0xacce5501);
  double worst = 0.0;
  int cases = 0;
  for (std::size_t n : {2u, 4u, 6u, 8u}) {
    const double nd = static_cast<double>(n);
    for (double k : {1.0, nd / 2.0, nd}) {
      for (double r : {0.5, 1.0, std::min(2.0, k)}) {
        if (r > k) continue;
        for (int xi = 0; xi < 4; ++xi) {
          BitString x = xi == 0 ? BitString(n)
                      : xi == 1 ? BitString::ones(n)
                                : BitString::random(n, xrng);
          const double d =
              tvd(exact_composed_offspring_law(x, k, r), exact_standard_mutation_law(x, r / nd));
          worst = std::max(worst, d);
          ++cases;
        }
      }
    }
  }
  detail = fmt("max TVD %.3e over %d cases (tolerance 1e-12)", worst, cases);
  return worst < 1e-12;
}

// ---------------------------------------------------------------------- 2
bool goodbit_law_chisquare(std::string& detail) {
  const std::int64_t n = 20, ell = 5, d = 8;
  const Pmf ref = exact_goodbits_law(n, ell, d);
  OneMaxInstance inst = OneMaxInstance::classic(static_cast<std::size_t>(n));
  RngStream rng(0xacce5502);
  const EmpiricalLaw law = empirical_law(
      [&](RngStream& r) {
        const BitString x = make_state_at_distance(inst, static_cast<std::size_t>(d), r);
        const BitString mutant = mutate(x, static_cast<std::size_t>(ell), r);
        return static_cast<std::int64_t>(account(inst, x, mutant).good);
      },
      1000000, ref, rng);
  detail = fmt("chi2=%.2f df=%d p=%.4f (threshold 0.001)", law.statistic, law.degreesOfFreedom,
               law.pValue);
  return law.pValue > 0.001;
}

// ---------------------------------------------------------------------- 3
bool evaluation_floor(std::string& detail) {
  OneMaxInstance inst = OneMaxInstance::classic(16);
  GaParams params{16, 10000, 8.0, 1.0, Variant::standard, 0};
  const RngStream master(0xacce5503);
  double sum = 0.0;
  const int reps = 500;
  for (int i = 0; i < reps; ++i) {
    RngStream rng = master.child(static_cast<std::uint64_t>(i));
    sum += static_cast<double>(run(params, inst, rng).evaluations);
  }
  const double mean = sum / reps;
  detail = fmt("mean F = %.1f over %d runs (floor 5000*0.95 = 4750)", mean, reps);
  return mean >= 4750.0;
}

// ---------------------------------------------------------------------- 4
bool drift_cap(std::string& detail) {
  const std::size_t n = 1000;
  OneMaxInstance inst = OneMaxInstance::classic(n);
  GaParams params{n, 8, 8.0, 1.0, Variant::standard, 0};
  const RngStream master(0xacce5504);
  const std::size_t reps = 100000;
  const auto samples = probe_drift(params, inst, 500, reps, master);
  std::size_t violations = 0;
  double sum = 0.0, sq = 0.0;
  for (const auto& s : samples) {
    if (s.gain > s.ell) ++violations;
    sum += s.gain;
    sq += static_cast<double>(s.gain) * s.gain;
  }
  const double mean = sum / static_cast<double>(reps);
  const double se = std::sqrt((sq / static_cast<double>(reps) - mean * mean) /
                              static_cast<double>(reps));
  detail = fmt("violations=%zu / %zu, mean gain %.4f <= k + 4se = %.4f", violations, reps, mean,
               8.0 + 4.0 * se);
  return violations == 0 && mean <= 8.0 + 4.0 * se;
}

// ---------------------------------------------------------------------- 5
std::vector<ResultRow> run_suggested_cells(const std::vector<std::size_t>& sizes, int reps,
                                           Variant variant, std::uint64_t seed) {
  SweepSpec spec;
  spec.sizes = sizes;
  spec.lambdas = {"lambda_star"};
  spec.ks = {"lambda"};
  spec.rs = {1.0};
  spec.variant = variant;
  spec.reps = reps;
  spec.masterSeed = seed;
  const MaterializedSweep mat = materialize(spec);
  return execute(spec, mat, 2).rows;
}

bool scaling_at_suggested(std::string& detail) {
  const auto rows =
      run_suggested_cells({1u << 10, 1u << 12, 1u << 14, 1u << 16}, 200, Variant::standard,
                          0xacce5505);
  const nlohmann::json j = report_scaling(rows);
  for (const auto& row : rows)
    if (!row.success) {
      detail = "a run exhausted its budget";
      return false;
    }
  const double spread = j["ratio_spread"].get<double>();
  std::string ratios;
  for (const auto& e : j["per_size"])
    ratios += fmt("%s%.3f", ratios.empty() ? "" : ", ", e["ratio"].get<double>());
  detail = fmt("mean-F/f_star per size: %s; spread %.3f (<= 3)", ratios.c_str(), spread);
  return spread <= 3.0;
}

// ---------------------------------------------------------------------- 6
bool u_shape_in_lambda(std::string& detail) {
  SweepSpec spec;
  spec.sizes = {1u << 14};
  spec.lambdas = {"1", "2", "4", "8", "16", "32", "64", "128"};
  spec.ks = {"lambda"};
  spec.rs = {1.0};
  spec.reps = 100;
  spec.masterSeed = 0xacce5506;
  const MaterializedSweep mat = materialize(spec);
  const auto rows = execute(spec, mat, 2).rows;
  const nlohmann::json j = report_u_shape(rows);
  const double argmin = j["argmin_lambda"].get<double>();
  const double first = j["first_ratio"].get<double>();
  const double last = j["last_ratio"].get<double>();
  const double ls = lambda_star(static_cast<double>(1u << 14));
  const double lo = std::max(1.0, ls / 4.0);
  const double hi = 8.0 * ls;
  detail = fmt("argmin=%g in [%.2f, %.2f], endpoint ratios %.2f / %.2f (> 1.25)", argmin, lo, hi,
               first, last);
  return argmin >= lo && argmin <= hi && first > 1.25 && last > 1.25;
}

// ---------------------------------------------------------------------- 7
bool unbiasedness(std::string& detail) {
  const std::size_t n = 1u << 12;
  const GaParams params = GaParams::suggested(n);
  const OneMaxInstance classic = OneMaxInstance::classic(n);
  RngStream zrng(0xacce5507);
  const OneMaxInstance shifted(BitString::random(n, zrng));

  auto collect = [&](const OneMaxInstance& inst, std::uint64_t seed) {
    std::vector<ResultRow> rows;
    const RngStream master(seed);
    for (int i = 0; i < 300; ++i) {
      RngStream rng = master.child(static_cast<std::uint64_t>(i));
      const RunOutcome out = run(params, inst, rng);
      ResultRow row;
      row.n = n;
      row.evaluations = out.evaluations;
      row.success = out.success;
      rows.push_back(row);
    }
    return rows;
  };
  const auto a = collect(classic, 0xacce5508);
  const auto b = collect(shifted, 0xacce5509);
  const nlohmann::json j = report_unbiasedness(a, b);
  detail = fmt("mean F %.1f ci [%.1f, %.1f] vs %.1f ci [%.1f, %.1f]; overlap=%s",
               j["first"]["mean"].get<double>(), j["first"]["ci_low"].get<double>(),
               j["first"]["ci_high"].get<double>(), j["second"]["mean"].get<double>(),
               j["second"]["ci_low"].get<double>(), j["second"]["ci_high"].get<double>(),
               j["ci_overlap"].get<bool>() ? "yes" : "no");
  return j["ci_overlap"].get<bool>();
}

// ---------------------------------------------------------------------- 8
bool variant_no_improvement(std::string& detail) {
  const auto standard =
      run_suggested_cells({1u << 14}, 200, Variant::standard, 0xacce550a);
  const auto allCompete =
      run_suggested_cells({1u << 14}, 200, Variant::all_compete, 0xacce550a);
  auto meanF = [](const std::vector<ResultRow>& rows) {
    double s = 0.0;
    for (const auto& row : rows) s += static_cast<double>(row.evaluations);
    return s / static_cast<double>(rows.size());
  };
  const double ratio = meanF(allCompete) / meanF(standard);
  detail = fmt("mean F all-compete/standard = %.4f (within [0.5, 1.1])", ratio);
  return ratio >= 0.5 && ratio <= 1.1;
}

// ---------------------------------------------------------------------- 9
bool conditional_binomial_bound(std::string& detail) {
  struct Config {
    std::int64_t n;
    double p;
    std::int64_t k;
  } configs[] = {{100, 0.1, 15}, {50, 0.5, 30}, {1000, 0.01, 20}};
  std::string parts;
  bool pass = true;
  std::uint64_t seed = 0xacce550b;
  for (const auto& cfg : configs) {
    const RngStream master(seed++);
    const ConditionalMean c =
        conditional_binomial_mean(cfg.n, cfg.p, cfg.k, 1000000, master, 2);
    const double bound =
        static_cast<double>(cfg.k) + (static_cast<double>(cfg.n - cfg.k)) * cfg.p;
    const bool ok = c.mean <= bound + 4.0 * c.standardError;
    pass = pass && ok;
    parts += fmt("%s(%lld,%.2f,%lld): %.4f <= %.4f", parts.empty() ? "" : "; ",
                 static_cast<long long>(cfg.n), cfg.p, static_cast<long long>(cfg.k), c.mean,
                 bound + 4.0 * c.standardError);
  }
  detail = parts;
  return pass;
}

// --------------------------------------------------------------------- 10
bool determinism(std::string& detail) {
  namespace fs = std::filesystem;
  SweepSpec spec;
  spec.sizes = {64, 256};
  spec.lambdas = {"2", "lambda_star"};
  spec.ks = {"lambda"};
  spec.rs = {1.0, 0.5};
  spec.reps = 5;
  spec.masterSeed = 0xacce550c;

  const fs::path dir = fs::temp_directory_path() / "ollga_acceptance";
  fs::create_directories(dir);
  std::vector<std::string> csvs;
  int fileIndex = 0;
  for (int round = 0; round < 2; ++round) {
    for (unsigned workers : {1u, 8u}) {
      const MaterializedSweep mat = materialize(spec);
      const ExecuteResult result = execute(spec, mat, workers);
      const fs::path path = dir / fmt("det_%d.csv", fileIndex++);
      write_results(path.string(), spec, mat, result.rows);
      std::ifstream in(path, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      csvs.push_back(buf.str());
    }
  }
  fs::remove_all(dir);
  bool identical = true;
  for (const auto& csv : csvs) identical = identical && csv == csvs.front();
  detail = fmt("4 executions (2 rounds x parallelism {1,8}): %s, %zu bytes each",
               identical ? "byte-identical" : "MISMATCH", csvs.front().size());
  return identical;
}

// --------------------------------------------------------------------- 11
bool predictor_brute_force(std::string& detail) {
  std::string parts;
  bool pass = true;
  for (int e : {10, 20, 30}) {
    const double n = std::pow(2.0, e);
    const auto lambdaMax = static_cast<std::uint64_t>(n);
    const TwoTermScan scan = scan_two_term_argmin(n, lambdaMax, 2);
    const double ls = lambda_star(n);
    const auto argmin = static_cast<double>(scan.argminLambda);
    const bool ok = argmin >= ls / 4.0 && argmin <= ls * 4.0;
    pass = pass && ok;
    parts += fmt("%sn=2^%d: argmin=%llu lambda_star=%.2f", parts.empty() ? "" : "; ", e,
                 static_cast<unsigned long long>(scan.argminLambda), ls);
  }
  detail = parts + " (factor-4 window)";
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

  const std::vector<Criterion> criteria = {
      {1, "composition-law oracle", composition_law_oracle},
      {2, "hypergeometric good-bit law", goodbit_law_chisquare},
      {3, "evaluation-count floor min{lambda,2^n}/2", evaluation_floor},
      {4, "drift cap gain <= ell and mean gain <= k", drift_cap},
      {5, "runtime scaling at suggested parameters", scaling_at_suggested},
      {6, "u-shape in lambda", u_shape_in_lambda},
      {7, "unbiasedness across targets", unbiasedness},
      {8, "all-compete variant is no improvement", variant_no_improvement},
      {9, "conditional binomial upper bound", conditional_binomial_bound},
      {10, "deterministic sweeps across parallelism", determinism},
      {11, "predictor minimizer brute force", predictor_brute_force},
  };

  bool allPass = true;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = criterion.check(detail);
    } catch (const std::exception& e) {
      detail = fmt("exception: %s", e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%2d] %s %s: %s (%.1fs)\n", criterion.id, pass ? "PASS" : "FAIL", criterion.name,
                detail.c_str(), secs);
    std::fflush(stdout);
    allPass = allPass && pass;
  }
  return allPass ? 0 : 1;
}
