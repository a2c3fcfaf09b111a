#pragma once

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ollga/analysis.hpp"
#include "ollga/bitstring.hpp"
#include "ollga/drift.hpp"
#include "ollga/engine.hpp"
#include "ollga/version.hpp"

namespace ollga {

/// Errors in sweep configuration (unknown rule strings, missing keys,
/// malformed files). The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TargetRule { ones, zeros, random_point };

inline const char* to_string(TargetRule t) noexcept {
  switch (t) {
    case TargetRule::ones: return "ones";
    case TargetRule::zeros: return "zeros";
    default: return "random";
  }
}

inline TargetRule target_rule_from_string(const std::string& s) {
  if (s == "ones") return TargetRule::ones;
  if (s == "zeros") return TargetRule::zeros;
  if (s == "random") return TargetRule::random_point;
  throw ConfigError("unknown target rule: " + s);
}

/// Declarative grid over the parameter space plus replication and seeding
/// policy. Grid entries for lambda may be numbers or the rule "lambda_star";
/// entries for k may be numbers, "lambda" (copy the cell's lambda) or
/// "lambda_star". Non-integer lambda values round to the nearest integer >= 1.
struct SweepSpec {
  std::vector<std::size_t> sizes;
  std::vector<std::string> lambdas{"lambda_star"};
  std::vector<std::string> ks{"lambda"};
  std::vector<double> rs{1.0};
  Variant variant = Variant::standard;
  int reps = 1;
  std::optional<std::uint64_t> masterSeed;
  std::uint64_t budget = 0;  // 0 = default rule 10^4 * n * log2(n)
  TargetRule target = TargetRule::ones;
  std::string output;
};

struct Cell {
  std::size_t n = 0;
  int lambda = 1;
  double k = 1.0;
  double r = 1.0;
  Variant variant = Variant::standard;
};

struct Job {
  Cell cell;
  std::size_t cellIndex = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::uint64_t budget = 0;
};

struct SkippedCell {
  Cell cell;
  std::string reason;
};

struct MaterializedSweep {
  std::vector<Job> jobs;
  std::vector<SkippedCell> skipped;
  std::size_t cellCount = 0;
};

struct ResultRow {
  std::size_t n = 0;
  int lambda = 1;
  double k = 1.0;
  double r = 1.0;
  Variant variant = Variant::standard;
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;
  std::uint64_t evaluations = 0;
  bool success = false;
  std::size_t finalDistance = 0;
  std::uint64_t wallMs = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* result_csv_header =
    "n,lambda,k,r,variant,seed,T,F,success,final_distance,wall_ms";

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) items.push_back(std::move(t));
  }
  return items;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("cannot parse ") + what + ": " + s);
  }
}

inline std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("cannot parse ") + what + ": " + s);
  }
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parse a key = value spec file (comma lists, '#' comments). Unknown keys
/// are errors so typos do not silently change an experiment.
inline SweepSpec parse_spec_text(const std::string& text) {
  SweepSpec spec;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(trimmed.substr(0, eq));
    const std::string value = detail::trim(trimmed.substr(eq + 1));
    if (key == "sizes") {
      spec.sizes.clear();
      for (const auto& item : detail::split_list(value))
        spec.sizes.push_back(detail::parse_u64(item, "sizes"));
    } else if (key == "lambda") {
      spec.lambdas = detail::split_list(value);
    } else if (key == "k") {
      spec.ks = detail::split_list(value);
    } else if (key == "r") {
      spec.rs.clear();
      for (const auto& item : detail::split_list(value))
        spec.rs.push_back(detail::parse_double(item, "r"));
    } else if (key == "variant") {
      try {
        spec.variant = variant_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (key == "reps") {
      spec.reps = static_cast<int>(detail::parse_u64(value, "reps"));
    } else if (key == "master_seed") {
      spec.masterSeed = detail::parse_u64(value, "master_seed");
    } else if (key == "budget") {
      spec.budget = value == "auto" ? 0 : detail::parse_u64(value, "budget");
    } else if (key == "target") {
      spec.target = target_rule_from_string(value);
    } else if (key == "output") {
      spec.output = value;
    } else {
      throw ConfigError("unknown key: " + key);
    }
  }
  return spec;
}

inline SweepSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str());
}

/// Stable hash of the resolved spec, recorded next to results.
inline std::uint64_t spec_hash(const SweepSpec& spec) {
  std::string canon = "sizes=";
  for (auto n : spec.sizes) canon += std::to_string(n) + ",";
  canon += ";lambda=";
  for (const auto& s : spec.lambdas) canon += s + ",";
  canon += ";k=";
  for (const auto& s : spec.ks) canon += s + ",";
  canon += ";r=";
  for (double r : spec.rs) canon += detail::format_double(r) + ",";
  canon += ";variant=" + std::string(to_string(spec.variant));
  canon += ";reps=" + std::to_string(spec.reps);
  canon += ";seed=" + std::to_string(spec.masterSeed.value_or(0));
  canon += ";budget=" + std::to_string(spec.budget);
  canon += ";target=" + std::string(to_string(spec.target));
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// The OneMax target a sweep optimizes, derived deterministically from the
/// master seed when the rule asks for a random point.
inline OneMaxInstance instance_for(TargetRule rule, std::size_t n, std::uint64_t masterSeed) {
  switch (rule) {
    case TargetRule::ones:
      return OneMaxInstance::classic(n);
    case TargetRule::zeros:
      return OneMaxInstance(BitString::ones(n).complemented());
    default: {
      RngStream rng(mix_seed(masterSeed, 0x7a26e7ULL));
      return OneMaxInstance(BitString::random(n, rng));
    }
  }
}

/// Resolve grid rules and expand the cartesian product (size, lambda, k, r)
/// in deterministic order. Cells violating parameter invariants are recorded
/// as skipped with a reason instead of failing the sweep. Job seeds derive
/// from (masterSeed, cellIndex, repIndex) only, so the job list is identical
/// across runs and scheduling.
inline MaterializedSweep materialize(const SweepSpec& spec) {
  if (!spec.masterSeed) throw ConfigError("master_seed is required (set it or pass --seed)");
  if (spec.sizes.empty() || spec.lambdas.empty() || spec.ks.empty() || spec.rs.empty())
    throw ConfigError("empty grid");
  if (spec.reps < 1) throw ConfigError("reps must be >= 1");

  MaterializedSweep out;
  std::size_t cellIndex = 0;
  for (std::size_t n : spec.sizes) {
    for (const auto& lambdaEntry : spec.lambdas) {
      int lambda;
      if (lambdaEntry == "lambda_star") {
        lambda = static_cast<int>(std::lround(std::max(1.0, lambda_star(static_cast<double>(n)))));
      } else {
        const double v = detail::parse_double(lambdaEntry, "lambda");
        lambda = static_cast<int>(std::lround(std::max(1.0, v)));
      }
      for (const auto& kEntry : spec.ks) {
        double k;
        if (kEntry == "lambda")
          k = static_cast<double>(lambda);
        else if (kEntry == "lambda_star")
          k = lambda_star(static_cast<double>(n));
        else
          k = detail::parse_double(kEntry, "k");
        for (double r : spec.rs) {
          Cell cell{n, lambda, k, r, spec.variant};
          GaParams params{n, lambda, k, r, spec.variant, spec.budget};
          try {
            params.validate();
          } catch (const std::invalid_argument& e) {
            out.skipped.push_back({cell, e.what()});
            ++cellIndex;
            continue;
          }
          for (int rep = 0; rep < spec.reps; ++rep) {
            Job job;
            job.cell = cell;
            job.cellIndex = cellIndex;
            job.rep = rep;
            job.seed = mix_seed(mix_seed(*spec.masterSeed, cellIndex), static_cast<std::uint64_t>(rep));
            job.budget = spec.budget;
            out.jobs.push_back(job);
          }
          ++cellIndex;
        }
      }
    }
  }
  out.cellCount = cellIndex;
  if (out.jobs.empty()) throw ConfigError("materialize: no runnable cells");
  return out;
}

struct ExecuteResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> failures;
};

/// Run all jobs on a fixed-size worker pool. Every job owns the stream
/// derived from its seed, and rows land at their job's index, so the output
/// is in (cell, rep) order and byte-identical for any worker count. Wall
/// clock per run is recorded only when `timing` is set; it is the one field
/// scheduling could perturb.
inline ExecuteResult execute(const SweepSpec& spec, const MaterializedSweep& mat,
                             unsigned parallelism, bool timing = false) {
  if (mat.jobs.empty()) throw ConfigError("execute: empty job list");
  if (!spec.masterSeed) throw ConfigError("execute: master seed not set");
  parallelism = std::max(1u, parallelism);

  std::map<std::size_t, OneMaxInstance> instances;
  for (const auto& job : mat.jobs)
    if (!instances.contains(job.cell.n))
      instances.emplace(job.cell.n, instance_for(spec.target, job.cell.n, *spec.masterSeed));

  ExecuteResult result;
  result.rows.resize(mat.jobs.size());
  std::vector<std::string> failures(mat.jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= mat.jobs.size()) return;
      const Job& job = mat.jobs[i];
      ResultRow row;
      row.n = job.cell.n;
      row.lambda = job.cell.lambda;
      row.k = job.cell.k;
      row.r = job.cell.r;
      row.variant = job.cell.variant;
      row.seed = job.seed;
      try {
        GaParams params{job.cell.n, job.cell.lambda, job.cell.k, job.cell.r, job.cell.variant,
                        job.budget};
        RngStream rng(job.seed);
        const auto start = std::chrono::steady_clock::now();
        const RunOutcome outcome = run(params, instances.at(job.cell.n), rng);
        const auto stop = std::chrono::steady_clock::now();
        row.iterations = outcome.iterations;
        row.evaluations = outcome.evaluations;
        row.success = outcome.success;
        row.finalDistance = outcome.finalDistance;
        if (timing)
          row.wallMs = static_cast<std::uint64_t>(
              std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count());
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
      result.rows[i] = row;
    }
  };

  if (parallelism == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < parallelism; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty())
      result.failures.push_back("job " + std::to_string(i) + ": " + failures[i]);
  return result;
}

inline std::string emit_csv_row(const ResultRow& row) {
  std::string out;
  out += std::to_string(row.n);
  out += ',' + std::to_string(row.lambda);
  out += ',' + detail::format_double(row.k);
  out += ',' + detail::format_double(row.r);
  out += ',' + std::string(to_string(row.variant));
  out += ',' + std::to_string(row.seed);
  out += ',' + std::to_string(row.iterations);
  out += ',' + std::to_string(row.evaluations);
  out += row.success ? ",true" : ",false";
  out += ',' + std::to_string(row.finalDistance);
  out += ',' + std::to_string(row.wallMs);
  return out;
}

inline std::string emit_csv(const std::vector<ResultRow>& rows) {
  std::string out = result_csv_header;
  out += '\n';
  for (const auto& row : rows) {
    out += emit_csv_row(row);
    out += '\n';
  }
  return out;
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || detail::trim(line) != result_csv_header)
    throw ConfigError("results: missing or unexpected CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(ss, line)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_list(line);
    if (fields.size() != 11) throw ConfigError("results: malformed row: " + line);
    ResultRow row;
    row.n = detail::parse_u64(fields[0], "n");
    row.lambda = static_cast<int>(detail::parse_u64(fields[1], "lambda"));
    row.k = detail::parse_double(fields[2], "k");
    row.r = detail::parse_double(fields[3], "r");
    row.variant = fields[4] == "standard" ? Variant::standard : Variant::all_compete;
    row.seed = detail::parse_u64(fields[5], "seed");
    row.iterations = detail::parse_u64(fields[6], "T");
    row.evaluations = detail::parse_u64(fields[7], "F");
    if (fields[8] != "true" && fields[8] != "false")
      throw ConfigError("results: malformed success flag: " + fields[8]);
    row.success = fields[8] == "true";
    row.finalDistance = detail::parse_u64(fields[9], "final_distance");
    row.wallMs = detail::parse_u64(fields[10], "wall_ms");
    rows.push_back(row);
  }
  return rows;
}

/// Write rows plus a JSON sidecar (<path>.meta.json) carrying the spec hash,
/// tool version, master seed and any skipped cells.
inline void write_results(const std::string& path, const SweepSpec& spec,
                          const MaterializedSweep& mat, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write results file: " + path);
  out << emit_csv(rows);
  out.close();

  nlohmann::json meta;
  char hashHex[32];
  std::snprintf(hashHex, sizeof hashHex, "%016" PRIx64, spec_hash(spec));
  meta["spec_hash"] = hashHex;
  meta["tool_version"] = version;
  meta["master_seed"] = spec.masterSeed.value_or(0);
  meta["target"] = to_string(spec.target);
  meta["cells"] = mat.cellCount;
  meta["rows"] = rows.size();
  meta["skipped"] = nlohmann::json::array();
  for (const auto& s : mat.skipped) {
    meta["skipped"].push_back({{"n", s.cell.n},
                               {"lambda", s.cell.lambda},
                               {"k", s.cell.k},
                               {"r", s.cell.r},
                               {"reason", s.reason}});
  }
  std::ofstream metaOut(path + ".meta.json", std::ios::binary);
  if (!metaOut) throw std::runtime_error("cannot write sidecar: " + path + ".meta.json");
  metaOut << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

struct CellKey {
  std::size_t n;
  int lambda;
  double k, r;
  Variant variant;
  auto operator<=>(const CellKey&) const = default;
};

inline std::map<CellKey, std::vector<double>> group_evaluations(const std::vector<ResultRow>& rows) {
  std::map<CellKey, std::vector<double>> groups;
  for (const auto& row : rows)
    groups[CellKey{row.n, row.lambda, row.k, row.r, row.variant}].push_back(
        static_cast<double>(row.evaluations));
  return groups;
}

inline nlohmann::json stats_json(const SummaryStats& s) {
  return {{"count", s.count},     {"mean", s.mean},       {"median", s.median},
          {"se", s.standardError}, {"ci_low", s.ciLow},    {"ci_high", s.ciHigh}};
}

}  // namespace detail

/// Per-size ratio of measured mean F to the predicted optimum f_star(n),
/// with the spread (max/min) of the ratios across sizes.
inline nlohmann::json report_scaling(const std::vector<ResultRow>& rows) {
  const auto groups = detail::group_evaluations(rows);
  if (groups.empty()) throw ConfigError("report: no rows");
  std::map<std::size_t, std::vector<double>> bySize;
  for (const auto& [key, values] : groups)
    bySize[key.n].insert(bySize[key.n].end(), values.begin(), values.end());

  nlohmann::json perSize = nlohmann::json::array();
  double ratioMin = std::numeric_limits<double>::infinity();
  double ratioMax = 0.0;
  for (const auto& [n, values] : bySize) {
    const SummaryStats s = summarize(values);
    const double fs = f_star(static_cast<double>(n));
    const double ratio = s.mean / fs;
    ratioMin = std::min(ratioMin, ratio);
    ratioMax = std::max(ratioMax, ratio);
    nlohmann::json entry = detail::stats_json(s);
    entry["n"] = n;
    entry["f_star"] = fs;
    entry["ratio"] = ratio;
    perSize.push_back(entry);
  }
  return {{"mode", "scaling"},
          {"per_size", perSize},
          {"ratio_max", ratioMax},
          {"ratio_min", ratioMin},
          {"ratio_spread", ratioMax / ratioMin}};
}

/// Mean F as a function of lambda for a single problem size, with the
/// u-shape minimum and endpoint ratios.
inline nlohmann::json report_u_shape(const std::vector<ResultRow>& rows) {
  const auto groups = detail::group_evaluations(rows);
  if (groups.empty()) throw ConfigError("report: no rows");
  const std::size_t n = groups.begin()->first.n;
  for (const auto& [key, values] : groups)
    if (key.n != n) throw ConfigError("u-shape report expects a single problem size");

  std::vector<std::pair<double, double>> curve;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, values] : groups) {
    const SummaryStats s = summarize(values);
    curve.emplace_back(static_cast<double>(key.lambda), s.mean);
    nlohmann::json entry = detail::stats_json(s);
    entry["lambda"] = key.lambda;
    cells.push_back(entry);
  }
  const UShapeSummary u = locate_u_shape(curve);
  return {{"mode", "u-shape"},
          {"n", n},
          {"lambda_star", lambda_star(static_cast<double>(n))},
          {"cells", cells},
          {"argmin_lambda", u.argminX},
          {"min_mean", u.minValue},
          {"first_ratio", u.firstRatio},
          {"last_ratio", u.lastRatio}};
}

/// Compare mean F between two result sets (e.g. two targets); reports the
/// bootstrap 95% CIs and whether they overlap.
inline nlohmann::json report_unbiasedness(const std::vector<ResultRow>& a,
                                          const std::vector<ResultRow>& b) {
  if (a.empty() || b.empty()) throw ConfigError("report: no rows");
  std::vector<double> fa, fb;
  for (const auto& row : a) fa.push_back(static_cast<double>(row.evaluations));
  for (const auto& row : b) fb.push_back(static_cast<double>(row.evaluations));
  const SummaryStats sa = summarize(fa);
  const SummaryStats sb = summarize(fb);
  const bool overlap = sa.ciLow <= sb.ciHigh && sb.ciLow <= sa.ciHigh;
  return {{"mode", "unbiasedness"},
          {"first", detail::stats_json(sa)},
          {"second", detail::stats_json(sb)},
          {"ci_overlap", overlap}};
}

inline constexpr const char* drift_csv_header = "d0,ell,gain,good,bad,surviving_good,surviving_bad";

inline std::string emit_drift_csv(const std::vector<DriftSample>& samples) {
  std::string out = drift_csv_header;
  out += '\n';
  for (const auto& s : samples) {
    out += std::to_string(s.d0);
    out += ',' + std::to_string(s.ell);
    out += ',' + std::to_string(s.gain);
    out += ',' + std::to_string(s.winnerAccounting.good);
    out += ',' + std::to_string(s.winnerAccounting.bad);
    out += ',' + std::to_string(s.winnerAccounting.survivingGood);
    out += ',' + std::to_string(s.winnerAccounting.survivingBad);
    out += '\n';
  }
  return out;
}

inline std::vector<DriftSample> parse_drift_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || detail::trim(line) != drift_csv_header)
    throw ConfigError("drift results: missing or unexpected CSV header");
  std::vector<DriftSample> samples;
  while (std::getline(ss, line)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_list(line);
    if (fields.size() != 7) throw ConfigError("drift results: malformed row: " + line);
    DriftSample s;
    s.d0 = static_cast<int>(std::stol(fields[0]));
    s.ell = static_cast<int>(std::stol(fields[1]));
    s.gain = static_cast<int>(std::stol(fields[2]));
    s.winnerAccounting.good = std::stol(fields[3]);
    s.winnerAccounting.bad = std::stol(fields[4]);
    s.winnerAccounting.survivingGood = std::stol(fields[5]);
    s.winnerAccounting.survivingBad = std::stol(fields[6]);
    s.winnerAccounting.hamming = s.winnerAccounting.good + s.winnerAccounting.bad;
    samples.push_back(s);
  }
  return samples;
}

/// Summary of one-iteration gain observations: mean/max gain, the count of
/// cap violations (gain exceeding the drawn ell; always zero for a correct
/// engine) and the mean step size.
inline nlohmann::json report_drift(const std::vector<DriftSample>& samples) {
  if (samples.empty()) throw ConfigError("report: no drift samples");
  std::vector<double> gains;
  gains.reserve(samples.size());
  double meanEll = 0.0;
  int maxGain = std::numeric_limits<int>::min();
  std::size_t capViolations = 0;
  for (const auto& s : samples) {
    gains.push_back(static_cast<double>(s.gain));
    meanEll += static_cast<double>(s.ell);
    maxGain = std::max(maxGain, s.gain);
    if (s.gain > s.ell) ++capViolations;
  }
  meanEll /= static_cast<double>(samples.size());
  const SummaryStats s = summarize(gains);
  nlohmann::json out = {{"mode", "drift"},
                        {"gain", detail::stats_json(s)},
                        {"mean_ell", meanEll},
                        {"max_gain", maxGain},
                        {"cap_violations", capViolations}};
  return out;
}

}  // namespace ollga
