#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ollga/ollga.hpp"

using namespace ollga;

namespace {

unsigned default_parallelism() {
  if (const char* env = std::getenv("OLLGA_PARALLELISM")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw != 0 ? hw : 1;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RunOptions {
  std::size_t n = 0;
  int lambda = 0;  // 0 = suggested
  double k = 0.0;  // 0 = lambda
  double r = 1.0;
  std::string variant = "standard";
  std::uint64_t budget = 0;
  std::uint64_t seed = 0;
  int reps = 1;
  std::string target = "ones";
  std::string output;
};

int cmd_run(const RunOptions& opt) {
  GaParams params = GaParams::suggested(opt.n);
  if (opt.lambda > 0) {
    params.lambda = opt.lambda;
    params.k = opt.k > 0.0 ? opt.k : static_cast<double>(opt.lambda);
    params.r = opt.r;
  } else if (opt.k > 0.0 || opt.r != 1.0) {
    params.k = opt.k > 0.0 ? opt.k : params.k;
    params.r = opt.r;
  }
  params.variant = variant_from_string(opt.variant);
  params.budget = opt.budget;
  params.validate();

  const OneMaxInstance inst = instance_for(target_rule_from_string(opt.target), opt.n, opt.seed);
  std::vector<ResultRow> rows;
  const RngStream master(opt.seed);
  for (int rep = 0; rep < opt.reps; ++rep) {
    RngStream rng = master.child(static_cast<std::uint64_t>(rep));
    const RunOutcome out = run(params, inst, rng);
    ResultRow row;
    row.n = params.n;
    row.lambda = params.lambda;
    row.k = params.k;
    row.r = params.r;
    row.variant = params.variant;
    row.seed = rng.seed();
    row.iterations = out.iterations;
    row.evaluations = out.evaluations;
    row.success = out.success;
    row.finalDistance = out.finalDistance;
    rows.push_back(row);
  }
  const std::string csv = emit_csv(rows);
  if (opt.output.empty())
    std::cout << csv;
  else
    write_text(opt.output, csv);
  return 0;
}

struct SweepOptions {
  std::string config;
  std::string sizes, lambdas, ks, rs, variant, target;
  int reps = -1;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  std::string output;
  unsigned parallelism = 0;
  bool timing = false;
};

int cmd_sweep(const SweepOptions& opt) {
  SweepSpec spec;
  if (!opt.config.empty()) spec = load_spec_file(opt.config);
  if (!opt.sizes.empty()) {
    spec.sizes.clear();
    for (const auto& item : detail::split_list(opt.sizes))
      spec.sizes.push_back(detail::parse_u64(item, "sizes"));
  }
  if (!opt.lambdas.empty()) spec.lambdas = detail::split_list(opt.lambdas);
  if (!opt.ks.empty()) spec.ks = detail::split_list(opt.ks);
  if (!opt.rs.empty()) {
    spec.rs.clear();
    for (const auto& item : detail::split_list(opt.rs))
      spec.rs.push_back(detail::parse_double(item, "r"));
  }
  if (!opt.variant.empty()) spec.variant = variant_from_string(opt.variant);
  if (opt.reps >= 0) spec.reps = opt.reps;
  if (opt.seed) spec.masterSeed = *opt.seed;
  if (opt.budget) spec.budget = *opt.budget;
  if (!opt.target.empty()) spec.target = target_rule_from_string(opt.target);
  if (!opt.output.empty()) spec.output = opt.output;

  const MaterializedSweep mat = materialize(spec);
  const unsigned workers = opt.parallelism != 0 ? opt.parallelism : default_parallelism();
  const ExecuteResult result = execute(spec, mat, workers, opt.timing);

  if (spec.output.empty()) {
    std::cout << emit_csv(result.rows);
  } else {
    write_results(spec.output, spec, mat, result.rows);
    std::fprintf(stderr, "wrote %zu rows to %s (%zu cells, %zu skipped, %u workers)\n",
                 result.rows.size(), spec.output.c_str(), mat.cellCount, mat.skipped.size(),
                 workers);
  }
  for (const auto& s : mat.skipped)
    std::fprintf(stderr, "skipped cell n=%zu lambda=%d k=%g r=%g: %s\n", s.cell.n, s.cell.lambda,
                 s.cell.k, s.cell.r, s.reason.c_str());
  if (!result.failures.empty()) {
    for (const auto& f : result.failures) std::fprintf(stderr, "failure: %s\n", f.c_str());
    return 1;
  }
  return 0;
}

struct DriftOptions {
  std::size_t n = 0;
  int lambda = 1;
  double k = 1.0;
  double r = 1.0;
  std::string variant = "standard";
  std::size_t d0 = 0;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_drift(const DriftOptions& opt) {
  GaParams params{opt.n, opt.lambda, opt.k, opt.r, variant_from_string(opt.variant), 0};
  params.validate();
  const OneMaxInstance inst = OneMaxInstance::classic(opt.n);
  const RngStream master(opt.seed);
  const auto samples = probe_drift(params, inst, opt.d0, opt.reps, master);
  if (!opt.output.empty()) write_text(opt.output, emit_drift_csv(samples));
  std::cout << report_drift(samples).dump(2) << '\n';
  return 0;
}

struct OracleOptions {
  std::size_t maxN = 8;
  bool crossValidate = false;
};

int cmd_oracle(const OracleOptions& opt) {
  bool allPass = true;
  RngStream xrng(0x0aac1e);
  auto check = [&](bool pass, const std::string& label, double value) {
    std::printf("%s %s (%.3e)\n", pass ? "PASS" : "FAIL", label.c_str(), value);
    if (!pass) allPass = false;
  };

  for (std::size_t n = 2; n <= opt.maxN; n += 2) {
    const double nd = static_cast<double>(n);
    for (double k : {1.0, nd / 2.0, nd}) {
      for (double r : {0.5, 1.0, std::min(2.0, k)}) {
        if (r > k) continue;
        double worst = 0.0;
        for (int xi = 0; xi < 3; ++xi) {
          const BitString x = BitString::random(n, xrng);
          const auto composed = exact_composed_offspring_law(x, k, r);
          const auto reference = exact_standard_mutation_law(x, r / nd);
          worst = std::max(worst, tvd(composed, reference));
          if (opt.crossValidate)
            worst = std::max(worst, tvd(composed, exact_composed_offspring_law_enumerated(x, k, r)));
        }
        char label[128];
        std::snprintf(label, sizeof label, "composed-law n=%zu k=%g r=%g tvd", n, k, r);
        check(worst < 1e-12, label, worst);
      }
    }
  }

  {
    const Pmf law = exact_goodbits_law(20, 5, 8);
    const double meanErr = std::abs(law.mean() - 2.0);
    check(meanErr < 1e-9, "good-bit law mean (n=20,ell=5,d=8)", meanErr);
    const Pmf everything = exact_goodbits_law(10, 10, 4);
    check(std::abs(everything.at(4) - 1.0) < 1e-12, "good-bit law point mass (ell=n)",
          std::abs(everything.at(4) - 1.0));
  }

  return allPass ? 0 : 1;
}

struct PredictOptions {
  std::size_t n = 0;
  std::uint64_t lambdaMax = 0;
  bool scan = false;
  unsigned threads = 0;
};

int cmd_predict(const PredictOptions& opt) {
  const double n = static_cast<double>(opt.n);
  const double ls = lambda_star(n);
  std::printf("n           %zu\n", opt.n);
  std::printf("lambda_star %.6f\n", ls);
  std::printf("f_star      %.6f\n", f_star(n));
  const std::uint64_t lmax =
      opt.lambdaMax != 0 ? opt.lambdaMax
                         : std::max<std::uint64_t>(16, static_cast<std::uint64_t>(8.0 * ls));
  std::printf("\nlambda  two_term_runtime\n");
  for (std::uint64_t lam = 1; lam <= lmax; lam *= 2)
    std::printf("%6llu  %.1f\n", static_cast<unsigned long long>(lam),
                two_term_runtime(n, static_cast<double>(lam)));
  if (opt.scan) {
    const unsigned threads = opt.threads != 0 ? opt.threads : default_parallelism();
    const TwoTermScan s = scan_two_term_argmin(n, opt.n, threads);
    std::printf("\nargmin over [1..n]: lambda=%llu value=%.1f (lambda_star %.3f)\n",
                static_cast<unsigned long long>(s.argminLambda), s.minValue, ls);
  }
  return 0;
}

struct ReportOptions {
  std::string mode;
  std::vector<std::string> files;
  std::string jsonOut;
};

void print_stats_line(const char* label, const nlohmann::json& s) {
  std::printf("%-10s count=%zu mean=%.2f median=%.2f se=%.2f ci=[%.2f, %.2f]\n", label,
              s["count"].get<std::size_t>(), s["mean"].get<double>(), s["median"].get<double>(),
              s["se"].get<double>(), s["ci_low"].get<double>(), s["ci_high"].get<double>());
}

int cmd_report(const ReportOptions& opt) {
  nlohmann::json j;
  if (opt.mode == "scaling") {
    if (opt.files.size() != 1) throw ConfigError("scaling mode expects one results file");
    j = report_scaling(parse_csv(read_text(opt.files[0])));
    std::printf("%8s %14s %14s %8s\n", "n", "mean_F", "f_star", "ratio");
    for (const auto& e : j["per_size"])
      std::printf("%8zu %14.1f %14.1f %8.3f\n", e["n"].get<std::size_t>(),
                  e["mean"].get<double>(), e["f_star"].get<double>(), e["ratio"].get<double>());
    std::printf("ratio spread (max/min): %.3f\n", j["ratio_spread"].get<double>());
  } else if (opt.mode == "u-shape") {
    if (opt.files.size() != 1) throw ConfigError("u-shape mode expects one results file");
    j = report_u_shape(parse_csv(read_text(opt.files[0])));
    std::printf("%8s %14s %10s\n", "lambda", "mean_F", "se");
    for (const auto& e : j["cells"])
      std::printf("%8d %14.1f %10.1f\n", e["lambda"].get<int>(), e["mean"].get<double>(),
                  e["se"].get<double>());
    std::printf("argmin lambda=%.0f min=%.1f first_ratio=%.2f last_ratio=%.2f lambda_star=%.2f\n",
                j["argmin_lambda"].get<double>(), j["min_mean"].get<double>(),
                j["first_ratio"].get<double>(), j["last_ratio"].get<double>(),
                j["lambda_star"].get<double>());
  } else if (opt.mode == "unbiasedness") {
    if (opt.files.size() != 2) throw ConfigError("unbiasedness mode expects two results files");
    j = report_unbiasedness(parse_csv(read_text(opt.files[0])), parse_csv(read_text(opt.files[1])));
    print_stats_line("first", j["first"]);
    print_stats_line("second", j["second"]);
    std::printf("95%% CIs overlap: %s\n", j["ci_overlap"].get<bool>() ? "yes" : "no");
  } else if (opt.mode == "drift") {
    if (opt.files.size() != 1) throw ConfigError("drift mode expects one drift file");
    j = report_drift(parse_drift_csv(read_text(opt.files[0])));
    print_stats_line("gain", j["gain"]);
    std::printf("mean ell=%.3f max gain=%d cap violations=%zu\n", j["mean_ell"].get<double>(),
                j["max_gain"].get<int>(), j["cap_violations"].get<std::size_t>());
  } else {
    throw ConfigError("unknown report mode: " + opt.mode);
  }
  if (!opt.jsonOut.empty()) write_text(opt.jsonOut, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-plus-(lambda,lambda) GA lab: runs, sweeps, drift probes, exact-law oracles"};
  app.require_subcommand(1);

  RunOptions runOpt;
  auto* runCmd = app.add_subcommand("run", "run one parameter cell");
  runCmd->add_option("--n", runOpt.n, "problem size")->required();
  runCmd->add_option("--lambda", runOpt.lambda, "offspring per phase (default: suggested)");
  runCmd->add_option("--k", runOpt.k, "mutation step size (default: lambda)");
  runCmd->add_option("--r", runOpt.r, "crossover strength")->capture_default_str();
  runCmd->add_option("--variant", runOpt.variant, "standard|all-compete")->capture_default_str();
  runCmd->add_option("--budget", runOpt.budget, "evaluation budget (0 = auto)");
  runCmd->add_option("--seed", runOpt.seed, "master seed")->required();
  runCmd->add_option("--reps", runOpt.reps, "repetitions")->capture_default_str();
  runCmd->add_option("--target", runOpt.target, "ones|zeros|random")->capture_default_str();
  runCmd->add_option("--output", runOpt.output, "output CSV path (default: stdout)");

  SweepOptions sweepOpt;
  auto* sweepCmd = app.add_subcommand("sweep", "run a full sweep specification");
  sweepCmd->add_option("--config", sweepOpt.config, "spec file (key = value)");
  sweepCmd->add_option("--sizes", sweepOpt.sizes, "override sizes, comma list");
  sweepCmd->add_option("--lambda", sweepOpt.lambdas, "override lambda grid");
  sweepCmd->add_option("--k", sweepOpt.ks, "override k grid");
  sweepCmd->add_option("--r", sweepOpt.rs, "override r grid");
  sweepCmd->add_option("--variant", sweepOpt.variant, "override variant");
  sweepCmd->add_option("--reps", sweepOpt.reps, "override repetitions");
  sweepCmd->add_option("--seed", sweepOpt.seed, "master seed (required here or in the file)");
  sweepCmd->add_option("--budget", sweepOpt.budget, "override budget");
  sweepCmd->add_option("--target", sweepOpt.target, "override target rule");
  sweepCmd->add_option("--output", sweepOpt.output, "results CSV path (default: stdout)");
  sweepCmd->add_option("--parallelism", sweepOpt.parallelism,
                       "worker count (default: OLLGA_PARALLELISM or hardware)");
  sweepCmd->add_flag("--timing", sweepOpt.timing,
                     "record wall-clock per run (breaks byte-identical output)");

  DriftOptions driftOpt;
  auto* driftCmd = app.add_subcommand("drift", "one-iteration drift probes");
  driftCmd->add_option("--n", driftOpt.n, "problem size")->required();
  driftCmd->add_option("--lambda", driftOpt.lambda, "offspring per phase")->required();
  driftCmd->add_option("--k", driftOpt.k, "mutation step size")->required();
  driftCmd->add_option("--r", driftOpt.r, "crossover strength")->capture_default_str();
  driftCmd->add_option("--variant", driftOpt.variant, "standard|all-compete")->capture_default_str();
  driftCmd->add_option("--d0", driftOpt.d0, "starting fitness distance")->required();
  driftCmd->add_option("--reps", driftOpt.reps, "probe count")->capture_default_str();
  driftCmd->add_option("--seed", driftOpt.seed, "master seed")->required();
  driftCmd->add_option("--output", driftOpt.output, "drift CSV path");

  OracleOptions oracleOpt;
  auto* oracleCmd = app.add_subcommand("oracle", "exact-law identity checks (exit 1 on failure)");
  oracleCmd->add_option("--max-n", oracleOpt.maxN, "largest length in the grid")->capture_default_str();
  oracleCmd->add_flag("--cross-validate", oracleOpt.crossValidate,
                      "also compare against full enumeration");

  PredictOptions predictOpt;
  auto* predictCmd = app.add_subcommand("predict", "closed-form predictors");
  predictCmd->add_option("--n", predictOpt.n, "problem size")->required();
  predictCmd->add_option("--lambda-max", predictOpt.lambdaMax, "largest lambda in the curve");
  predictCmd->add_flag("--scan", predictOpt.scan, "brute-force integer argmin over [1..n]");
  predictCmd->add_option("--threads", predictOpt.threads, "scan worker count");

  ReportOptions reportOpt;
  auto* reportCmd = app.add_subcommand("report", "aggregate results");
  reportCmd->add_option("--mode", reportOpt.mode, "scaling|u-shape|unbiasedness|drift")->required();
  reportCmd->add_option("files", reportOpt.files, "input files")->required();
  reportCmd->add_option("--json", reportOpt.jsonOut, "also write the JSON document here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (runCmd->parsed()) return cmd_run(runOpt);
    if (sweepCmd->parsed()) return cmd_sweep(sweepOpt);
    if (driftCmd->parsed()) return cmd_drift(driftOpt);
    if (oracleCmd->parsed()) return cmd_oracle(oracleOpt);
    if (predictCmd->parsed()) return cmd_predict(predictOpt);
    if (reportCmd->parsed()) return cmd_report(reportOpt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
