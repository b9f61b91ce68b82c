#pragma once

// Command implementations behind the `hcg` executable. Each command takes its
// inputs explicitly and writes to caller-provided streams so it can be driven
// from tests without a process boundary.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcg/benchsuite.hpp"
#include "hcg/mlapp.hpp"
#include "hcg/profiles.hpp"
#include "hcg/solver.hpp"

namespace hcg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kToolName = "hcg";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitMaxIter = 2, kExitLineSearch = 3, kExitNonFinite = 4 };

// checkgrad has no solve status; any tolerance violation exits with this.
inline constexpr int kExitCheckFailed = 2;

inline int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::GradientConverged: return kExitOk;
    case SolveStatus::MaxIterations: return kExitMaxIter;
    case SolveStatus::LineSearchFailed: return kExitLineSearch;
    case SolveStatus::NonFinite: return kExitNonFinite;
  }
  return kExitUsage;
}

class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// --- configuration ------------------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw UsageError("bad value for " + key + ": '" + v + "'");
  return out;
}

inline long parse_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("bad value for " + key + ": '" + v + "'");
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const long l = parse_long(key, v);
  if (l < std::numeric_limits<int>::min() || l > std::numeric_limits<int>::max())
    throw UsageError("value out of range for " + key);
  return static_cast<int>(l);
}

/// Non-finite doubles become null so the JSON stays valid.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

inline Method parse_method_or_throw(const std::string& s) {
  const auto m = parse_method(s);
  if (!m) throw UsageError("unknown method '" + s + "'");
  return *m;
}

/// Keys mirror the SolverConfig field names; hybrid and line-search fields
/// are addressed by their short names.
inline void apply_config_value(SolverConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "method") c.method = parse_method_or_throw(value);
  else if (key == "epsilon") c.epsilon = parse_double(key, value);
  else if (key == "max_iter") c.max_iter = parse_int(key, value);
  else if (key == "nu") c.nu = parse_double(key, value);
  else if (key == "tau") c.hybrid.tau = parse_double(key, value);
  else if (key == "u") c.hybrid.u = parse_double(key, value);
  else if (key == "t") c.hybrid.t = parse_double(key, value);
  else if (key == "theta") c.hybrid.theta_override = parse_double(key, value);
  else if (key == "delta") c.ls.delta = parse_double(key, value);
  else if (key == "sigma") c.ls.sigma = parse_double(key, value);
  else if (key == "max_evals") c.ls.max_evals = parse_int(key, value);
  else if (key == "alpha_max") c.ls.alpha_max = parse_double(key, value);
  else throw UsageError("unknown config key '" + key + "'");
}

inline std::pair<std::string, std::string> split_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
  return {detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1))};
}

/// Flat key=value file; '#' starts a comment, blank lines are ignored.
inline std::vector<std::pair<std::string, std::string>> read_config_file(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    out.push_back(split_assignment(line));
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  return read_config_file(in);
}

inline json config_to_json(const SolverConfig& c) {
  json j{{"method", to_string(c.method)}, {"epsilon", c.epsilon},     {"max_iter", c.max_iter},
         {"nu", c.nu},                    {"tau", c.hybrid.tau},      {"u", c.hybrid.u},
         {"t", c.hybrid.t},               {"delta", c.ls.delta},      {"sigma", c.ls.sigma},
         {"max_evals", c.ls.max_evals},   {"alpha_max", c.ls.alpha_max}};
  j["theta"] = c.hybrid.theta_override ? json(*c.hybrid.theta_override) : json(nullptr);
  return j;
}

inline SolverConfig config_from_json(const json& j) {
  SolverConfig c;
  c.method = parse_method_or_throw(j.at("method").get<std::string>());
  c.epsilon = j.at("epsilon").get<double>();
  c.max_iter = j.at("max_iter").get<int>();
  c.nu = j.at("nu").get<double>();
  c.hybrid.tau = j.at("tau").get<double>();
  c.hybrid.u = j.at("u").get<double>();
  c.hybrid.t = j.at("t").get<double>();
  if (j.contains("theta") && !j.at("theta").is_null()) c.hybrid.theta_override = j.at("theta").get<double>();
  c.ls.delta = j.at("delta").get<double>();
  c.ls.sigma = j.at("sigma").get<double>();
  c.ls.max_evals = j.at("max_evals").get<int>();
  c.ls.alpha_max = j.at("alpha_max").get<double>();
  return c;
}

/// Worker cap: HCG_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HCG_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return std::min<unsigned>(static_cast<unsigned>(v), hw);
  }
  return hw;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Creates out_dir/run-NNN with the next free number.
inline fs::path next_run_dir(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  int last = 0;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.rfind("run-", 0) != 0) continue;
    int v = 0;
    const auto [p, ec] = std::from_chars(name.data() + 4, name.data() + name.size(), v);
    if (ec == std::errc() && p == name.data() + name.size()) last = std::max(last, v);
  }
  std::ostringstream os;
  os << "run-" << std::setw(3) << std::setfill('0') << last + 1;
  const fs::path dir = out_dir / os.str();
  fs::create_directory(dir);
  return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

// --- solve ----------------------------------------------------------------------

inline json result_to_json(const std::string& problem_id, const SolverConfig& config, const SolveResult& r) {
  return {{"problem", problem_id},
          {"method", to_string(config.method)},
          {"status", to_string(r.status)},
          {"iterations", r.iterations},
          {"f_final", detail::number(r.f_final)},
          {"g_norm_final", detail::number(r.g_norm_final)},
          {"f_evals", r.counters.f_evals},
          {"g_evals", r.counters.g_evals},
          {"max_g_norm", detail::number(r.max_g_norm)},
          {"min_descent_ratio", detail::number(r.min_descent_ratio)},
          {"wall_time_seconds", r.wall_time.count()}};
}

/// Prints the result as JSON on `out`; returns the exit code for its status.
inline int cmd_solve(const Registry& registry, const std::string& function_id, std::size_t n,
                     const SolverConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const ProblemInstance inst = registry.instantiate(function_id, n);
    const SolveResult r = solve(inst.problem, config);
    out << result_to_json(inst.id(), config, r).dump(2) << '\n';
    return exit_code(r.status);
  } catch (const UnknownFunction& e) {
    err << "error: " << e.what() << '\n';
  } catch (const UnsupportedDimension& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

// --- bench ----------------------------------------------------------------------

struct BenchArgs {
  std::vector<Method> methods{Method::AWHM, Method::HRM, Method::NHS};
  std::vector<std::size_t> dims = default_dims();
  SolverConfig base;  // method field is replaced per column
  fs::path out_dir = "hcg-out";
  unsigned threads = 0;  // 0 means thread_cap()
};

struct BenchRun {
  SolveResult result;
  std::string error;  // set when the run threw
};

struct BenchOutput {
  fs::path run_dir;
  RunTable table;
  std::vector<std::string> statuses;  // row-major like table.cells
};

inline json bench_manifest(const Registry& registry, const BenchArgs& args) {
  json methods = json::array();
  for (Method m : args.methods) methods.push_back(to_string(m));
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"timestamp", utc_timestamp()},
          {"command", "bench"},
          {"seed", 0},
          {"config", config_to_json(args.base)},
          {"methods", methods},
          {"dims", args.dims},
          {"suite", registry.manifest(args.dims)}};
}

inline BenchArgs bench_args_from_manifest(const json& m, fs::path out_dir) {
  BenchArgs args;
  args.methods.clear();
  for (const auto& s : m.at("methods")) args.methods.push_back(parse_method_or_throw(s.get<std::string>()));
  args.dims = m.at("dims").get<std::vector<std::size_t>>();
  args.base = config_from_json(m.at("config"));
  args.out_dir = std::move(out_dir);
  return args;
}

inline std::string trace_file_name(const std::string& problem, Method m) {
  return problem + "__" + to_string(m) + ".csv";
}

/// Runs the grid x methods sweep. Individual failures are recorded as
/// unsolved cells; the sweep itself never aborts on them.
inline BenchOutput cmd_bench(const Registry& registry, const BenchArgs& args, std::ostream& log) {
  if (args.methods.empty()) throw UsageError("bench: at least one method is required");
  if (args.dims.empty()) throw UsageError("bench: at least one dimension is required");
  args.base.validate();

  const std::vector<ProblemInstance> grid = registry.full_grid(args.dims);
  std::vector<std::string> problems, solvers;
  for (const auto& inst : grid) problems.push_back(inst.id());
  for (Method m : args.methods) solvers.emplace_back(to_string(m));

  const std::size_t jobs = grid.size() * args.methods.size();
  std::vector<BenchRun> runs(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t j = next++; j < jobs; j = next++) {
      const auto& inst = grid[j / args.methods.size()];
      SolverConfig cfg = args.base;
      cfg.method = args.methods[j % args.methods.size()];
      try {
        runs[j].result = solve_traced(inst.problem, cfg);
      } catch (const std::exception& e) {
        runs[j].error = e.what();
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(args.threads ? args.threads : thread_cap(), jobs));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  BenchOutput out;
  out.run_dir = next_run_dir(args.out_dir);
  fs::create_directory(out.run_dir / "traces");
  out.table = RunTable(problems, solvers);
  out.statuses.resize(jobs);
  for (std::size_t j = 0; j < jobs; ++j) {
    const std::size_t p = j / args.methods.size(), s = j % args.methods.size();
    const BenchRun& run = runs[j];
    RunCell& cell = out.table.at(p, s);
    if (!run.error.empty()) {
      out.statuses[j] = "Error: " + run.error;
      continue;
    }
    const SolveResult& r = run.result;
    cell.solved = r.status == SolveStatus::GradientConverged;
    cell.iterations = r.iterations;
    cell.f_evals = static_cast<long>(r.counters.f_evals);
    cell.g_evals = static_cast<long>(r.counters.g_evals);
    cell.wall_time_ms = r.wall_time.count() * 1e3;
    out.statuses[j] = to_string(r.status);
    std::ofstream trace(out.run_dir / "traces" / trace_file_name(problems[p], args.methods[s]));
    write_trace_csv(trace, r.trace);
  }

  json table = to_json(out.table);
  for (std::size_t j = 0; j < jobs; ++j) table["cells"][j]["status"] = out.statuses[j];
  write_text(out.run_dir / "runtable.json", table.dump(2) + "\n");
  write_text(out.run_dir / "manifest.json", bench_manifest(registry, args).dump(2) + "\n");

  for (std::size_t s = 0; s < solvers.size(); ++s)
    log << solvers[s] << ": solved " << out.table.solved_count(s) << "/" << problems.size() << '\n';
  log << "wrote " << out.run_dir.string() << '\n';
  return out;
}

// --- profile --------------------------------------------------------------------

inline CostMetric parse_metric(const std::string& s) {
  if (s == "iterations" || s == "iter") return CostMetric::Iterations;
  if (s == "fevals" || s == "f_evals") return CostMetric::FEvals;
  if (s == "walltime" || s == "time" || s == "wall_time") return CostMetric::WallTime;
  throw UsageError("unknown metric '" + s + "'");
}

inline ProfileFormat parse_format(const std::string& s) {
  if (s == "csv") return ProfileFormat::CSV;
  if (s == "svg") return ProfileFormat::SVG;
  throw UsageError("unknown format '" + s + "'");
}

inline std::string profile_title(CostMetric m) {
  switch (m) {
    case CostMetric::Iterations: return "Performance profile: number of iterations";
    case CostMetric::FEvals: return "Performance profile: function evaluations";
    case CostMetric::WallTime: return "Performance profile: execution time";
  }
  return "Performance profile";
}

/// Emits the profile document on `out`.
inline int cmd_profile(const fs::path& runtable, CostMetric metric, ProfileFormat format, std::ostream& out,
                       std::ostream& err) {
  try {
    const RunTable table = run_table_from_json(read_json(runtable));
    const auto ratios = performance_ratios(table, metric);
    out << emit(profile_curves(ratios, default_tau_grid()), format, profile_title(metric));
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// --- checkgrad ------------------------------------------------------------------

inline constexpr double kGradientTolerance = 1e-5;

/// `n` when the function supports it, else the nearest supported size above
/// it (2 for fixed-size functions).
inline std::size_t checkgrad_dimension(const Registry& registry, const std::string& id, std::size_t n) {
  for (std::size_t m = n; m < n + 4; ++m)
    if (registry.supports(id, m)) return m;
  if (registry.supports(id, 2)) return 2;
  throw UnsupportedDimension(id, n);
}

/// One line per function: "<instance> max_rel_err=<e> OK|FAIL". Exit 0 when
/// every function is within tolerance.
inline int cmd_checkgrad(const Registry& registry, const std::string& target, std::size_t n, std::ostream& out,
                         std::ostream& err) {
  std::vector<std::string> ids;
  if (target == "all") {
    for (const auto& info : registry.list()) ids.push_back(info.id);
  } else {
    if (!registry.contains(target)) {
      err << "error: unknown function '" << target << "'\n";
      return kExitUsage;
    }
    ids.push_back(target);
  }
  bool ok = true;
  std::vector<std::string> failed;
  for (const auto& id : ids) {
    std::size_t dim = 0;
    try {
      dim = checkgrad_dimension(registry, id, n);
    } catch (const UnsupportedDimension& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }
    const ProblemInstance inst = registry.instantiate(id, dim);
    const double e = check_gradient_seeded(inst.problem);
    const bool pass = e <= kGradientTolerance;
    ok = ok && pass;
    if (!pass) failed.push_back(id);
    out << inst.id() << " max_rel_err=" << std::setprecision(3) << std::scientific << e << std::defaultfloat
        << (pass ? " OK" : " FAIL") << '\n';
  }
  if (!ok) {
    err << "gradient check failed for:";
    for (const auto& f : failed) err << ' ' << f;
    err << '\n';
  }
  return ok ? kExitOk : kExitCheckFailed;
}

// --- mlapp ----------------------------------------------------------------------

struct MlappArgs {
  std::uint64_t seed = 7;
  std::size_t sentences = 400;
  SolverConfig config;  // method defaults to awhm
  ner::AdamParams adam;
  double l2 = 1e-4;
  fs::path out_dir = "hcg-out";
};

inline json mlapp_manifest(const MlappArgs& a) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"timestamp", utc_timestamp()},
          {"command", "mlapp"},
          {"seed", a.seed},
          {"sentences", a.sentences},
          {"l2", a.l2},
          {"config", config_to_json(a.config)},
          {"adam",
           {{"steps", a.adam.steps},
            {"lr", a.adam.lr},
            {"beta1", a.adam.beta1},
            {"beta2", a.adam.beta2},
            {"eps", a.adam.eps}}}};
}

struct MlappOutput {
  fs::path run_dir;
  json report;
};

/// Generates the dataset, trains with the configured method and with the
/// adaptive-moment baseline, and writes both metric blocks side by side.
inline MlappOutput cmd_mlapp(const MlappArgs& args, std::ostream& log) {
  args.config.validate();
  const ner::TokenDataset ds = ner::generate_synthetic(args.seed, args.sentences);

  const ner::TrainResult cg = ner::train(ds.train(), args.config, args.l2);
  const ner::NerMetrics cg_metrics = ner::evaluate(cg.model, ds.test());
  const ner::AdamResult adam = ner::baseline_adam(ds.train(), args.adam, args.l2);
  const ner::NerMetrics adam_metrics = ner::evaluate(adam.model, ds.test());

  const std::string label = to_string(args.config.method);
  json cg_block = ner::to_json(cg_metrics, cg.wall_time.count());
  cg_block["final_loss"] = cg.solve.f_final;
  cg_block["iterations"] = cg.solve.iterations;
  cg_block["f_evals"] = cg.solve.counters.f_evals;
  cg_block["status"] = to_string(cg.solve.status);
  json adam_block = ner::to_json(adam_metrics, adam.wall_time.count());
  adam_block["final_loss"] = adam.final_loss;
  adam_block["steps"] = args.adam.steps;

  MlappOutput out;
  out.report = {{"seed", args.seed},
                {"train_sentences", ds.train().size()},
                {"test_sentences", ds.test().size()},
                {"method", label},
                {label, cg_block},
                {"adam_baseline", adam_block}};

  out.run_dir = next_run_dir(args.out_dir);
  write_text(out.run_dir / "metrics.json", out.report.dump(2) + "\n");
  write_text(out.run_dir / ("metrics_" + label + ".json"), cg_block.dump(2) + "\n");
  write_text(out.run_dir / "metrics_adam_baseline.json", adam_block.dump(2) + "\n");
  write_text(out.run_dir / "manifest.json", mlapp_manifest(args).dump(2) + "\n");
  {
    std::ofstream train(out.run_dir / "train.tsv"), test(out.run_dir / "test.tsv");
    ner::write_tsv(train, ds.train());
    ner::write_tsv(test, ds.test());
  }
  {
    std::ofstream trace(out.run_dir / ("trace_" + label + ".csv"));
    write_trace_csv(trace, cg.solve.trace);
  }
  log << label << " macro_f1=" << cg_metrics.macro_f1 << "  adam_baseline macro_f1=" << adam_metrics.macro_f1
      << '\n';
  log << "wrote " << out.run_dir.string() << '\n';
  return out;
}

}  // namespace hcg::cli
