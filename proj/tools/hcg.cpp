// hcg: conjugate-gradient solver, benchmark sweeps, performance profiles,
// gradient checks and the token-tagging demo.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hcg/cli.hpp"

namespace {

using namespace hcg;
namespace fs = std::filesystem;

// Config file first, then --set/positional key=value overrides in order.
SolverConfig build_config(const std::string& config_file, const std::vector<std::string>& assignments) {
  SolverConfig c;
  if (!config_file.empty())
    for (const auto& [k, v] : cli::read_config_file(fs::path(config_file))) cli::apply_config_value(c, k, v);
  for (const auto& kv : assignments) {
    const auto [k, v] = cli::split_assignment(kv);
    cli::apply_config_value(c, k, v);
  }
  return c;
}

std::vector<std::size_t> parse_dims(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const long v = std::stol(item);
    if (v < 1) throw cli::UsageError("dimensions must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<Method> parse_methods(const std::string& csv) {
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(cli::parse_method_or_throw(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid conjugate-gradient toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  std::string config_file;
  app.add_option("--config", config_file, "key=value solver config file")->check(CLI::ExistingFile);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one benchmark instance, print the result as JSON");
  std::string solve_fn;
  std::size_t solve_n = 10;
  std::string solve_method;
  std::vector<std::string> solve_sets;
  solve_cmd->add_option("function", solve_fn, "function id")->required();
  solve_cmd->add_option("settings", solve_sets, "key=value overrides (n=..., method=..., epsilon=...)");
  solve_cmd->add_option("-n,--n", solve_n, "dimension");
  solve_cmd->add_option("-m,--method", solve_method, "fr|prp|hs|hrm|nhs|awhm|sd");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark grid for several methods");
  std::string bench_methods = "awhm,hrm,nhs";
  std::string bench_dims = "2,10,100,1000";
  std::string bench_out = "hcg-out";
  std::string bench_manifest;
  std::vector<std::string> bench_sets;
  unsigned bench_threads = 0;
  bench_cmd->add_option("--methods", bench_methods, "comma-separated methods")->capture_default_str();
  bench_cmd->add_option("--dims", bench_dims, "comma-separated dimensions")->capture_default_str();
  bench_cmd->add_option("-o,--out", bench_out, "output directory")->capture_default_str();
  bench_cmd->add_option("--manifest", bench_manifest, "re-run the sweep recorded in a manifest.json")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--set", bench_sets, "key=value solver override");
  bench_cmd->add_option("-j,--threads", bench_threads, "worker threads (default: HCG_THREADS or all cores)");

  // profile
  auto* prof_cmd = app.add_subcommand("profile", "Performance profile from a runtable.json");
  std::string prof_table, prof_metric = "iterations", prof_format = "svg", prof_out;
  prof_cmd->add_option("runtable", prof_table, "runtable.json")->required()->check(CLI::ExistingFile);
  prof_cmd->add_option("--metric", prof_metric, "iterations|fevals|walltime")->capture_default_str();
  prof_cmd->add_option("--format", prof_format, "svg|csv")->capture_default_str();
  prof_cmd->add_option("-o,--out", prof_out, "output file (default stdout)");

  // checkgrad
  auto* cg_cmd = app.add_subcommand("checkgrad", "Finite-difference gradient check");
  std::string cg_target = "all";
  std::size_t cg_n = 10;
  cg_cmd->add_option("function", cg_target, "function id or 'all'")->capture_default_str();
  cg_cmd->add_option("-n,--n", cg_n, "dimension")->capture_default_str();

  // mlapp
  auto* ml_cmd = app.add_subcommand("mlapp", "Train the token tagger with a CG method and the Adam baseline");
  cli::MlappArgs ml;
  std::string ml_out = "hcg-out";
  std::vector<std::string> ml_sets;
  ml_cmd->add_option("--seed", ml.seed, "dataset seed")->capture_default_str();
  ml_cmd->add_option("--sentences", ml.sentences, "number of synthetic sentences")->capture_default_str();
  ml_cmd->add_option("--method", solve_method, "CG method (default awhm)");
  ml_cmd->add_option("--l2", ml.l2, "ridge weight")->capture_default_str();
  ml_cmd->add_option("--adam-steps", ml.adam.steps, "baseline steps")->capture_default_str();
  ml_cmd->add_option("--adam-lr", ml.adam.lr, "baseline learning rate")->capture_default_str();
  ml_cmd->add_option("-o,--out", ml_out, "output directory")->capture_default_str();
  ml_cmd->add_option("--set", ml_sets, "key=value solver override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    const Registry& registry = Registry::standard();

    if (*solve_cmd) {
      std::vector<std::string> sets;
      for (const auto& kv : solve_sets) {
        const auto [k, v] = cli::split_assignment(kv);
        if (k == "n") {
          const long n = std::stol(v);
          if (n < 1) throw cli::UsageError("n must be positive");
          solve_n = static_cast<std::size_t>(n);
        } else {
          sets.push_back(kv);
        }
      }
      if (!solve_method.empty()) sets.push_back("method=" + solve_method);
      const SolverConfig c = build_config(config_file, sets);
      return cli::cmd_solve(registry, solve_fn, solve_n, c, std::cout, std::cerr);
    }

    if (*bench_cmd) {
      cli::BenchArgs args;
      if (!bench_manifest.empty()) {
        args = cli::bench_args_from_manifest(cli::read_json(bench_manifest), bench_out);
      } else {
        args.methods = parse_methods(bench_methods);
        args.dims = parse_dims(bench_dims);
        args.base = build_config(config_file, bench_sets);
        args.out_dir = bench_out;
      }
      args.threads = bench_threads;
      cli::cmd_bench(registry, args, std::cout);
      return cli::kExitOk;
    }

    if (*prof_cmd) {
      const auto metric = cli::parse_metric(prof_metric);
      const auto format = cli::parse_format(prof_format);
      if (prof_out.empty()) return cli::cmd_profile(prof_table, metric, format, std::cout, std::cerr);
      std::ofstream out(prof_out);
      if (!out) throw cli::UsageError("cannot write " + prof_out);
      return cli::cmd_profile(prof_table, metric, format, out, std::cerr);
    }

    if (*cg_cmd) return cli::cmd_checkgrad(registry, cg_target, cg_n, std::cout, std::cerr);

    if (*ml_cmd) {
      if (!solve_method.empty()) ml_sets.push_back("method=" + solve_method);
      ml.config = build_config(config_file, ml_sets);
      ml.out_dir = ml_out;
      const auto out = cli::cmd_mlapp(ml, std::cerr);
      std::cout << out.report.dump(2) << '\n';
      return cli::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  }
  return cli::kExitUsage;
}
