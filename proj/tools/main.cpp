#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iasolve/checks.hpp"
#include "iasolve/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitTuningFailure = 3;
constexpr int kExitCheckFailure = 4;

std::string resolve_out_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("IASOLVE_OUT_DIR"); env && *env) return env;
  return ".";
}

double wall_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

int status_exit_code(iasolve::RunStatus s) {
  return s == iasolve::RunStatus::Diverged ? kExitDiverged : kExitOk;
}

struct CommonOpts {
  std::string config;
  std::vector<std::string> configs;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  std::optional<double> tol;
};

int cmd_run(const CommonOpts& opts) {
  iasolve::ExperimentConfig cfg = iasolve::load_config(opts.config);
  iasolve::apply_overrides(cfg, opts.seed, opts.max_iter, opts.tol);
  auto t0 = std::chrono::steady_clock::now();
  iasolve::ExperimentResult result = iasolve::run_experiment(cfg);
  double ms = wall_ms(t0);

  const std::string dir = resolve_out_dir(opts.out_dir);
  iasolve::write_experiment_artifacts(result, cfg, dir);

  std::cout << "algorithm=" << result.algorithm_tag
            << " status=" << iasolve::to_string(result.trace.status)
            << " iterations=" << result.trace.iterations
            << " final_err=" << iasolve::format_double(result.trace.final_err())
            << " final_obj=" << iasolve::format_double(result.trace.final_obj());
  if (result.rate)
    std::cout << " rho_hat=" << iasolve::format_double(result.rate->rho_hat);
  if (result.forced_diminishing) std::cout << " forced_diminishing=1";
  std::cout << " wall_ms=" << ms << "\n";
  std::cout << "trace=" << (std::filesystem::path(dir) / cfg.trace_name).string()
            << " summary=" << (std::filesystem::path(dir) / cfg.summary_name).string()
            << "\n";
  return status_exit_code(result.trace.status);
}

int cmd_compare(const CommonOpts& opts) {
  if (opts.configs.size() < 2) {
    std::cerr << "compare: at least two --config files are required\n";
    return kExitUsage;
  }
  std::vector<iasolve::ExperimentConfig> cfgs;
  for (const auto& path : opts.configs) {
    cfgs.push_back(iasolve::load_config(path));
    iasolve::apply_overrides(cfgs.back(), opts.seed, opts.max_iter, opts.tol);
  }
  for (size_t i = 1; i < cfgs.size(); ++i) {
    if (cfgs[i].problem_fingerprint != cfgs[0].problem_fingerprint) {
      std::cerr << "compare: '" << opts.configs[i] << "' and '" << opts.configs[0]
                << "' describe different problems; comparisons need one shared "
                   "instance\n";
      return kExitUsage;
    }
  }

  nlohmann::json rows = nlohmann::json::array();
  std::cout << "config\talgorithm\tstatus\titers_to_tol\trho_hat\tfinal_err\twall_ms\n";
  int exit_code = kExitOk;
  for (size_t i = 0; i < cfgs.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    iasolve::ExperimentResult result = iasolve::run_experiment(cfgs[i]);
    double ms = wall_ms(t0);
    int to_tol = iasolve::iterations_to_tolerance(result, cfgs[i].tol);

    nlohmann::json row;
    row["config"] = opts.configs[i];
    row["algorithm"] = result.algorithm_tag;
    row["status"] = iasolve::to_string(result.trace.status);
    row["iterations"] = result.trace.iterations;
    row["iterations_to_tol"] = to_tol;
    row["final_err"] = iasolve::format_double(result.trace.final_err());
    if (result.rate) row["rho_hat"] = iasolve::format_double(result.rate->rho_hat);
    rows.push_back(row);

    std::cout << opts.configs[i] << "\t" << result.algorithm_tag << "\t"
              << iasolve::to_string(result.trace.status) << "\t" << to_tol << "\t"
              << (result.rate ? iasolve::format_double(result.rate->rho_hat) : "nan")
              << "\t" << iasolve::format_double(result.trace.final_err()) << "\t" << ms
              << "\n";
    exit_code = std::max(exit_code, status_exit_code(result.trace.status));
  }

  const std::string dir = resolve_out_dir(opts.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "comparison.json", std::ios::binary);
  out << rows.dump(2) << "\n";
  return exit_code;
}

int cmd_check(const std::string& out_dir_opt, double prox_tol) {
  iasolve::CheckOptions options;
  options.prox_tol = prox_tol;
  options.out_dir = resolve_out_dir(out_dir_opt);
  iasolve::CheckReport report = iasolve::run_check_suite(options);
  for (const auto& r : report.results)
    std::cout << (r.pass ? "[ok]  " : "[FAIL] ") << r.name << " metric="
              << iasolve::format_double(r.metric) << " (" << r.detail << ")\n";
  std::cout << (report.all_pass() ? "check suite passed" : "check suite FAILED") << " ("
            << report.results.size() << " checks)\n";
  return report.all_pass() ? kExitOk : kExitCheckFailure;
}

int cmd_tune(const CommonOpts& opts) {
  iasolve::ExperimentConfig cfg = iasolve::load_config(opts.config);
  iasolve::apply_overrides(cfg, opts.seed, opts.max_iter, opts.tol);
  if (cfg.family != iasolve::AlgorithmFamily::Primal)
    throw iasolve::ConfigError("tune: only primal algorithm tags are tunable");

  iasolve::PrimalOptions base;
  base.stepsize = cfg.stepsize;
  base.x0 = cfg.x0;
  iasolve::TuneResult tuned = iasolve::tune_constant_stepsize(
      *cfg.sum, iasolve::primal_algorithm_from_tag(cfg.algorithm_tag), cfg.schedule, base);

  std::cout << "alpha=" << iasolve::format_double(tuned.alpha)
            << " probe_rho=" << iasolve::format_double(tuned.probe_rho)
            << " halvings=" << tuned.halvings << "\n";

  const std::string dir = resolve_out_dir(opts.out_dir);
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["alpha"] = iasolve::format_double(tuned.alpha);
  j["probe_rho"] = iasolve::format_double(tuned.probe_rho);
  j["halvings"] = tuned.halvings;
  std::ofstream out(std::filesystem::path(dir) / "tune.json", std::ios::binary);
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Incremental aggregated proximal / augmented Lagrangian solver.\n"
      "Exit codes: 0 ok, 1 usage or config error, 2 diverged, 3 tuning "
      "failure, 4 check-suite failure."};
  app.require_subcommand(1);

  CommonOpts run_opts, compare_opts, tune_opts;
  std::string check_out_dir;
  double check_prox_tol = 1e-10;

  CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", run_opts.config, "Experiment config path")->required();
  run->add_option("--out-dir", run_opts.out_dir,
                  "Artifact directory (default: $IASOLVE_OUT_DIR or .)");
  run->add_option("--seed", run_opts.seed, "Override schedule seeds");
  run->add_option("--max-iter", run_opts.max_iter, "Override stop.max_iterations");
  run->add_option("--tol", run_opts.tol, "Override stop.tol");

  CLI::App* compare =
      app.add_subcommand("compare", "Run several configs on one shared problem");
  compare->add_option("--config", compare_opts.configs, "Config path (repeatable)")
      ->required();
  compare->add_option("--out-dir", compare_opts.out_dir,
                      "Artifact directory (default: $IASOLVE_OUT_DIR or .)");
  compare->add_option("--seed", compare_opts.seed, "Override schedule seeds");
  compare->add_option("--max-iter", compare_opts.max_iter, "Override stop.max_iterations");
  compare->add_option("--tol", compare_opts.tol, "Override stop.tol");

  CLI::App* check = app.add_subcommand("check", "Run the cross-module check suite");
  check->add_option("--out-dir", check_out_dir,
                    "Artifact directory (default: $IASOLVE_OUT_DIR or .)");
  check->add_option("--prox-tol", check_prox_tol,
                    "Inner first-order residual for prox subproblems (fault injection)");

  CLI::App* tune =
      app.add_subcommand("tune", "Find a stable constant stepsize for a primal config");
  tune->add_option("--config", tune_opts.config, "Experiment config path")->required();
  tune->add_option("--out-dir", tune_opts.out_dir,
                   "Artifact directory (default: $IASOLVE_OUT_DIR or .)");
  tune->add_option("--seed", tune_opts.seed, "Override schedule seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (compare->parsed()) return cmd_compare(compare_opts);
    if (check->parsed()) return cmd_check(check_out_dir, check_prox_tol);
    if (tune->parsed()) return cmd_tune(tune_opts);
  } catch (const iasolve::TuningFailure& e) {
    std::cerr << "tuning failure: " << e.what() << "\n";
    return kExitTuningFailure;
  } catch (const iasolve::Diverged& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const iasolve::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const iasolve::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
