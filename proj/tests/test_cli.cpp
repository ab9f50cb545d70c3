#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBin = IASOLVE_BIN;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "iasolve_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd =
      "\"" + kBin + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

const char* kIapConfig = R"({
  "algorithm": "iap",
  "problem": {"builtin": "quadratic_mean"},
  "schedule": {"policy": "last_update"},
  "stepsize": {"rule": "constant", "alpha": 0.02},
  "stop": {"max_iterations": 200, "tol": 0}
})";

}  // namespace

TEST_CASE("run writes artifacts and reports the outcome") {
  fs::path dir = fresh_dir("run_ok");
  write_file(dir / "cfg.json", kIapConfig);
  CliResult r = run_cli("run --config \"" + (dir / "cfg.json").string() +
                            "\" --out-dir \"" + (dir / "art").string() + "\"",
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("algorithm=iap") != std::string::npos);
  CHECK(r.out.find("status=max_iterations") != std::string::npos);
  CHECK(r.out.find("rho_hat=") != std::string::npos);

  std::string trace = slurp(dir / "art" / "trace.csv");
  CHECK(count_lines(trace) == 202);  // header + 201 rows (initial + 200 steps)

  json summary = json::parse(slurp(dir / "art" / "summary.json"));
  CHECK(summary.at("algorithm") == "iap");
  CHECK(summary.at("status") == "max_iterations");
  CHECK(summary.at("iterations") == 200);
  CHECK(summary.contains("problem_digest"));
}

TEST_CASE("run honors CLI overrides") {
  fs::path dir = fresh_dir("run_override");
  write_file(dir / "cfg.json", kIapConfig);
  CliResult r = run_cli("run --config \"" + (dir / "cfg.json").string() +
                            "\" --out-dir \"" + (dir / "art").string() +
                            "\" --max-iter 50",
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(count_lines(slurp(dir / "art" / "trace.csv")) == 52);

  CliResult bad = run_cli("run --config \"" + (dir / "cfg.json").string() +
                              "\" --max-iter -2",
                          dir);
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("--max-iter") != std::string::npos);
}

TEST_CASE("run rejects broken configs with the field named") {
  fs::path dir = fresh_dir("run_bad");
  write_file(dir / "no_alg.json", R"({"problem": {"builtin": "quadratic_mean"}})");
  CliResult r = run_cli("run --config \"" + (dir / "no_alg.json").string() + "\"", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("config error") != std::string::npos);
  CHECK(r.err.find("algorithm") != std::string::npos);

  CliResult missing =
      run_cli("run --config \"" + (dir / "does_not_exist.json").string() + "\"", dir);
  CHECK(missing.exit_code == 1);

  write_file(dir / "bad_policy.json", R"({
    "algorithm": "iap",
    "problem": {"builtin": "quadratic_mean"},
    "schedule": {"policy": "sometimes"},
    "stepsize": {"alpha": 0.02}
  })");
  CliResult pol =
      run_cli("run --config \"" + (dir / "bad_policy.json").string() + "\"", dir);
  CHECK(pol.exit_code == 1);
  CHECK(pol.err.find("schedule.policy") != std::string::npos);
}

TEST_CASE("run reports divergence through the exit code") {
  fs::path dir = fresh_dir("run_diverged");
  write_file(dir / "cfg.json", R"({
    "algorithm": "iadg",
    "problem": {"builtin": "symmetric_two_block"},
    "stepsize": {"rule": "constant", "alpha": 10.0},
    "stop": {"max_iterations": 5000, "tol": 0}
  })");
  CliResult r = run_cli("run --config \"" + (dir / "cfg.json").string() +
                            "\" --out-dir \"" + (dir / "art").string() + "\"",
                        dir);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("status=diverged") != std::string::npos);
  // The partial trace is still written for post-mortems.
  CHECK(fs::exists(dir / "art" / "trace.csv"));
}

TEST_CASE("compare requires at least two configs on one shared instance") {
  fs::path dir = fresh_dir("compare_guard");
  write_file(dir / "a.json", R"({
    "algorithm": "iap",
    "problem": {"builtin": "quadratic_mean", "seed": 5},
    "stepsize": {"alpha": 0.02}
  })");
  write_file(dir / "b.json", R"({
    "algorithm": "iag",
    "problem": {"builtin": "quadratic_mean", "seed": 6},
    "stepsize": {"alpha": 0.02}
  })");

  CliResult one = run_cli("compare --config \"" + (dir / "a.json").string() + "\"", dir);
  CHECK(one.exit_code == 1);
  CHECK(one.err.find("at least two") != std::string::npos);

  CliResult mism = run_cli("compare --config \"" + (dir / "a.json").string() +
                               "\" --config \"" + (dir / "b.json").string() + "\"",
                           dir);
  CHECK(mism.exit_code == 1);
  CHECK(mism.err.find("different problems") != std::string::npos);
}

TEST_CASE("compare runs several algorithms on one instance") {
  fs::path dir = fresh_dir("compare_ok");
  auto cfg = [](const char* tag) {
    return std::string(R"({"algorithm": ")") + tag + R"(",
      "problem": {"builtin": "quadratic_mean"},
      "schedule": {"policy": "last_update"},
      "stepsize": {"alpha": 0.02},
      "stop": {"max_iterations": 5000, "tol": 1e-6}})";
  };
  write_file(dir / "iap.json", cfg("iap"));
  write_file(dir / "iag.json", cfg("iag"));
  CliResult r = run_cli("compare --config \"" + (dir / "iap.json").string() +
                            "\" --config \"" + (dir / "iag.json").string() +
                            "\" --out-dir \"" + (dir / "art").string() + "\"",
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("config\talgorithm\tstatus") != std::string::npos);

  json rows = json::parse(slurp(dir / "art" / "comparison.json"));
  REQUIRE(rows.is_array());
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.at("status") == "converged");
    CHECK(row.at("iterations_to_tol").get<int>() > 0);
  }
  CHECK(rows[0].at("algorithm") == "iap");
  CHECK(rows[1].at("algorithm") == "iag");
}

TEST_CASE("check suite passes and its artifacts are byte-deterministic") {
  fs::path dir = fresh_dir("check_ok");
  CliResult a = run_cli("check --out-dir \"" + (dir / "a").string() + "\"", dir);
  CHECK(a.exit_code == 0);
  CHECK(a.out.find("check suite passed") != std::string::npos);
  CHECK(a.out.find("[FAIL]") == std::string::npos);

  CliResult b = run_cli("check --out-dir \"" + (dir / "b").string() + "\"", dir);
  CHECK(b.exit_code == 0);

  const char* files[] = {"check_report.json", "rate_trace.csv", "admm_trace.csv",
                         "entropy_trace.csv"};
  for (const char* f : files) {
    INFO("artifact ", f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  json report = json::parse(slurp(dir / "a" / "check_report.json"));
  CHECK(report.at("all_pass") == true);
  CHECK(report.at("checks").size() >= 10);
}

TEST_CASE("fault injection trips the check suite") {
  fs::path dir = fresh_dir("check_fault");
  CliResult r = run_cli("check --prox-tol 1e-3 --out-dir \"" + (dir / "a").string() +
                            "\"",
                        dir);
  CHECK(r.exit_code == 4);
  CHECK(r.out.find("[FAIL]") != std::string::npos);
  CHECK(r.out.find("iap_routes_orthant") != std::string::npos);
  CHECK(r.out.find("check suite FAILED") != std::string::npos);
}

TEST_CASE("tune finds a stable constant stepsize") {
  fs::path dir = fresh_dir("tune_ok");
  write_file(dir / "cfg.json", R"({
    "algorithm": "iag",
    "problem": {"builtin": "quadratic_mean"},
    "schedule": {"policy": "last_update"},
    "stepsize": {"alpha": 0.1}
  })");
  CliResult r = run_cli("tune --config \"" + (dir / "cfg.json").string() +
                            "\" --out-dir \"" + (dir / "art").string() + "\"",
                        dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("alpha=") != std::string::npos);
  CHECK(r.out.find("halvings=") != std::string::npos);

  json tuned = json::parse(slurp(dir / "art" / "tune.json"));
  double alpha = std::stod(tuned.at("alpha").get<std::string>());
  int halvings = tuned.at("halvings").get<int>();
  CHECK(alpha == doctest::Approx(0.1 / double(1 << halvings)).epsilon(1e-12));
  CHECK(std::stod(tuned.at("probe_rho").get<std::string>()) < 1.0);
}

TEST_CASE("tune reports an honest failure on a flat direction") {
  fs::path dir = fresh_dir("tune_fail");
  write_file(dir / "cfg.json", R"({
    "algorithm": "iag",
    "problem": {"builtin": "flat_direction"},
    "x0": [0, 1],
    "stepsize": {"alpha": 0.1}
  })");
  CliResult r = run_cli("tune --config \"" + (dir / "cfg.json").string() + "\"", dir);
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("tuning failure") != std::string::npos);

  write_file(dir / "dual.json", R"({
    "algorithm": "iaal",
    "problem": {"builtin": "symmetric_two_block"},
    "stepsize": {"alpha": 0.5}
  })");
  CliResult dual = run_cli("tune --config \"" + (dir / "dual.json").string() + "\"", dir);
  CHECK(dual.exit_code == 1);
  CHECK(dual.err.find("primal") != std::string::npos);
}
