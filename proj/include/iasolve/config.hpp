#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

#include "iasolve/dual.hpp"
#include "iasolve/nonquadratic.hpp"
#include "iasolve/primal.hpp"
#include "iasolve/problem.hpp"

namespace iasolve {

// Config parsing failure; message names the offending field.
struct ConfigError : SolverError {
  using SolverError::SolverError;
};

enum class AlgorithmFamily { Primal, Dual, Multiplier, Entropy };

// One experiment: a problem, an algorithm tag, a schedule, stepsizes and
// stopping rules, parsed from the JSON schema described in the README.
struct ExperimentConfig {
  std::string algorithm_tag;
  AlgorithmFamily family = AlgorithmFamily::Primal;

  std::optional<SumProblem> sum;
  std::optional<SeparableProblem> separable;

  DelaySchedule schedule;
  StepsizeRule stepsize;             // primal/entropy
  DualStepsizeRule dual_stepsize;    // dual
  MultiplierOptions multiplier;      // multiplier runs
  EntropyOptions entropy;            // entropy runs

  int max_iterations = 10000;
  double tol = 0.0;
  Vector x0;                         // empty means default
  bool record_iterates = false;

  std::string trace_name = "trace.csv";
  std::string summary_name = "summary.json";

  // Canonical serialization of the problem block, used by `compare` to
  // verify all configs share one instance.
  std::string problem_fingerprint;
};

AlgorithmFamily family_of_tag(const std::string& tag);

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Applies CLI-level overrides (seed, max-iter, tol) onto a parsed config.
void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<int> max_iter, std::optional<double> tol);

}  // namespace iasolve
