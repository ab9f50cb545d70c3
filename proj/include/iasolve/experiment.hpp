#pragma once

#include <optional>
#include <string>

#include "iasolve/analysis.hpp"
#include "iasolve/config.hpp"
#include "iasolve/trace.hpp"

namespace iasolve {

// One executed experiment, ready for artifact writing.
struct ExperimentResult {
  Trace trace;
  AlgorithmFamily family = AlgorithmFamily::Primal;
  std::string algorithm_tag;
  bool forced_diminishing = false;   // dual runs that lost their constant stepsize
  std::optional<RateFit> rate;       // geometric tail fit, when one is possible
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes <out_dir>/<trace_name> and <out_dir>/<summary_name>; both are
// byte-deterministic for a fixed config.
void write_experiment_artifacts(const ExperimentResult& result, const ExperimentConfig& cfg,
                                const std::string& out_dir);

// First trace row meeting the config's tolerance (err for primal/entropy
// runs, coupling residual for dual runs), or -1.
int iterations_to_tolerance(const ExperimentResult& result, double tol);

}  // namespace iasolve
