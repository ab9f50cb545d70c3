#pragma once

#include <string>
#include <vector>

#include "iasolve/quadratic_model.hpp"

namespace iasolve {

struct CheckResult {
  std::string name;
  bool pass = false;
  double metric = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> results;
  bool all_pass() const;
};

struct CheckOptions {
  // Inner first-order residual used by prox/block subproblems.  The default
  // matches production; loosening it is the fault-injection path and must
  // make the constrained equivalence check fail.
  double prox_tol = 1e-10;
  std::string out_dir;  // when nonempty, deterministic artifacts are written here
};

// Cross-module equivalence and invariant suite on built-in instances.
CheckReport run_check_suite(const CheckOptions& options = {});

void write_check_artifacts(const CheckReport& report, const CheckOptions& options);

}  // namespace iasolve
