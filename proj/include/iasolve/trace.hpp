#pragma once

#include <limits>
#include <string>
#include <vector>

#include "iasolve/types.hpp"

namespace iasolve {

enum class RunStatus { Converged, MaxIterations, Diverged };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "converged";
    case RunStatus::MaxIterations: return "max_iterations";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One row per iterate.  Row k describes the state x_k together with the
// selection and stepsize used for the step leaving x_k; the final row has
// i = -1 and alpha = 0 since no step leaves it.
struct TraceRow {
  int k = 0;
  int i = -1;
  double alpha = 0.0;
  double err = kNaN;       // ||x_k - x*|| when x* is known
  double obj = kNaN;       // objective value
  int staleness = 0;       // max table staleness entering iteration k
  double residual = kNaN;  // dual runs: ||sum_i A_i y^i - b||
  double mu_min = kNaN;    // multiplier runs: min_j mu^j
  double x_min = kNaN;     // interior-point style runs: min_j x^j
};

struct Trace {
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::MaxIterations;
  int iterations = 0;

  // Optional captures for the analysis module.
  std::vector<Vector> iterates;
  std::vector<Vector> step_aggregates;  // "others" aggregate used at each step
  std::vector<double> step_alphas;
  std::vector<int> step_indices;

  double final_err() const { return rows.empty() ? kNaN : rows.back().err; }
  double final_obj() const { return rows.empty() ? kNaN : rows.back().obj; }
  int max_staleness() const;
};

// Fixed 17-significant-digit formatting shared by every artifact writer so
// repeated runs are byte-identical.
std::string format_double(double v);

void write_primal_csv(const Trace& trace, const std::string& path);
void write_dual_csv(const Trace& trace, const std::string& path);
void write_multiplier_csv(const Trace& trace, const std::string& path);

}  // namespace iasolve
