#pragma once

#include <optional>

#include "iasolve/delay.hpp"
#include "iasolve/problem.hpp"
#include "iasolve/quadratic_model.hpp"
#include "iasolve/trace.hpp"

namespace iasolve {

enum class DualAlgorithm { IADG, IAL, IAAL, IAALBatchCycle, ADMM, ScaledADMM };

DualAlgorithm dual_algorithm_from_tag(const std::string& tag);
std::string to_tag(DualAlgorithm a);

struct DualStepsizeRule {
  enum class Kind { Constant, Diminishing } kind = Kind::Constant;
  double alpha = 0.0;
  double alpha0 = 0.0;
  static DualStepsizeRule constant(double a) { return {Kind::Constant, a, 0.0}; }
  static DualStepsizeRule diminishing(double a0) { return {Kind::Diminishing, 0.0, a0}; }
  double at(int k) const { return kind == Kind::Constant ? alpha : alpha0 / double(k + 1); }
};

struct DualOptions {
  DualStepsizeRule stepsize;
  int max_iterations = 10000;
  double residual_tol = 0.0;  // stop when ||sum A_i y^i - b|| <= tol
  double divergence_norm = 1e12;
  std::optional<Vector> lambda_star;  // for the err column
  InnerSolveSettings inner;
  bool record_iterates = false;  // multiplier iterates
};

// Multiplier, block iterates and the table of delayed block contributions
// A_i y^i - b_i.
struct DualState {
  Vector lambda;
  std::vector<Vector> y;
  GradientTable table;  // r-dimensional slots
  int k = 0;
};

// ADMM keeps per-block penalty centers instead of a staleness table.
struct AdmmState {
  Vector lambda;
  std::vector<Vector> y;
  std::vector<Vector> z;      // scaled variant: r-dim center per block
  std::vector<int> row_counts;  // m_j, blocks with a nonzero in row j
  int k = 0;
};

struct DualFunctionValue {
  double q = 0.0;       // q_i(lambda)
  Vector minimizer;     // attaining y
  Vector subgradient;   // A_i y - b_i
};

// q_i(lambda) = min over Y_i of h_i(y) + lambda'(A_i y - b_i).  Throws
// UnboundedDual with a certificate ray when the infimum is -infinity.
DualFunctionValue dual_component(const SeparableProblem& p, int i, const Vector& lambda,
                                 const InnerSolveSettings& inner = {});

// Minimize h_i(y) + lambda'A_i y + (weight/2)||A_i y + offset||^2 over Y_i.
Vector block_minimize(const SeparableBlock& block, const Vector& lambda, double weight,
                      const Vector& offset, const Vector& start,
                      const InnerSolveSettings& inner = {});

// Single steps; each mutates state in place.
void iadg_step(const SeparableProblem& p, DualState& state, int i, double alpha,
               const InnerSolveSettings& inner = {});
void ial_step(const SeparableProblem& p, DualState& state, int i, double alpha,
              const InnerSolveSettings& inner = {});
void iaal_step(const SeparableProblem& p, DualState& state, int i, double alpha,
               const InnerSolveSettings& inner = {});
// One Gauss-Seidel pass over all blocks at fixed lambda, then one multiplier
// update with the full fresh residual.
void iaal_batch_cycle(const SeparableProblem& p, DualState& state, double alpha,
                      const InnerSolveSettings& inner = {});
void admm_step(const SeparableProblem& p, AdmmState& state, double alpha,
               const InnerSolveSettings& inner = {});
void scaled_admm_step(const SeparableProblem& p, AdmmState& state, double alpha,
                      const InnerSolveSettings& inner = {});

DualState make_dual_state(const SeparableProblem& p, const InnerSolveSettings& inner = {});
AdmmState make_admm_state(const SeparableProblem& p, const InnerSolveSettings& inner = {});

struct DualRunResult {
  Trace trace;
  DualState state;
  AdmmState admm_state;
  bool forced_diminishing = false;
};

// IAAL constant stepsizes are honored only when the dual is certifiably
// strongly concave; otherwise the diminishing rule is forced and reported.
DualRunResult run_dual(const SeparableProblem& p, DualAlgorithm algorithm,
                       const DelaySchedule& schedule, const DualOptions& options);

// Closed-form concave quadratic dual Q(lambda) = -1/2 lambda'H lambda - g'lambda + const
// for all-quadratic, free-block instances: H = sum A_i Q_i^{-1} A_i',
// g = b + sum A_i Q_i^{-1} c_i.
struct QuadraticDual {
  Matrix H;
  Vector g;
  double value(const Vector& lambda) const {
    return -0.5 * lambda.dot(H * lambda) - g.dot(lambda);
  }
  Vector gradient(const Vector& lambda) const { return -(H * lambda) - g; }
};
QuadraticDual quadratic_dual(const SeparableProblem& p);

struct ProxAlEquivalence {
  double max_multiplier_deviation = 0.0;  // AL multipliers vs explicit dual prox
  double max_identity_deviation = 0.0;    // (lambda_{k+1}-lambda_k)/alpha vs A y - b
};

// m = 1: runs the augmented Lagrangian two-step form against the explicit
// proximal recursion on the closed-form dual.
ProxAlEquivalence prox_al_equivalence_check(const SeparableProblem& p, double alpha,
                                            int steps,
                                            const InnerSolveSettings& inner = {});

}  // namespace iasolve
