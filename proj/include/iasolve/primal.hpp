#pragma once

#include <optional>
#include <variant>

#include "iasolve/delay.hpp"
#include "iasolve/problem.hpp"
#include "iasolve/prox.hpp"
#include "iasolve/trace.hpp"

namespace iasolve {

enum class PrimalAlgorithm { IS, IP, IAS, IAG, IAP, IAPDirect };

PrimalAlgorithm primal_algorithm_from_tag(const std::string& tag);
std::string to_tag(PrimalAlgorithm a);

// Constant: alpha_k = alpha (scalar) or per-coordinate vector (diagonal
// scaling).  Diminishing: alpha_k = alpha0 / (k + 1).
struct StepsizeRule {
  enum class Kind { Constant, ConstantDiagonal, Diminishing } kind = Kind::Constant;
  double alpha = 0.0;
  Vector alpha_vec;
  double alpha0 = 0.0;

  static StepsizeRule constant(double a);
  static StepsizeRule diagonal(Vector a);
  static StepsizeRule diminishing(double a0);

  double at(int k) const;       // scalar value at iteration k
  bool is_diagonal() const { return kind == Kind::ConstantDiagonal; }
};

// IAS slot refresh point: at the pre-step iterate (default) or the post-step one.
enum class IasRefreshPoint { AtCurrent, AtNext };

struct PrimalOptions {
  StepsizeRule stepsize;
  int max_iterations = 20000;
  double err_tol = 0.0;          // stop when ||x_k - x*|| <= err_tol (x* known)
  double divergence_norm = 1e12;
  Vector x0;                     // defaults to zeros
  IasRefreshPoint ias_refresh = IasRefreshPoint::AtCurrent;
  InnerSolveSettings inner;
  bool record_iterates = false;
  bool record_aggregates = false;
};

// Mutable state threaded through the step functions.
struct PrimalState {
  Vector x;
  int k = 0;
  GradientTable table;
  Vector z;          // IAP intermediate point from the last step
  double alpha = 0.0;
};

// Single steps.  Each consumes the aggregate currently in state.table per its
// algorithm's rule and refreshes the processed slot.  `others` is the
// delayed sum over i != i_k already formed by the caller.
Vector is_step(const SumProblem& p, const Vector& x, int i, double alpha,
               const ConstraintSet& X);
Vector ip_step(const SumProblem& p, const Vector& x, int i, double alpha,
               const ConstraintSet& X, const InnerSolveSettings& inner = {});
Vector ias_step(const SumProblem& p, const Vector& x, const Vector& aggregate,
                double alpha, const ConstraintSet& X);
Vector iag_step(const SumProblem& p, const Vector& x, const Vector& aggregate,
                double alpha, const ConstraintSet& X);
// Two-step IAP: z = x - alpha * others, then prox of the processed component.
Vector iap_step(const SumProblem& p, const Vector& x, int i, const Vector& others,
                double alpha, const ConstraintSet& X, Vector* z_out = nullptr,
                const InnerSolveSettings& inner = {});
// Direct IAP route through the linearized-prox subproblem.
Vector iap_direct_step(const SumProblem& p, const Vector& x, int i, const Vector& others,
                       double alpha, const ConstraintSet& X,
                       const InnerSolveSettings& inner = {});

Trace run_primal(const SumProblem& p, PrimalAlgorithm algorithm,
                 const DelaySchedule& schedule, const PrimalOptions& options);

struct TuneResult {
  double alpha = 0.0;
  double probe_rho = kNaN;
  int halvings = 0;
};

// Starts at 1/L and halves until a 500-iteration probe contracts the error
// and shows a geometric tail.  Throws TuningFailure below the floor.
TuneResult tune_constant_stepsize(const SumProblem& p, PrimalAlgorithm algorithm,
                                  const DelaySchedule& schedule,
                                  const PrimalOptions& base_options,
                                  int probe_iterations = 500,
                                  double alpha_floor = 1e-10);

}  // namespace iasolve
