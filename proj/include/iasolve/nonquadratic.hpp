#pragma once

#include <optional>

#include "iasolve/delay.hpp"
#include "iasolve/penalty.hpp"
#include "iasolve/problem.hpp"
#include "iasolve/trace.hpp"

namespace iasolve {

enum class MultiplierAlgorithm { ExpAl, IAALI };
enum class EntropyAlgorithm { EntropyIAP, EntropyIAG, ProjectedIAG };

// Multiplier iteration state for inequality-coupled separable problems.
// mu stays strictly positive under the exponential penalty; the table holds
// per-block constraint values A_i y^i - b_i at their delayed iterates.
struct MultiplierState {
  Vector mu;
  std::vector<Vector> y;
  GradientTable table;
  int k = 0;
};

struct MultiplierOptions {
  Vector alpha;             // per-constraint stepsizes (broadcast from scalar)
  PenaltySpec penalty = PenaltySpec::exponential();
  int max_iterations = 1000;
  double mu_change_tol = 0.0;  // stop when ||mu_{k+1} - mu_k||_inf <= tol
  Vector mu0;                  // defaults to ones
  int newton_iterations = 200;
  int newton_halvings = 50;
  double newton_grad_tol = 1e-10;
  std::optional<Vector> mu_star;  // for the err column
  bool record_iterates = false;   // multiplier iterates into trace.iterates
};

// m = 1 exponential multiplier step: inner minimize
//   H(y) + sum_j (mu_j/alpha_j) psi(alpha_j G_j(y)),
// then mu_j <- mu_j * dpsi(alpha_j G_j(y_new)).  Returns the new y.
Vector exp_al_step(const SeparableProblem& p, MultiplierState& state,
                   const MultiplierOptions& options);

// Incremental aggregated variant: block i_k is minimized against aggregated
// constraint values with the others taken from the table.
Vector iaali_step(const SeparableProblem& p, MultiplierState& state, int i,
                  const MultiplierOptions& options);

struct MultiplierRunResult {
  Trace trace;
  MultiplierState state;
};

MultiplierRunResult run_multiplier(const SeparableProblem& p, MultiplierAlgorithm algorithm,
                                   const DelaySchedule& schedule,
                                   const MultiplierOptions& options);

// Interior multiplicative iterations on sum problems over the nonnegative
// orthant (ProjectedIAG uses projection instead and may touch the boundary).
struct EntropyState {
  Vector x;
  GradientTable table;
  int k = 0;
  bool clamped = false;  // some exponent hit the overflow clamp
};

struct EntropyOptions {
  double alpha = 0.0;            // scalar stepsize
  std::optional<Vector> per_coordinate;  // overrides alpha when set
  bool use_heuristic = false;    // alpha_j = alpha / max(xbar_j, delta)
  double heuristic_delta = 1e-3;
  int heuristic_refresh = 100;   // xbar <- current iterate every this many iterations
  PenaltySpec penalty = PenaltySpec::exponential();
  int max_iterations = 1000;
  double err_tol = 0.0;
  Vector x0;                     // must be strictly positive for entropy runs
  int newton_halvings = 60;
  double newton_residual_tol = 1e-10;
  bool record_iterates = false;
};

// alpha_j = alpha / max(xbar_j, delta).
Vector heuristic_stepsizes(double alpha, const Vector& xbar, double delta);

// Implicit entropic step for component i: solves
//   (1/alpha_j) ln(x_j/xk_j) + grad_i(x)_j + others_j = 0
// by damped Newton in log coordinates.  With a quadratic penalty spec the
// equations reduce to the plain unconstrained step and x is returned from
// the diagonal-metric prox instead.
Vector entropy_iap_step(const SumProblem& p, const Vector& xk, int i, const Vector& others,
                        const Vector& alpha, const EntropyOptions& options);

// Explicit multiplicative step x_j <- x_j exp(-alpha_j * aggregate_j).
Vector entropy_iag_step(const Vector& xk, const Vector& aggregate, const Vector& alpha,
                        bool* clamped = nullptr);

// Projection variant x <- [x - alpha .* aggregate]^+.
Vector constrained_iag_step(const Vector& xk, const Vector& aggregate, const Vector& alpha);

struct EntropyRunResult {
  Trace trace;
  EntropyState state;
  std::vector<int> j0_estimate;  // coordinates pinned near zero (see below)
};

// j0_estimate: coordinates with x_j < 1e-6 * max_l x_l for at least 50
// consecutive final iterations.
EntropyRunResult run_entropy(const SumProblem& p, EntropyAlgorithm algorithm,
                             const DelaySchedule& schedule, const EntropyOptions& options);

}  // namespace iasolve
