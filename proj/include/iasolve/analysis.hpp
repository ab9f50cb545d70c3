#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iasolve/dual.hpp"
#include "iasolve/primal.hpp"
#include "iasolve/problem.hpp"
#include "iasolve/trace.hpp"

namespace iasolve {

// Geometric-rate fit of a positive error sequence: least squares on
// ln(err_k) over k in [burn_in, end), truncated at the first nonpositive
// entry.  rho_hat = exp(slope), gamma_hat = exp(intercept).
struct RateFit {
  double rho_hat = kNaN;
  double gamma_hat = kNaN;
  double r2 = kNaN;
  int burn_in = 0;
  int window = 0;      // points actually fitted
  double max_ratio = kNaN;  // max err_{k+1}/err_k over the window
};

RateFit fit_rate(const std::vector<double>& errors, int burn_in);
RateFit fit_rate(const Trace& trace, int burn_in);

// Recursion beta_{k+1} = p beta_k + q max_{max(0,k-d)<=l<=k} beta_l checked
// against the envelope rho^k beta_0 with rho = (p+q)^{1/(1+d)}.
struct Lemma31Result {
  double rho = kNaN;
  double min_margin = kNaN;  // min_k (rho^k beta_0 - beta_k)
  bool holds = false;
};

Lemma31Result lemma31_bound_check(double p, double q, int d, double beta0, int horizon);

// Per-iteration gradient error e_k of an aggregated run, reconstructed two
// ways: from the iterate identity (x_k - x_{k+1})/alpha - grad F(x_k) and
// from the recorded delayed aggregates.  Requires a trace recorded with
// iterates and aggregates on a free-constraint problem.
struct ErrorDecomposition {
  std::vector<double> e_norms;
  std::vector<double> window_max;   // max_{k-2b<=l<=k} ||x_l - x*||
  double max_route_deviation = 0.0; // identity route vs direct route
  double C_fit = 0.0;               // max_k ||e_k|| / (alpha_k * window_max_k)
  std::vector<double> C_by_third;   // max of the ratio over thirds of the run
};

ErrorDecomposition error_audit(const Trace& trace, const SumProblem& p, int b,
                               const Vector& x_star);

// Closed-form optimality oracle.
struct KktSolution {
  std::vector<Vector> y;
  Vector lambda;
  Vector x;           // sum problems
  double residual = 0.0;
};

// Equality-coupled, all-quadratic, free-block separable instances: solves the
// saddle system [blkdiag(Q_i), A'; A, 0].
KktSolution kkt_oracle(const SeparableProblem& p);
// Free quadratic sum problems: (sum Q_i) x = -sum c_i.
KktSolution kkt_oracle(const SumProblem& p);

// Lockstep comparisons between algorithm routes.  Each returns the maximum
// iterate deviation over the horizon.
double iap_route_deviation(const SumProblem& p, const DelaySchedule& schedule,
                           double alpha, int steps, const Vector& x0,
                           const InnerSolveSettings& inner = {});
double admm_route_deviation(const SeparableProblem& p, double alpha, int steps,
                            const InnerSolveSettings& inner = {});

}  // namespace iasolve
