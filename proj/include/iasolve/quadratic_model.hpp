#pragma once

#include "iasolve/constraint.hpp"
#include "iasolve/types.hpp"

namespace iasolve {

// Settings for inner minimizations.  residual_tol is the first-order
// residual ||x - P_X(x - grad)|| required from the projected-gradient path;
// the free path uses a direct solve and checks its linear residual instead.
struct InnerSolveSettings {
  double residual_tol = 1e-10;
  int max_iterations = 10000;
  double free_solve_residual_tol = 1e-12;
};

// Strictly convex quadratic model (1/2)x'Qx + c'x minimized over a
// constraint set.  Free sets use an LDLT solve; constrained sets use
// projected gradient with Armijo backtracking.
struct QuadraticModel {
  Matrix Q;
  Vector c;

  double value(const Vector& x) const { return 0.5 * x.dot(Q * x) + c.dot(x); }
  Vector grad(const Vector& x) const { return Q * x + c; }
};

// ||x - P_X(x - grad)||, the projected-gradient fixed-point residual.
double first_order_residual(const QuadraticModel& model, const ConstraintSet& X,
                            const Vector& x);

Vector minimize_quadratic(const QuadraticModel& model, const ConstraintSet& X,
                          const Vector& start, const InnerSolveSettings& settings = {});

}  // namespace iasolve
