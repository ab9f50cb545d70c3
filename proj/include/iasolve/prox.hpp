#pragma once

#include "iasolve/component.hpp"
#include "iasolve/constraint.hpp"
#include "iasolve/quadratic_model.hpp"

namespace iasolve {

// prox_{alpha f}(z) over X: argmin_{x in X} f(x) + (1/2 alpha)||x - z||^2.
Vector prox(const ComponentFunction& f, const Vector& z, double alpha,
            const ConstraintSet& X, const InnerSolveSettings& settings = {});

// Diagonal-metric prox: argmin_{x in X} f(x) + (1/2) sum_j (x_j - z_j)^2 / alpha_j.
Vector prox_diag(const ComponentFunction& f, const Vector& z, const Vector& alpha,
                 const ConstraintSet& X, const InnerSolveSettings& settings = {});

// Direct linearized-prox subproblem:
//   argmin_{x in X} f(x) + s'(x - x_ref) + (1/2 alpha)||x - x_ref||^2.
// Kept as its own code path; equivalence with the shift-then-prox route is
// exercised by the check suite.
Vector linearized_prox(const ComponentFunction& f, const Vector& x_ref, const Vector& s,
                       double alpha, const ConstraintSet& X,
                       const InnerSolveSettings& settings = {});

}  // namespace iasolve
