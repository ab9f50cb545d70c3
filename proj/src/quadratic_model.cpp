#include "iasolve/quadratic_model.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace iasolve {

double first_order_residual(const QuadraticModel& model, const ConstraintSet& X,
                            const Vector& x) {
  return (x - X.project(x - model.grad(x))).norm();
}

namespace {

// Upper bound on the largest eigenvalue (Gershgorin), used as the base
// stepsize for projected gradient.
double curvature_bound(const Matrix& Q) {
  double bound = 0.0;
  for (int i = 0; i < Q.rows(); ++i) bound = std::max(bound, Q.row(i).cwiseAbs().sum());
  return bound;
}

Vector projected_gradient(const QuadraticModel& model, const ConstraintSet& X,
                          const Vector& start, const InnerSolveSettings& settings) {
  Vector x = X.project(start);
  // The 1/L step with L an upper curvature bound satisfies the quadratic
  // descent condition exactly, so no line search is needed; a value-based
  // acceptance test would stagnate near sqrt(machine epsilon) and block the
  // tight residual tolerances used here.
  double L = std::max(curvature_bound(model.Q), 1e-12);
  for (int it = 0; it < settings.max_iterations; ++it) {
    Vector g = model.Q * x + model.c;
    if ((x - X.project(x - g)).norm() <= settings.residual_tol) return x;
    x = X.project(x - (1.0 / L) * g);
  }
  double res = first_order_residual(model, X, x);
  if (res <= settings.residual_tol) return x;
  std::ostringstream msg;
  msg.setf(std::ios::scientific);
  msg << "projected gradient did not reach residual " << settings.residual_tol
      << "; residual " << res << " after " << settings.max_iterations
      << " iterations";
  throw InnerSolveFailure(msg.str());
}

}  // namespace

Vector minimize_quadratic(const QuadraticModel& model, const ConstraintSet& X,
                          const Vector& start, const InnerSolveSettings& settings) {
  if (X.is_free()) {
    Eigen::LDLT<Matrix> ldlt(model.Q);
    if (ldlt.info() != Eigen::Success)
      throw InnerSolveFailure("free quadratic subproblem: factorization failed");
    Vector x = ldlt.solve(-model.c);
    double res = (model.Q * x + model.c).norm();
    double scale = std::max(1.0, model.c.norm());
    if (res > settings.free_solve_residual_tol * scale)
      throw InnerSolveFailure("free quadratic subproblem: solve residual " +
                              std::to_string(res) + " too large");
    return x;
  }
  return projected_gradient(model, X, start, settings);
}

}  // namespace iasolve
