#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace iasolve {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base for all failures raised by the library.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Inconsistent dimensions or invalid problem data, detected at construction.
struct InvalidProblem : SolverError {
  using SolverError::SolverError;
};

// An operation was requested that the given function/problem does not support
// (missing gradient callback, prox on a non-prox-capable component, ...).
struct UnsupportedOperation : SolverError {
  using SolverError::SolverError;
};

// Iterates blew past the divergence threshold.  The driver that catches this
// still has the partial trace; the CLI maps it to exit code 2.
struct Diverged : SolverError {
  using SolverError::SolverError;
};

// Stepsize tuning walked below its floor without finding a stable stepsize.
struct TuningFailure : SolverError {
  using SolverError::SolverError;
};

// Inner minimization (prox subproblem, block subproblem, multiplier inner
// Newton) failed to reach its required residual.
struct InnerSolveFailure : SolverError {
  using SolverError::SolverError;
};

// A dual function value is -infinity in a required direction.  Carries a ray
// along which the Lagrangian is unbounded below.
struct UnboundedDual : SolverError {
  UnboundedDual(const std::string& what, Vector ray)
      : SolverError(what), certificate(std::move(ray)) {}
  Vector certificate;
};

// The closed-form optimality oracle is not available for this instance
// (singular saddle system, unsupported structure).
struct OracleUnavailable : SolverError {
  using SolverError::SolverError;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidProblem(msg);
}

}  // namespace iasolve
