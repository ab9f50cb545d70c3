#include "iasolve/prox.hpp"

namespace iasolve {

namespace {

const Matrix& quadratic_data(const ComponentFunction& f) {
  if (!f.prox_available())
    throw UnsupportedOperation("prox requested on a component without a prox");
  return f.Q();
}

}  // namespace

Vector prox(const ComponentFunction& f, const Vector& z, double alpha,
            const ConstraintSet& X, const InnerSolveSettings& settings) {
  require(alpha > 0.0, "prox: alpha must be positive");
  const Matrix& Q = quadratic_data(f);
  int n = f.dim();
  QuadraticModel model{Q + Matrix::Identity(n, n) / alpha, f.c() - z / alpha};
  return minimize_quadratic(model, X, z, settings);
}

Vector prox_diag(const ComponentFunction& f, const Vector& z, const Vector& alpha,
                 const ConstraintSet& X, const InnerSolveSettings& settings) {
  require(alpha.size() == z.size(), "prox_diag: stepsize dimension mismatch");
  require((alpha.array() > 0.0).all(), "prox_diag: stepsizes must be positive");
  const Matrix& Q = quadratic_data(f);
  Vector dinv = alpha.cwiseInverse();
  QuadraticModel model{Q + Matrix(dinv.asDiagonal()), f.c() - dinv.cwiseProduct(z)};
  return minimize_quadratic(model, X, z, settings);
}

Vector linearized_prox(const ComponentFunction& f, const Vector& x_ref, const Vector& s,
                       double alpha, const ConstraintSet& X,
                       const InnerSolveSettings& settings) {
  require(alpha > 0.0, "linearized_prox: alpha must be positive");
  const Matrix& Q = quadratic_data(f);
  int n = f.dim();
  QuadraticModel model{Q + Matrix::Identity(n, n) / alpha, f.c() + s - x_ref / alpha};
  return minimize_quadratic(model, X, x_ref, settings);
}

}  // namespace iasolve
