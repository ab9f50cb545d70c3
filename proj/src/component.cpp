#include "iasolve/component.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace iasolve {

namespace {

// Largest eigenvalue of the finite-difference Hessian at the origin by power
// iteration.  Central differences of the gradient give Hv products.
double estimate_lipschitz(int dim, const ComponentFunction::VectorFn& grad) {
  const double eps = 1e-5;
  const int iterations = 50;
  Vector v = Vector::Ones(dim).normalized();
  double lambda = 0.0;
  for (int t = 0; t < iterations; ++t) {
    Vector hv = (grad(eps * v) - grad(-eps * v)) / (2.0 * eps);
    double norm = hv.norm();
    if (norm <= 1e-300) return 0.0;  // zero curvature along every probe
    lambda = norm;
    v = hv / norm;
  }
  return lambda;
}

}  // namespace

ComponentFunction ComponentFunction::quadratic(Matrix Q, Vector c, double d) {
  require(Q.rows() == Q.cols(), "quadratic component: Q must be square");
  require(Q.rows() == c.size(), "quadratic component: Q and c dimension mismatch");
  require(Q.isApprox(Q.transpose(), 1e-12), "quadratic component: Q must be symmetric");

  ComponentFunction f;
  f.kind_ = ComponentKind::Quadratic;
  f.dim_ = int(c.size());
  f.Q_ = std::move(Q);
  f.c_ = std::move(c);
  f.d_ = d;

  Eigen::SelfAdjointEigenSolver<Matrix> es(f.Q_, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  require(lo >= -1e-10 * std::max(1.0, std::abs(hi)),
          "quadratic component: Q must be positive semidefinite");
  f.lipschitz_ = std::max(0.0, hi);
  return f;
}

ComponentFunction ComponentFunction::callback(int dim, ValueFn value, VectorFn gradient,
                                              std::optional<double> lipschitz_override) {
  require(dim > 0, "callback component: dimension must be positive");
  require(bool(value), "callback component: value callable required");
  ComponentFunction f;
  f.kind_ = ComponentKind::Callback;
  f.dim_ = dim;
  f.value_ = std::move(value);
  f.gradient_ = std::move(gradient);
  if (lipschitz_override) {
    f.lipschitz_ = *lipschitz_override;
  } else {
    require(bool(f.gradient_),
            "callback component: gradient required to estimate the Lipschitz constant");
    f.lipschitz_ = estimate_lipschitz(dim, f.gradient_);
  }
  return f;
}

ComponentFunction ComponentFunction::nonsmooth(int dim, ValueFn value, VectorFn subgradient) {
  require(dim > 0, "nonsmooth component: dimension must be positive");
  require(bool(value) && bool(subgradient),
          "nonsmooth component: value and subgradient callables required");
  ComponentFunction f;
  f.kind_ = ComponentKind::Callback;
  f.dim_ = dim;
  f.value_ = std::move(value);
  f.subgradient_ = std::move(subgradient);
  f.lipschitz_ = 0.0;
  return f;
}

bool ComponentFunction::prox_available() const {
  return kind_ == ComponentKind::Quadratic;
}

double ComponentFunction::evaluate(const Vector& x) const {
  require(x.size() == dim_, "evaluate: dimension mismatch");
  if (kind_ == ComponentKind::Quadratic) return 0.5 * x.dot(Q_ * x) + c_.dot(x) + d_;
  return value_(x);
}

Vector ComponentFunction::gradient(const Vector& x) const {
  require(x.size() == dim_, "gradient: dimension mismatch");
  if (kind_ == ComponentKind::Quadratic) return Q_ * x + c_;
  if (!gradient_)
    throw UnsupportedOperation("component has no gradient; use subgradient()");
  return gradient_(x);
}

Vector ComponentFunction::subgradient(const Vector& x) const {
  require(x.size() == dim_, "subgradient: dimension mismatch");
  if (kind_ == ComponentKind::Quadratic) return Q_ * x + c_;
  if (subgradient_) return subgradient_(x);
  if (gradient_) return gradient_(x);
  throw UnsupportedOperation("component has neither gradient nor subgradient");
}

}  // namespace iasolve
