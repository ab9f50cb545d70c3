#pragma once

#include <functional>
#include <optional>

#include "iasolve/types.hpp"

namespace iasolve {

enum class ComponentKind { Quadratic, Callback };

// One additive component f_i of the objective.  Quadratic components carry
// (1/2)x'Qx + c'x + d with Q symmetric PSD; callback components carry value
// and optional gradient/subgradient callables.  lipschitz is the gradient
// Lipschitz constant L_i used by stepsize rules.
class ComponentFunction {
 public:
  // Default state is an empty placeholder; build real components through the
  // factories below.
  ComponentFunction() = default;

  using ValueFn = std::function<double(const Vector&)>;
  using VectorFn = std::function<Vector(const Vector&)>;

  static ComponentFunction quadratic(Matrix Q, Vector c, double d = 0.0);
  // L estimated by power iteration on a finite-difference Hessian at the
  // origin unless lipschitz_override is given.
  static ComponentFunction callback(int dim, ValueFn value, VectorFn gradient,
                                    std::optional<double> lipschitz_override = {});
  // Nonsmooth component: subgradient only, no gradient, L meaningless (0).
  static ComponentFunction nonsmooth(int dim, ValueFn value, VectorFn subgradient);

  int dim() const { return dim_; }
  ComponentKind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  bool has_gradient() const { return kind_ == ComponentKind::Quadratic || bool(gradient_); }
  bool prox_available() const;

  double evaluate(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  // Falls back to the gradient for smooth components.
  Vector subgradient(const Vector& x) const;

  bool is_quadratic() const { return kind_ == ComponentKind::Quadratic; }
  const Matrix& Q() const { return Q_; }
  const Vector& c() const { return c_; }
  double d() const { return d_; }

 private:
  ComponentKind kind_ = ComponentKind::Quadratic;
  int dim_ = 0;
  double lipschitz_ = 0.0;
  Matrix Q_;
  Vector c_;
  double d_ = 0.0;
  ValueFn value_;
  VectorFn gradient_;
  VectorFn subgradient_;
};

}  // namespace iasolve
