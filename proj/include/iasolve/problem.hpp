#pragma once

#include <optional>
#include <vector>

#include "iasolve/component.hpp"
#include "iasolve/constraint.hpp"

namespace iasolve {

// Additive objective F(x) = sum_i f_i(x) minimized over X.
struct SumProblem {
  std::vector<ComponentFunction> components;
  ConstraintSet constraint;
  std::optional<double> sigma;      // strong convexity modulus of F, if known
  std::optional<Vector> known_opt;  // x*, if known

  int m() const { return int(components.size()); }
  int dim() const { return components.empty() ? 0 : components[0].dim(); }
  double lipschitz_sum() const;  // L = sum of L_i
  std::optional<double> condition() const;  // L/sigma

  double evaluate(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Vector subgradient(const Vector& x) const;

  void validate() const;
};

// One block of a separable problem: h_i over Y_i, coupled through A_i y - b_i.
struct SeparableBlock {
  ComponentFunction h;   // quadratic or callback cost on R^{n_i}
  ConstraintSet Y;       // block constraint set
  Matrix A;              // r x n_i
  Vector b;              // r, per-block slice of the right-hand side
};

enum class CouplingKind { Equality, Inequality };

// Separable problem: minimize sum_i h_i(y^i) subject to
// sum_i (A_i y^i - b_i) = 0 (Equality) or <= 0 componentwise (Inequality).
struct SeparableProblem {
  std::vector<SeparableBlock> blocks;
  CouplingKind coupling = CouplingKind::Equality;

  int m() const { return int(blocks.size()); }
  int r() const { return blocks.empty() ? 0 : int(blocks[0].A.rows()); }
  Vector b_total() const;
  // Coupling residual sum_i A_i y^i - b at a block tuple.
  Vector residual(const std::vector<Vector>& y) const;
  double objective(const std::vector<Vector>& y) const;

  // Strong concavity modulus of the dual, when it can be certified: all
  // blocks quadratic with positive definite Q and free Y, modulus is the
  // smallest eigenvalue of sum_i A_i Q_i^{-1} A_i'.  Empty otherwise.
  std::optional<double> dual_strong_concavity() const;

  void validate() const;
};

}  // namespace iasolve
