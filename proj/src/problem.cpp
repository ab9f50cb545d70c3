#include "iasolve/problem.hpp"

#include <Eigen/Eigenvalues>

namespace iasolve {

double SumProblem::lipschitz_sum() const {
  double L = 0.0;
  for (const auto& f : components) L += f.lipschitz();
  return L;
}

std::optional<double> SumProblem::condition() const {
  if (!sigma || *sigma <= 0.0) return std::nullopt;
  return lipschitz_sum() / *sigma;
}

double SumProblem::evaluate(const Vector& x) const {
  double v = 0.0;
  for (const auto& f : components) v += f.evaluate(x);
  return v;
}

Vector SumProblem::gradient(const Vector& x) const {
  Vector g = Vector::Zero(dim());
  for (const auto& f : components) g += f.gradient(x);
  return g;
}

Vector SumProblem::subgradient(const Vector& x) const {
  Vector g = Vector::Zero(dim());
  for (const auto& f : components) g += f.subgradient(x);
  return g;
}

void SumProblem::validate() const {
  require(!components.empty(), "sum problem: at least one component required");
  int n = components[0].dim();
  for (const auto& f : components)
    require(f.dim() == n, "sum problem: all components must share one dimension");
  if (constraint.kind == ConstraintKind::Box)
    require(constraint.lo.size() == n, "sum problem: box bounds dimension mismatch");
  if (known_opt) require(known_opt->size() == n, "sum problem: known_opt dimension mismatch");
  if (sigma) {
    require(*sigma >= 0.0, "sum problem: sigma must be nonnegative");
    // When everything is quadratic the claimed modulus must not exceed the
    // true smallest curvature of the sum.
    bool all_quadratic = true;
    for (const auto& f : components) all_quadratic &= f.is_quadratic();
    if (all_quadratic && *sigma > 0.0) {
      Matrix S = Matrix::Zero(n, n);
      for (const auto& f : components) S += f.Q();
      Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
      require(*sigma <= es.eigenvalues().minCoeff() + 1e-8,
              "sum problem: sigma exceeds the smallest eigenvalue of sum Q_i");
    }
  }
}

Vector SeparableProblem::b_total() const {
  Vector b = Vector::Zero(r());
  for (const auto& blk : blocks) b += blk.b;
  return b;
}

Vector SeparableProblem::residual(const std::vector<Vector>& y) const {
  require(int(y.size()) == m(), "residual: block count mismatch");
  Vector res = Vector::Zero(r());
  for (int i = 0; i < m(); ++i) res += blocks[i].A * y[i] - blocks[i].b;
  return res;
}

double SeparableProblem::objective(const std::vector<Vector>& y) const {
  double v = 0.0;
  for (int i = 0; i < m(); ++i) v += blocks[i].h.evaluate(y[i]);
  return v;
}

std::optional<double> SeparableProblem::dual_strong_concavity() const {
  int rr = r();
  Matrix H = Matrix::Zero(rr, rr);
  for (const auto& blk : blocks) {
    if (!blk.h.is_quadratic() || !blk.Y.is_free()) return std::nullopt;
    Eigen::LDLT<Matrix> ldlt(blk.h.Q());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<Matrix> es(blk.h.Q(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-12) return std::nullopt;
    H += blk.A * ldlt.solve(blk.A.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (lo <= 0.0) return std::nullopt;
  return lo;
}

void SeparableProblem::validate() const {
  require(!blocks.empty(), "separable problem: at least one block required");
  int rr = int(blocks[0].A.rows());
  require(rr > 0, "separable problem: coupling dimension must be positive");
  for (const auto& blk : blocks) {
    require(int(blk.A.rows()) == rr, "separable problem: all A_i must share row count");
    require(int(blk.A.cols()) == blk.h.dim(), "separable problem: A_i and h_i dimension mismatch");
    require(blk.b.size() == rr, "separable problem: b_i dimension mismatch");
  }
}

}  // namespace iasolve
