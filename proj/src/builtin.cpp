#include "iasolve/builtin.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace iasolve::builtin {
namespace {

// Uniform doubles built from raw engine output so sequences do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double unit() { return double(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

Vector random_vector(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int j = 0; j < n; ++j) v[j] = rng.uniform(lo, hi);
  return v;
}

Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rng.uniform(lo, hi);
  return M;
}

SumProblem mean_problem(std::uint64_t seed, bool orthant) {
  constexpr int m = 10, n = 5;
  Rng rng(seed);
  SumProblem p;
  Vector mean = Vector::Zero(n);
  for (int i = 0; i < m; ++i) {
    Vector c = random_vector(rng, n);
    if (orthant) {
      // Push the first two solution coordinates strictly negative so the
      // projected optimum has active constraints.
      c[0] -= 1.2;
      c[1] -= 1.2;
    }
    mean += c;
    p.components.push_back(
        ComponentFunction::quadratic(Matrix::Identity(n, n), -c, 0.5 * c.squaredNorm()));
  }
  mean /= double(m);
  p.constraint = orthant ? ConstraintSet::nonnegative() : ConstraintSet::free();
  p.sigma = double(m);
  p.known_opt = orthant ? Vector(mean.cwiseMax(0.0)) : mean;
  return p;
}

ComponentFunction random_block_cost(Rng& rng, int n) {
  Matrix B = random_matrix(rng, n, n);
  Matrix Q = B.transpose() * B / double(n) + Matrix::Identity(n, n);
  Vector c = random_vector(rng, n);
  return ComponentFunction::quadratic(Q, c);
}

}  // namespace

SumProblem quadratic_mean(std::uint64_t seed) { return mean_problem(seed, false); }

SumProblem quadratic_mean_orthant(std::uint64_t seed) { return mean_problem(seed, true); }

SumProblem random_quadratic(int m, int n, std::uint64_t seed) {
  require(m >= 1 && n >= 1, "random_quadratic: m and n must be positive");
  Rng rng(seed);
  SumProblem p;
  Matrix Qsum = Matrix::Zero(n, n);
  Vector csum = Vector::Zero(n);
  for (int i = 0; i < m; ++i) {
    Matrix B = random_matrix(rng, n, n);
    Matrix Q = B.transpose() * B / double(n) + 0.1 * Matrix::Identity(n, n);
    Vector c = random_vector(rng, n);
    Qsum += Q;
    csum += c;
    p.components.push_back(ComponentFunction::quadratic(Q, c));
  }
  p.constraint = ConstraintSet::free();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Qsum);
  p.sigma = es.eigenvalues().minCoeff();
  p.known_opt = Eigen::LDLT<Matrix>(Qsum).solve(-csum);
  return p;
}

SumProblem random_quadratic_orthant(int m, int n, std::uint64_t seed) {
  require(m >= 1 && n >= 2, "random_quadratic_orthant: m and n out of range");
  Rng rng(seed);
  SumProblem p;
  for (int i = 0; i < m; ++i) {
    Matrix B = random_matrix(rng, n, n);
    Matrix Q = B.transpose() * B / double(n) + 0.5 * Matrix::Identity(n, n);
    Vector c = random_vector(rng, n);
    // Bias the first coordinates upward so the minimizer presses against the
    // orthant boundary there.
    c[0] += 2.0;
    c[1] += 2.0;
    p.components.push_back(ComponentFunction::quadratic(Q, c));
  }
  p.constraint = ConstraintSet::nonnegative();
  return p;
}

SumProblem flat_direction() {
  Matrix Q = Matrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  SumProblem p;
  p.components.push_back(ComponentFunction::quadratic(Q, Vector::Zero(2)));
  p.components.push_back(ComponentFunction::quadratic(Q, Vector::Zero(2)));
  p.constraint = ConstraintSet::free();
  p.sigma = 0.0;
  p.known_opt = Vector::Zero(2);  // one minimizer; the x2 direction is flat
  return p;
}

SeparableProblem symmetric_two_block() {
  SeparableProblem p;
  for (int i = 0; i < 2; ++i) {
    SeparableBlock blk;
    blk.h = ComponentFunction::quadratic(2.0 * Matrix::Identity(1, 1), Vector::Zero(1));
    blk.Y = ConstraintSet::free();
    blk.A = Matrix::Identity(1, 1);
    blk.b = Vector::Constant(1, 1.0);
    p.blocks.push_back(blk);
  }
  p.coupling = CouplingKind::Equality;
  return p;
}

SeparableProblem mixed_row_two_block() {
  SeparableProblem p;
  {
    SeparableBlock blk;
    blk.h = ComponentFunction::quadratic(Matrix::Identity(1, 1), -Vector::Ones(1));
    blk.Y = ConstraintSet::free();
    blk.A = Matrix(2, 1);
    blk.A << 1.0, 0.0;
    blk.b = Vector(2);
    blk.b << 1.0, 0.0;
    p.blocks.push_back(blk);
  }
  {
    SeparableBlock blk;
    blk.h = ComponentFunction::quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
    blk.Y = ConstraintSet::free();
    blk.A = Matrix(2, 1);
    blk.A << 1.0, 1.0;
    blk.b = Vector(2);
    blk.b << 1.0, 0.5;
    p.blocks.push_back(blk);
  }
  p.coupling = CouplingKind::Equality;
  return p;
}

SeparableProblem dense_two_block(std::uint64_t seed) {
  Rng rng(seed);
  SeparableProblem p;
  for (int i = 0; i < 2; ++i) {
    SeparableBlock blk;
    blk.h = random_block_cost(rng, 2);
    blk.Y = ConstraintSet::free();
    blk.A = Matrix(2, 2);
    for (int row = 0; row < 2; ++row)
      for (int col = 0; col < 2; ++col) {
        double mag = rng.uniform(0.2, 1.2);
        blk.A(row, col) = rng.unit() < 0.5 ? -mag : mag;
      }
    blk.b = random_vector(rng, 2);
    p.blocks.push_back(blk);
  }
  p.coupling = CouplingKind::Equality;
  return p;
}

SeparableProblem single_block(std::uint64_t seed) {
  Rng rng(seed);
  SeparableProblem p;
  SeparableBlock blk;
  blk.h = random_block_cost(rng, 3);
  blk.Y = ConstraintSet::free();
  blk.A = random_matrix(rng, 2, 3);
  blk.b = random_vector(rng, 2);
  p.blocks.push_back(blk);
  p.coupling = CouplingKind::Equality;
  return p;
}

SeparableProblem scalar_inequality() {
  SeparableProblem p;
  SeparableBlock blk;
  blk.h = ComponentFunction::quadratic(Matrix::Identity(1, 1), -2.0 * Vector::Ones(1), 2.0);
  blk.Y = ConstraintSet::free();
  blk.A = Matrix::Identity(1, 1);
  blk.b = Vector::Zero(1);
  p.blocks.push_back(blk);
  p.coupling = CouplingKind::Inequality;
  return p;
}

SeparableProblem two_block_inequality() {
  SeparableProblem p;
  for (int i = 0; i < 2; ++i) {
    SeparableBlock blk;
    blk.h = ComponentFunction::quadratic(Matrix::Identity(1, 1), -Vector::Ones(1), 0.5);
    blk.Y = ConstraintSet::free();
    blk.A = Matrix::Identity(1, 1);
    blk.b = Vector::Constant(1, 0.5);
    p.blocks.push_back(blk);
  }
  p.coupling = CouplingKind::Inequality;
  return p;
}

SumProblem orthant_strict_complementarity() {
  SumProblem p;
  Vector c1(2);
  c1 << 1.0, 0.0;
  p.components.push_back(ComponentFunction::quadratic(Matrix::Zero(2, 2), c1));
  Matrix Q2 = Matrix::Zero(2, 2);
  Q2(1, 1) = 1.0;
  Vector c2(2);
  c2 << 0.0, -1.0;
  p.components.push_back(ComponentFunction::quadratic(Q2, c2, 0.5));
  p.constraint = ConstraintSet::nonnegative();
  Vector opt(2);
  opt << 0.0, 1.0;
  p.known_opt = opt;
  return p;
}

}  // namespace iasolve::builtin
