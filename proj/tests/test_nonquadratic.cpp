#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "iasolve/builtin.hpp"
#include "iasolve/nonquadratic.hpp"
#include "iasolve/types.hpp"

using namespace iasolve;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(int(vals.size()));
  int j = 0;
  for (double x : vals) v[j++] = x;
  return v;
}

Matrix mat1(double q) {
  Matrix M(1, 1);
  M(0, 0) = q;
  return M;
}

// Entropy-prox step on the dual of the scalar inequality instance, solved by
// bisection: find mu with q'(mu) - (1/alpha) ln(mu/mu_k) = 0 where
// q'(mu) = 2 - mu.  Independent oracle for the multiplier update.
double entropy_prox_oracle(double mu_k, double alpha) {
  auto g = [&](double mu) { return 2.0 - mu - std::log(mu / mu_k) / alpha; };
  double lo = 1e-12, hi = 64.0;
  REQUIRE(g(lo) > 0.0);
  REQUIRE(g(hi) < 0.0);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("exponential multiplier first step solves y + e^y = 2") {
  SeparableProblem p = builtin::scalar_inequality();
  MultiplierState state;
  state.mu = vec({1.0});
  state.y.push_back(vec({0.0}));
  state.table = GradientTable(1, 1);
  state.table.initialize([&](int) { return Vector::Zero(1); }, 0);

  MultiplierOptions opt;
  opt.alpha = vec({1.0});
  Vector y = exp_al_step(p, state, opt);

  // Stationarity of 1/2 (y-2)^2 + (e^y - 1): (y - 2) + e^y = 0.
  CHECK(std::abs((y[0] - 2.0) + std::exp(y[0])) <= 1e-9);
  CHECK(y[0] == doctest::Approx(0.442854).epsilon(1e-5));
  // mu <- mu * psi'(alpha y) = e^y.
  CHECK(state.mu[0] == doctest::Approx(std::exp(y[0])).epsilon(1e-10));
  CHECK(state.mu[0] == doctest::Approx(2.0 - y[0]).epsilon(1e-7));
}

TEST_CASE("multiplier updates are entropy-prox steps on the dual") {
  SeparableProblem p = builtin::scalar_inequality();
  const double alpha = 1.0;
  MultiplierOptions opt;
  opt.alpha = vec({alpha});
  opt.max_iterations = 10;
  opt.record_iterates = true;
  MultiplierRunResult run =
      run_multiplier(p, MultiplierAlgorithm::ExpAl, DelaySchedule::last_update(), opt);

  double mu = 1.0;
  double worst = 0.0;
  REQUIRE(run.trace.iterates.size() >= 10);
  for (int k = 0; k < 10; ++k) {
    mu = entropy_prox_oracle(mu, alpha);
    worst = std::max(worst, std::abs(run.trace.iterates[std::size_t(k) + 1][0] - mu));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("exponential multipliers converge to mu = 2 with y at the boundary") {
  SeparableProblem p = builtin::scalar_inequality();
  MultiplierOptions opt;
  opt.alpha = vec({1.0});
  opt.max_iterations = 400;
  opt.mu_star = vec({2.0});
  MultiplierRunResult run =
      run_multiplier(p, MultiplierAlgorithm::ExpAl, DelaySchedule::last_update(), opt);
  CHECK(std::abs(run.state.mu[0] - 2.0) <= 1e-6);
  CHECK(std::abs(run.state.y[0][0]) <= 1e-6);
  // Multipliers stay strictly positive throughout.
  for (const TraceRow& row : run.trace.rows) CHECK(row.mu_min > 0.0);
  CHECK(run.trace.final_err() <= 1e-6);
}

TEST_CASE("stopping on multiplier change reports convergence") {
  SeparableProblem p = builtin::scalar_inequality();
  MultiplierOptions opt;
  opt.alpha = vec({1.0});
  opt.max_iterations = 2000;
  opt.mu_change_tol = 1e-10;
  MultiplierRunResult run =
      run_multiplier(p, MultiplierAlgorithm::ExpAl, DelaySchedule::last_update(), opt);
  CHECK(run.trace.status == RunStatus::Converged);
  CHECK(run.trace.iterations < 2000);
  CHECK(int(run.trace.rows.size()) == run.trace.iterations + 1);
  CHECK(run.trace.rows.back().i == -1);
  CHECK(run.trace.rows.back().staleness == 0);
}

TEST_CASE("incremental aggregated inequality method splits the coupling") {
  SeparableProblem p = builtin::two_block_inequality();
  MultiplierOptions opt;
  opt.alpha = vec({0.5});
  // No change-based stop: the very first block step leaves mu untouched
  // (its subproblem solves to a zero constraint value), which would trigger
  // a change tolerance immediately.
  opt.max_iterations = 2000;
  opt.mu_star = vec({0.5});
  MultiplierRunResult run =
      run_multiplier(p, MultiplierAlgorithm::IAALI, DelaySchedule::last_update(), opt);

  CHECK(std::abs(run.state.mu[0] - 0.5) <= 1e-6);
  CHECK(std::abs(run.state.y[0][0] - 0.5) <= 1e-5);
  CHECK(std::abs(run.state.y[1][0] - 0.5) <= 1e-5);
  for (const TraceRow& row : run.trace.rows) {
    CHECK(row.mu_min > 0.0);
    CHECK(row.staleness <= 1);  // last-update cyclic over two blocks
  }
}

TEST_CASE("multiplier inner solves require quadratic free blocks") {
  SeparableProblem p = builtin::scalar_inequality();
  p.blocks[0].Y = ConstraintSet::nonnegative();
  MultiplierOptions opt;
  opt.alpha = vec({1.0});
  opt.max_iterations = 3;
  CHECK_THROWS_AS(
      run_multiplier(p, MultiplierAlgorithm::ExpAl, DelaySchedule::last_update(), opt),
      UnsupportedOperation);
}

TEST_CASE("entropic implicit step on a linear component lands on e^{-1}") {
  SumProblem p;
  p.components.push_back(ComponentFunction::quadratic(mat1(0.0), vec({1.0})));
  p.constraint = ConstraintSet::nonnegative();

  EntropyOptions opt;
  Vector x = entropy_iap_step(p, vec({1.0}), 0, vec({0.0}), vec({1.0}), opt);
  // ln(x/1) + 1 = 0.
  CHECK(x[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(x[0] > 0.0);

  // Iterating the step keeps shrinking x geometrically by e^{-1} per step.
  Vector x2 = entropy_iap_step(p, x, 0, vec({0.0}), vec({1.0}), opt);
  CHECK(x2[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));

  // Strict positivity of the input is enforced.
  CHECK_THROWS_AS(entropy_iap_step(p, vec({0.0}), 0, vec({0.0}), vec({1.0}), opt),
                  InvalidProblem);

  // Non-quadratic components are refused.
  SumProblem cb;
  cb.components.push_back(ComponentFunction::callback(
      1, [](const Vector& x_) { return x_[0] * x_[0]; },
      [](const Vector& x_) { return Vector::Constant(1, 2.0 * x_[0]); }));
  cb.constraint = ConstraintSet::nonnegative();
  CHECK_THROWS_AS(entropy_iap_step(cb, vec({1.0}), 0, vec({0.0}), vec({1.0}), opt),
                  UnsupportedOperation);
}

TEST_CASE("implicit step satisfies its stated optimality condition") {
  // Quadratic component with curvature: residual of
  // (1/alpha_j) ln(x_j / xk_j) + grad(x)_j + others_j must vanish.
  SumProblem p;
  Matrix Q(2, 2);
  Q << 2.0, 0.3, 0.3, 1.0;
  p.components.push_back(ComponentFunction::quadratic(Q, vec({-1.0, 0.2})));
  p.constraint = ConstraintSet::nonnegative();

  EntropyOptions opt;
  Vector xk = vec({0.8, 1.3});
  Vector others = vec({0.1, -0.2});
  Vector alpha = vec({0.5, 0.25});
  Vector x = entropy_iap_step(p, xk, 0, others, alpha, opt);
  CHECK((x.array() > 0.0).all());
  Vector g = p.components[0].gradient(x);
  for (int j = 0; j < 2; ++j) {
    double res = std::log(x[j] / xk[j]) / alpha[j] + g[j] + others[j];
    CHECK(std::abs(res) <= 1e-9);
  }

  // With the quadratic penalty spec the same call reduces to the plain
  // diagonal-metric step: (x_j - xk_j)/alpha_j + grad(x)_j + others_j = 0
  // when the minimizer is interior.
  EntropyOptions qopt;
  qopt.penalty = PenaltySpec::quadratic();
  Vector xq = entropy_iap_step(p, xk, 0, others, alpha, qopt);
  Vector gq = p.components[0].gradient(xq);
  for (int j = 0; j < 2; ++j) {
    double res = (xq[j] - xk[j]) / alpha[j] + gq[j] + others[j];
    CHECK(std::abs(res) <= 1e-8);
  }
}

TEST_CASE("explicit multiplicative and projected steps") {
  Vector xk = vec({0.5, 2.0});
  Vector agg = vec({1.0, -0.5});
  Vector alpha = vec({0.2, 0.1});
  bool clamped = true;
  Vector x = entropy_iag_step(xk, agg, alpha, &clamped);
  CHECK(!clamped);
  CHECK(x[0] == doctest::Approx(0.5 * std::exp(-0.2)).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0 * std::exp(0.05)).epsilon(1e-14));

  // A huge aggregate hits the clamp but stays finite and positive.
  Vector big = vec({1e7, 0.0});
  Vector xc = entropy_iag_step(xk, big, alpha, &clamped);
  CHECK(clamped);
  CHECK(xc[0] > 0.0);
  CHECK(std::isfinite(xc[0]));

  Vector xp = constrained_iag_step(xk, vec({10.0, -0.5}), alpha);
  CHECK(xp[0] == 0.0);  // projection pins the first coordinate
  CHECK(xp[1] == doctest::Approx(2.05).epsilon(1e-14));
}

TEST_CASE("heuristic stepsizes divide by the floored reference point") {
  Vector a = heuristic_stepsizes(0.1, vec({2.0, 0.001}), 0.01);
  CHECK(a[0] == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(10.0).epsilon(1e-14));
  CHECK_THROWS_AS(heuristic_stepsizes(-0.1, vec({1.0}), 0.01), InvalidProblem);
}

TEST_CASE("entropy run decays boundary coordinates geometrically") {
  SumProblem p = builtin::orthant_strict_complementarity();
  EntropyOptions opt;
  opt.x0 = vec({0.1, 0.9});
  opt.per_coordinate = heuristic_stepsizes(0.05, opt.x0, 1e-3);
  opt.max_iterations = 1000;
  opt.record_iterates = true;
  EntropyRunResult run =
      run_entropy(p, EntropyAlgorithm::EntropyIAG, DelaySchedule::last_update(), opt);

  // Interior positivity holds for every recorded iterate.
  for (const TraceRow& row : run.trace.rows) CHECK(row.x_min > 0.0);
  CHECK(run.state.x[0] > 0.0);

  // The active coordinate contracts by e^{-alpha_0 * grad_0} = e^{-0.5} once
  // the free coordinate has settled at 1.
  const auto& it = run.trace.iterates;
  REQUIRE(it.size() >= 400);
  for (std::size_t k = 200; k < 220; ++k) {
    double ratio = it[k + 1][0] / it[k][0];
    CHECK(ratio == doctest::Approx(std::exp(-0.5)).epsilon(0.05));
  }
  CHECK(std::abs(run.state.x[1] - 1.0) <= 1e-6);

  // The pinned-coordinate estimate flags exactly the active coordinate.
  REQUIRE(run.j0_estimate.size() == 1);
  CHECK(run.j0_estimate[0] == 0);
}

TEST_CASE("projected variant reaches the boundary exactly") {
  SumProblem p = builtin::orthant_strict_complementarity();
  EntropyOptions opt;
  opt.x0 = vec({0.1, 0.9});
  opt.alpha = 0.1;
  opt.max_iterations = 2000;
  EntropyRunResult run =
      run_entropy(p, EntropyAlgorithm::ProjectedIAG, DelaySchedule::last_update(), opt);
  CHECK(run.state.x[0] == 0.0);
  CHECK(std::abs(run.state.x[1] - 1.0) <= 1e-6);
}

TEST_CASE("entropy runs demand strictly positive starts") {
  SumProblem p = builtin::orthant_strict_complementarity();
  EntropyOptions opt;
  opt.x0 = vec({0.0, 1.0});
  opt.alpha = 0.1;
  opt.max_iterations = 10;
  CHECK_THROWS_AS(
      run_entropy(p, EntropyAlgorithm::EntropyIAG, DelaySchedule::last_update(), opt),
      InvalidProblem);
}
