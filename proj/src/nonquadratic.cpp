#include "iasolve/nonquadratic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "iasolve/kernels.hpp"
#include "iasolve/prox.hpp"

namespace iasolve {
namespace {

Vector broadcast_alpha(const Vector& alpha, int size) {
  require(alpha.size() == 1 || int(alpha.size()) == size,
          "stepsize vector must be scalar or match the dimension");
  if (int(alpha.size()) == size) return alpha;
  return Vector::Constant(size, alpha[0]);
}

Vector initial_block_iterate(const SeparableBlock& blk) {
  if (blk.h.is_quadratic() && blk.Y.is_free()) {
    Eigen::LDLT<Matrix> ldlt(blk.h.Q());
    if (ldlt.info() == Eigen::Success) {
      Vector y = ldlt.solve(-blk.h.c());
      if ((blk.h.Q() * y + blk.h.c()).norm() <= 1e-10 * std::max(1.0, blk.h.c().norm()))
        return y;
    }
  }
  return blk.Y.project(Vector::Zero(blk.h.dim()));
}

// Damped Newton on the strictly convex inner objective
//   Phi(y) = h_i(y) + sum_j (mu_j/alpha_j) psi(alpha_j (A y + t)_j).
Vector multiplier_inner_minimize(const SeparableBlock& blk, const Vector& mu,
                                 const Vector& t, const Vector& start,
                                 const MultiplierOptions& options) {
  if (!blk.h.is_quadratic() || !blk.Y.is_free())
    throw UnsupportedOperation(
        "multiplier inner solve: quadratic block costs over free blocks required");
  const Matrix& Q = blk.h.Q();
  const Vector& c = blk.h.c();
  const Matrix& A = blk.A;
  const Vector& alpha = options.alpha;
  const PenaltySpec& pen = options.penalty;
  const int r = int(A.rows());

  auto value = [&](const Vector& y) {
    Vector g = A * y + t;
    double v = 0.5 * y.dot(Q * y) + c.dot(y);
    for (int j = 0; j < r; ++j) v += (mu[j] / alpha[j]) * pen.psi(alpha[j] * g[j]);
    return v;
  };

  Vector y = start;
  for (int it = 0; it < options.newton_iterations; ++it) {
    Vector g = A * y + t;
    Vector w(r), hdiag(r);
    for (int j = 0; j < r; ++j) {
      w[j] = mu[j] * pen.dpsi(alpha[j] * g[j]);
      hdiag[j] = mu[j] * alpha[j] * pen.d2psi(alpha[j] * g[j]);
    }
    Vector grad = Q * y + c + A.transpose() * w;
    if (grad.norm() <= options.newton_grad_tol) return y;

    Matrix H = Q + A.transpose() * hdiag.asDiagonal() * A;
    Eigen::LDLT<Matrix> ldlt(H);
    Vector step;
    if (ldlt.info() == Eigen::Success) step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      Eigen::LDLT<Matrix> ridged(H + 1e-12 * Matrix::Identity(H.rows(), H.cols()));
      step = ridged.solve(-grad);
    }

    double v0 = value(y);
    double slope = grad.dot(step);
    // Endgame: once the predicted decrease falls below the roundoff of the
    // objective value the backtracking test cannot certify progress, while
    // the undamped Newton step on the strictly convex objective still
    // contracts the gradient.  Accept it outright.
    if (std::abs(slope) <= 1e-12 * std::max(1.0, std::abs(v0))) {
      y += step;
      continue;
    }
    double tstep = 1.0;
    int h = 0;
    for (; h <= options.newton_halvings; ++h) {
      Vector cand = y + tstep * step;
      double v = value(cand);
      if (std::isfinite(v) && v <= v0 + 1e-4 * tstep * slope) {
        y = cand;
        break;
      }
      tstep *= 0.5;
    }
    if (h > options.newton_halvings)
      throw InnerSolveFailure("multiplier inner solve: line search stalled");
  }
  Vector g = A * y + t;
  Vector w(r);
  for (int j = 0; j < r; ++j) w[j] = mu[j] * pen.dpsi(alpha[j] * g[j]);
  if ((Q * y + c + A.transpose() * w).norm() <= options.newton_grad_tol) return y;
  throw InnerSolveFailure("multiplier inner solve: Newton iteration limit reached");
}

// Shared multiplier machinery for the single-block and aggregated variants.
Vector multiplier_block_step(const SeparableProblem& p, MultiplierState& state, int i,
                             const Vector& offset, const MultiplierOptions& options) {
  const auto& blk = p.blocks[size_t(i)];
  Vector t = offset - blk.b;
  Vector y_new = multiplier_inner_minimize(blk, state.mu, t, state.y[size_t(i)], options);
  Vector g = blk.A * y_new + t;
  for (int j = 0; j < int(state.mu.size()); ++j)
    state.mu[j] *= options.penalty.dpsi(options.alpha[j] * g[j]);
  if (!(state.mu.array() > 0.0).all() || !state.mu.allFinite())
    throw SolverError("multiplier update left the positive orthant");
  state.y[size_t(i)] = y_new;
  state.table.refresh(i, blk.A * y_new - blk.b, state.k + 1);
  state.k += 1;
  return y_new;
}

}  // namespace

Vector exp_al_step(const SeparableProblem& p, MultiplierState& state,
                   const MultiplierOptions& options) {
  require(p.m() == 1, "exp_al_step: single-block instances only");
  return multiplier_block_step(p, state, 0, Vector::Zero(p.r()), options);
}

Vector iaali_step(const SeparableProblem& p, MultiplierState& state, int i,
                  const MultiplierOptions& options) {
  require(i >= 0 && i < p.m(), "iaali_step: block index out of range");
  Vector offset = state.table.aggregate_excluding(i);
  return multiplier_block_step(p, state, i, offset, options);
}

MultiplierRunResult run_multiplier(const SeparableProblem& p, MultiplierAlgorithm algorithm,
                                   const DelaySchedule& schedule,
                                   const MultiplierOptions& options) {
  p.validate();
  require(p.coupling == CouplingKind::Inequality,
          "run_multiplier: inequality coupling required");
  require(options.max_iterations >= 0, "run_multiplier: max_iterations must be nonnegative");
  if (algorithm == MultiplierAlgorithm::ExpAl)
    require(p.m() == 1, "run_multiplier: the single-block method needs m = 1");

  MultiplierRunResult out;
  MultiplierState& state = out.state;
  MultiplierOptions opts = options;
  opts.alpha = broadcast_alpha(options.alpha, p.r());
  require((opts.alpha.array() > 0.0).all(), "run_multiplier: stepsizes must be positive");
  state.mu = options.mu0.size() > 0 ? options.mu0 : Vector::Ones(p.r());
  require(int(state.mu.size()) == p.r() && (state.mu.array() > 0.0).all(),
          "run_multiplier: mu0 must be strictly positive with one entry per row");
  if (opts.mu_star)
    require(int(opts.mu_star->size()) == p.r(), "run_multiplier: mu_star dimension mismatch");

  for (const auto& blk : p.blocks) state.y.push_back(initial_block_iterate(blk));
  state.table = GradientTable(p.m(), p.r());
  state.table.initialize(
      [&](int i) {
        return Vector(p.blocks[size_t(i)].A * state.y[size_t(i)] - p.blocks[size_t(i)].b);
      },
      0);

  DelayEngine engine(schedule, p.m());
  const double alpha_report = opts.alpha.mean();

  std::vector<std::vector<Vector>> history;  // resampling snapshots by iteration
  int bound = 0;
  const bool resampling = schedule.policy == DelayPolicy::FixedDelay ||
                          schedule.policy == DelayPolicy::UniformRandom ||
                          schedule.policy == DelayPolicy::ZeroDelay;
  if (schedule.policy == DelayPolicy::FixedDelay) bound = std::max(schedule.d, 0);
  if (schedule.policy == DelayPolicy::UniformRandom) bound = std::max(schedule.b, 0);
  std::vector<Vector> snap0(size_t(p.m()));
  for (int i = 0; i < p.m(); ++i)
    snap0[size_t(i)] = p.blocks[size_t(i)].A * state.y[size_t(i)] - p.blocks[size_t(i)].b;
  history.assign(size_t(bound) + 1, snap0);

  Trace& trace = out.trace;
  auto push_row = [&](int k, int i, double alpha) {
    TraceRow row;
    row.k = k;
    row.i = i;
    row.alpha = alpha;
    row.err = opts.mu_star ? (state.mu - *opts.mu_star).norm() : kNaN;
    row.obj = p.objective(state.y);
    row.staleness = state.table.max_staleness(k);
    Vector viol = p.residual(state.y).cwiseMax(0.0);
    row.residual = viol.norm();
    row.mu_min = state.mu.minCoeff();
    trace.rows.push_back(row);
    if (opts.record_iterates) trace.iterates.push_back(state.mu);
  };

  RunStatus status = RunStatus::MaxIterations;
  int k = 0;
  for (; k < options.max_iterations; ++k) {
    int i = algorithm == MultiplierAlgorithm::ExpAl ? 0 : engine.select(k);
    if (resampling) {
      if (auto plan = engine.plan(k)) {
        for (int j = 0; j < p.m(); ++j) {
          int l = (*plan)[size_t(j)];
          if (l == k)
            state.table.refresh(
                j, p.blocks[size_t(j)].A * state.y[size_t(j)] - p.blocks[size_t(j)].b, k);
          else
            state.table.refresh(j, history[size_t(l % (bound + 1))][size_t(j)], l);
        }
      }
    }
    push_row(k, i, alpha_report);

    Vector mu_before = state.mu;
    if (algorithm == MultiplierAlgorithm::ExpAl) exp_al_step(p, state, opts);
    else iaali_step(p, state, i, opts);

    bool bad = !state.mu.allFinite() || state.mu.maxCoeff() > 1e12;
    for (const auto& yi : state.y) bad = bad || !yi.allFinite() || yi.norm() > 1e12;
    if (bad) {
      push_row(k + 1, -1, 0.0);
      trace.rows.back().staleness = 0;
      status = RunStatus::Diverged;
      ++k;
      break;
    }

    std::vector<Vector> snap(size_t(p.m()));
    for (int j = 0; j < p.m(); ++j)
      snap[size_t(j)] = p.blocks[size_t(j)].A * state.y[size_t(j)] - p.blocks[size_t(j)].b;
    history[size_t((k + 1) % (bound + 1))] = snap;

    if (options.mu_change_tol > 0.0 &&
        (state.mu - mu_before).lpNorm<Eigen::Infinity>() <= options.mu_change_tol) {
      push_row(k + 1, -1, 0.0);
      trace.rows.back().staleness = 0;
      status = RunStatus::Converged;
      ++k;
      break;
    }
  }
  if (status == RunStatus::MaxIterations && k == options.max_iterations) {
    push_row(k, -1, 0.0);
    trace.rows.back().staleness = 0;
  }

  trace.status = status;
  trace.iterations = std::min(k, options.max_iterations);
  return out;
}

Vector heuristic_stepsizes(double alpha, const Vector& xbar, double delta) {
  require(alpha > 0.0 && delta > 0.0, "heuristic_stepsizes: alpha and delta must be positive");
  Vector out(xbar.size());
  for (int j = 0; j < int(xbar.size()); ++j) out[j] = alpha / std::max(xbar[j], delta);
  return out;
}

Vector entropy_iap_step(const SumProblem& p, const Vector& xk, int i, const Vector& others,
                        const Vector& alpha, const EntropyOptions& options) {
  require(i >= 0 && i < p.m(), "entropy_iap_step: component index out of range");
  require(xk.size() == others.size() && xk.size() == alpha.size(),
          "entropy_iap_step: dimension mismatch");
  const auto& f = p.components[size_t(i)];

  if (options.penalty.kind == PenaltyKind::Quadratic) {
    // The quadratic penalty's generalized proximal term is the standard
    // quadratic one, so the step is the plain diagonal-metric linearized
    // prox, unconstrained.
    Vector z = xk - alpha.cwiseProduct(others);
    InnerSolveSettings inner;
    inner.residual_tol = options.newton_residual_tol;
    return prox_diag(f, z, alpha, ConstraintSet::free(), inner);
  }

  require((xk.array() > 0.0).all(), "entropy_iap_step: iterate must be strictly positive");
  if (!f.is_quadratic())
    throw UnsupportedOperation("entropy_iap_step: quadratic components required");

  // Damped Newton in log coordinates z = ln x on
  //   R(z) = (z - z_k) ./ alpha + grad f_i(e^z) + others.
  Vector zk = xk.array().log().matrix();
  auto residual = [&](const Vector& z) {
    Vector x = z.array().exp().matrix();
    return Vector(((z - zk).array() / alpha.array()).matrix() + f.gradient(x) + others);
  };

  Vector z = zk;
  for (int it = 0; it < 100; ++it) {
    Vector R = residual(z);
    if (R.norm() <= options.newton_residual_tol) return z.array().exp().matrix();

    Vector x = z.array().exp().matrix();
    Matrix J = Matrix(Vector(alpha.cwiseInverse()).asDiagonal());
    J += f.Q() * x.asDiagonal();
    Eigen::PartialPivLU<Matrix> lu(J);
    Vector step = lu.solve(-R);
    if (!step.allFinite())
      throw InnerSolveFailure("entropy_iap_step: singular Newton system");

    double r0 = R.norm();
    double tstep = 1.0;
    int h = 0;
    for (; h <= options.newton_halvings; ++h) {
      Vector cand = z + tstep * step;
      double rc = residual(cand).norm();
      if (std::isfinite(rc) && rc < r0) {
        z = cand;
        break;
      }
      tstep *= 0.5;
    }
    if (h > options.newton_halvings)
      throw InnerSolveFailure("entropy_iap_step: damped Newton stalled");
  }
  Vector R = residual(z);
  if (R.norm() <= options.newton_residual_tol) return z.array().exp().matrix();
  throw InnerSolveFailure("entropy_iap_step: Newton iteration limit reached");
}

Vector entropy_iag_step(const Vector& xk, const Vector& aggregate, const Vector& alpha,
                        bool* clamped) {
  Vector out(xk.size());
  bool hit = kernels::exp_scale(xk, alpha, aggregate, out);
  if (clamped) *clamped = hit;
  return out;
}

Vector constrained_iag_step(const Vector& xk, const Vector& aggregate, const Vector& alpha) {
  return (xk - alpha.cwiseProduct(aggregate)).cwiseMax(0.0);
}

EntropyRunResult run_entropy(const SumProblem& p, EntropyAlgorithm algorithm,
                             const DelaySchedule& schedule, const EntropyOptions& options) {
  p.validate();
  require(p.constraint.kind == ConstraintKind::NonnegativeOrthant,
          "run_entropy: nonnegative-orthant problems only");
  require(options.max_iterations >= 0, "run_entropy: max_iterations must be nonnegative");
  const int n = p.dim();
  const bool interior = algorithm != EntropyAlgorithm::ProjectedIAG;

  Vector x = options.x0.size() > 0 ? options.x0 : Vector::Ones(n);
  require(int(x.size()) == n, "run_entropy: x0 dimension mismatch");
  if (interior)
    require((x.array() > 0.0).all(), "run_entropy: x0 must be strictly positive");
  else
    x = x.cwiseMax(0.0);

  Vector alpha;
  if (options.per_coordinate) {
    alpha = *options.per_coordinate;
    require(int(alpha.size()) == n, "run_entropy: per-coordinate stepsize size mismatch");
  } else {
    require(options.alpha > 0.0, "run_entropy: alpha must be positive");
    alpha = options.use_heuristic
                ? heuristic_stepsizes(options.alpha, x, options.heuristic_delta)
                : Vector::Constant(n, options.alpha);
  }
  require((alpha.array() > 0.0).all(), "run_entropy: stepsizes must be positive");

  EntropyRunResult out;
  EntropyState& state = out.state;
  state.x = x;
  state.table = GradientTable(p.m(), n);
  state.table.initialize([&](int i) { return p.components[size_t(i)].gradient(state.x); }, 0);

  DelayEngine engine(schedule, p.m());
  int bound = 0;
  if (schedule.policy == DelayPolicy::FixedDelay) bound = std::max(schedule.d, 0);
  if (schedule.policy == DelayPolicy::UniformRandom) bound = std::max(schedule.b, 0);
  std::vector<Vector> history(size_t(bound) + 1, state.x);

  Trace& trace = out.trace;
  // fresh_slot >= 0 marks a slot the upcoming step refreshes at the current
  // point before reading the aggregate; its old stamp does not count toward
  // the staleness the step sees.
  auto push_row = [&](int k, int i, double a, int fresh_slot) {
    TraceRow row;
    row.k = k;
    row.i = i;
    row.alpha = a;
    row.err = p.known_opt ? (state.x - *p.known_opt).norm() : kNaN;
    row.obj = p.evaluate(state.x);
    int st = 0;
    for (int j = 0; j < state.table.m(); ++j) {
      if (j == fresh_slot) continue;
      st = std::max(st, k - state.table.stamp(j));
    }
    row.staleness = st;
    row.x_min = state.x.minCoeff();
    trace.rows.push_back(row);
    if (options.record_iterates) trace.iterates.push_back(state.x);
  };

  std::vector<int> near_zero_run(size_t(n), 0);
  RunStatus status = RunStatus::MaxIterations;
  int k = 0;
  for (; k < options.max_iterations; ++k) {
    if (!options.per_coordinate && options.use_heuristic && options.heuristic_refresh > 0 &&
        k > 0 && k % options.heuristic_refresh == 0)
      alpha = heuristic_stepsizes(options.alpha, state.x, options.heuristic_delta);

    int i = engine.select(k);
    if (auto plan = engine.plan(k)) {
      for (int j = 0; j < p.m(); ++j) {
        int l = (*plan)[size_t(j)];
        const Vector& xl = (l == k) ? state.x : history[size_t(l % (bound + 1))];
        state.table.refresh(j, p.components[size_t(j)].gradient(xl), l);
      }
    }

    push_row(k, i, alpha.mean(),
             algorithm == EntropyAlgorithm::EntropyIAP ? -1 : i);
    if (options.err_tol > 0.0 && trace.rows.back().err <= options.err_tol) {
      status = RunStatus::Converged;
      trace.rows.back().i = -1;
      trace.rows.back().alpha = 0.0;
      trace.rows.back().staleness = 0;
      break;
    }

    Vector x_next;
    switch (algorithm) {
      case EntropyAlgorithm::EntropyIAG: {
        state.table.refresh(i, p.components[size_t(i)].gradient(state.x), k);
        bool hit = false;
        x_next = entropy_iag_step(state.x, state.table.aggregate(), alpha, &hit);
        state.clamped = state.clamped || hit;
        break;
      }
      case EntropyAlgorithm::ProjectedIAG: {
        state.table.refresh(i, p.components[size_t(i)].gradient(state.x), k);
        x_next = constrained_iag_step(state.x, state.table.aggregate(), alpha);
        break;
      }
      case EntropyAlgorithm::EntropyIAP: {
        Vector others = state.table.aggregate_excluding(i);
        x_next = entropy_iap_step(p, state.x, i, others, alpha, options);
        state.table.refresh(i, p.components[size_t(i)].gradient(x_next), k + 1);
        break;
      }
    }

    if (interior && !(x_next.array() > 0.0).all())
      throw SolverError("run_entropy: iterate left the interior (underflow)");

    state.x = x_next;
    state.k = k + 1;

    if (!state.x.allFinite() || state.x.norm() > 1e12) {
      push_row(k + 1, -1, 0.0, -1);
      trace.rows.back().staleness = 0;
      status = RunStatus::Diverged;
      ++k;
      break;
    }

    history[size_t((k + 1) % (bound + 1))] = state.x;

    const double thresh = 1e-6 * state.x.maxCoeff();
    for (int j = 0; j < n; ++j)
      near_zero_run[size_t(j)] = state.x[j] < thresh ? near_zero_run[size_t(j)] + 1 : 0;
  }
  if (status == RunStatus::MaxIterations && k == options.max_iterations) {
    push_row(k, -1, 0.0, -1);
    trace.rows.back().staleness = 0;
  }

  trace.status = status;
  trace.iterations = std::min(k, options.max_iterations);
  for (int j = 0; j < n; ++j)
    if (near_zero_run[size_t(j)] >= 50) out.j0_estimate.push_back(j);
  return out;
}

}  // namespace iasolve
