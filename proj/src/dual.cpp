#include "iasolve/dual.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "iasolve/kernels.hpp"

namespace iasolve {
namespace {

// Contribution of block i at its current iterate: A_i y^i - b_i.
Vector block_contribution(const SeparableProblem& p, const std::vector<Vector>& y, int i) {
  const auto& blk = p.blocks[size_t(i)];
  return blk.A * y[size_t(i)] - blk.b;
}

Vector initial_block_iterate(const SeparableBlock& blk, const InnerSolveSettings& inner) {
  if (blk.h.is_quadratic() && blk.Y.is_free()) {
    Eigen::LDLT<Matrix> ldlt(blk.h.Q());
    if (ldlt.info() == Eigen::Success) {
      Vector y = ldlt.solve(-blk.h.c());
      if ((blk.h.Q() * y + blk.h.c()).norm() <=
          inner.free_solve_residual_tol * std::max(1.0, blk.h.c().norm()))
        return y;
    }
  }
  return blk.Y.project(Vector::Zero(blk.h.dim()));
}

// Ring buffer of per-iteration block contributions, for resampling policies.
class ContributionHistory {
 public:
  ContributionHistory(int depth, std::vector<Vector> initial)
      : depth_(depth), entries_(size_t(depth), initial) {}

  void push(int k, const std::vector<Vector>& contributions) {
    entries_[size_t(k % depth_)] = contributions;
  }
  const Vector& at(int l, int i) const { return entries_[size_t(l % depth_)][size_t(i)]; }

 private:
  int depth_;
  std::vector<std::vector<Vector>> entries_;
};

// fresh_slot >= 0 marks a slot the upcoming step refreshes at the current
// point before reading the aggregate, so its pre-step stamp does not count
// toward the staleness the step actually sees.
void push_dual_row(Trace& trace, const SeparableProblem& p, const DualState* ds,
                   const AdmmState* as, int k, int i, double alpha,
                   const DualOptions& options, int fresh_slot = -1) {
  const std::vector<Vector>& y = ds ? ds->y : as->y;
  const Vector& lambda = ds ? ds->lambda : as->lambda;
  TraceRow row;
  row.k = k;
  row.i = i;
  row.alpha = alpha;
  row.residual = p.residual(y).norm();
  row.obj = p.objective(y);
  row.err = options.lambda_star ? (lambda - *options.lambda_star).norm() : kNaN;
  int st = 0;
  if (ds) {
    for (int j = 0; j < ds->table.m(); ++j) {
      if (j == fresh_slot) continue;
      st = std::max(st, k - ds->table.stamp(j));
    }
  }
  row.staleness = st;
  trace.rows.push_back(row);
  if (options.record_iterates) trace.iterates.push_back(lambda);
}

}  // namespace

DualAlgorithm dual_algorithm_from_tag(const std::string& tag) {
  if (tag == "iadg") return DualAlgorithm::IADG;
  if (tag == "ial") return DualAlgorithm::IAL;
  if (tag == "iaal") return DualAlgorithm::IAAL;
  if (tag == "iaal_cycle") return DualAlgorithm::IAALBatchCycle;
  if (tag == "admm") return DualAlgorithm::ADMM;
  if (tag == "admm_scaled") return DualAlgorithm::ScaledADMM;
  throw InvalidProblem("unknown dual algorithm tag: " + tag);
}

std::string to_tag(DualAlgorithm a) {
  switch (a) {
    case DualAlgorithm::IADG: return "iadg";
    case DualAlgorithm::IAL: return "ial";
    case DualAlgorithm::IAAL: return "iaal";
    case DualAlgorithm::IAALBatchCycle: return "iaal_cycle";
    case DualAlgorithm::ADMM: return "admm";
    case DualAlgorithm::ScaledADMM: return "admm_scaled";
  }
  throw InvalidProblem("unknown dual algorithm");
}

DualFunctionValue dual_component(const SeparableProblem& p, int i, const Vector& lambda,
                                 const InnerSolveSettings& inner) {
  require(i >= 0 && i < p.m(), "dual_component: block index out of range");
  const auto& blk = p.blocks[size_t(i)];
  require(int(lambda.size()) == p.r(), "dual_component: multiplier dimension mismatch");
  if (!blk.h.is_quadratic())
    throw UnsupportedOperation("dual_component: quadratic block costs required");

  QuadraticModel model{blk.h.Q(), blk.h.c() + blk.A.transpose() * lambda};
  Vector y;
  if (blk.Y.is_free()) {
    Eigen::LDLT<Matrix> ldlt(model.Q);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
      y = ldlt.solve(-model.c);
      ok = (model.Q * y + model.c).norm() <=
           std::max(inner.free_solve_residual_tol * std::max(1.0, model.c.norm()), 1e-12);
    }
    if (!ok) {
      // Singular Hessian: certify unboundedness along a near-null direction
      // with nonzero slope, if one exists.
      Eigen::SelfAdjointEigenSolver<Matrix> es(model.Q);
      const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
      for (int j = 0; j < model.Q.rows(); ++j) {
        if (es.eigenvalues()[j] <= 1e-12 * scale) {
          Vector v = es.eigenvectors().col(j);
          double slope = model.c.dot(v);
          if (std::abs(slope) > 1e-10 * std::max(1.0, model.c.norm())) {
            if (slope > 0) v = -v;  // descent direction for c'y
            throw UnboundedDual("dual_component: block cost unbounded below", v);
          }
        }
      }
      throw InnerSolveFailure("dual_component: singular block system with no certificate");
    }
  } else {
    y = minimize_quadratic(model, blk.Y, blk.Y.project(Vector::Zero(blk.h.dim())), inner);
  }

  DualFunctionValue out;
  out.minimizer = y;
  out.subgradient = blk.A * y - blk.b;
  out.q = blk.h.evaluate(y) + lambda.dot(out.subgradient);
  return out;
}

Vector block_minimize(const SeparableBlock& block, const Vector& lambda, double weight,
                      const Vector& offset, const Vector& start,
                      const InnerSolveSettings& inner) {
  require(weight > 0.0, "block_minimize: penalty weight must be positive");
  require(lambda.size() == block.A.rows() && offset.size() == block.A.rows(),
          "block_minimize: row dimension mismatch");
  if (!block.h.is_quadratic())
    throw UnsupportedOperation("block_minimize: quadratic block costs required");

  QuadraticModel model{
      block.h.Q() + weight * (block.A.transpose() * block.A),
      block.h.c() + block.A.transpose() * (lambda + weight * offset)};
  return minimize_quadratic(model, block.Y, start, inner);
}

void iadg_step(const SeparableProblem& p, DualState& state, int i, double alpha,
               const InnerSolveSettings& inner) {
  // Pure Lagrangian minimization for the selected block, then a multiplier
  // step along the aggregated (partly stale) coupling residual.
  DualFunctionValue val = dual_component(p, i, state.lambda, inner);
  state.y[size_t(i)] = val.minimizer;
  state.table.refresh(i, val.subgradient, state.k);
  state.lambda += alpha * state.table.aggregate();
  state.k += 1;
}

void ial_step(const SeparableProblem& p, DualState& state, int i, double alpha,
              const InnerSolveSettings& inner) {
  // Augmented step penalizing only the block's own residual A_i y - b_i.
  const auto& blk = p.blocks[size_t(i)];
  state.y[size_t(i)] =
      block_minimize(blk, state.lambda, alpha, -blk.b, state.y[size_t(i)], inner);
  Vector u = blk.A * state.y[size_t(i)] - blk.b;
  state.lambda += alpha * u;
  state.table.refresh(i, u, state.k + 1);
  state.k += 1;
}

void iaal_step(const SeparableProblem& p, DualState& state, int i, double alpha,
               const InnerSolveSettings& inner) {
  // Streamlined form: the penalty sees the aggregated residual, with every
  // other block held at its stored (possibly stale) contribution.
  const auto& blk = p.blocks[size_t(i)];
  // Slots store A_j y^j - b_j, so the sum over j != i needs b_i subtracted
  // to reproduce sum_{j != i} A_j y^j - b.
  Vector offset = state.table.aggregate_excluding(i) - blk.b;
  state.y[size_t(i)] =
      block_minimize(blk, state.lambda, alpha, offset, state.y[size_t(i)], inner);
  Vector own = blk.A * state.y[size_t(i)];
  state.lambda += alpha * (own + offset);
  state.table.refresh(i, own - blk.b, state.k + 1);
  state.k += 1;
}

void iaal_batch_cycle(const SeparableProblem& p, DualState& state, double alpha,
                      const InnerSolveSettings& inner) {
  // One Gauss-Seidel pass at fixed lambda; each block sees the freshest
  // iterates of the others, then one multiplier update with the full
  // residual of the updated tuple.
  const Vector b = p.b_total();
  Vector total = Vector::Zero(p.r());
  for (int j = 0; j < p.m(); ++j) total += p.blocks[size_t(j)].A * state.y[size_t(j)];
  for (int i = 0; i < p.m(); ++i) {
    const auto& blk = p.blocks[size_t(i)];
    Vector own_old = blk.A * state.y[size_t(i)];
    Vector offset = (total - own_old) - b;
    state.y[size_t(i)] =
        block_minimize(blk, state.lambda, alpha, offset, state.y[size_t(i)], inner);
    total += blk.A * state.y[size_t(i)] - own_old;
  }
  state.lambda += alpha * (total - b);
  for (int i = 0; i < p.m(); ++i)
    state.table.refresh(i, block_contribution(p, state.y, i), state.k + 1);
  state.k += 1;
}

void admm_step(const SeparableProblem& p, AdmmState& state, double alpha,
               const InnerSolveSettings& inner) {
  const int m = p.m();
  const Vector b = p.b_total();
  Vector total = Vector::Zero(p.r());
  for (int j = 0; j < m; ++j) total += p.blocks[size_t(j)].A * state.y[size_t(j)];
  const Vector spread = (total - b) / double(m);

  // Jacobi sweep: every block is centered on its own old contribution minus
  // an equal share of the old residual, all from the same iterate.
  std::vector<Vector> y_new(static_cast<size_t>(m));
  kernels::parallel_blocks(m, [&](int i) {
    const auto& blk = p.blocks[size_t(i)];
    Vector center = blk.A * state.y[size_t(i)] - spread;
    y_new[size_t(i)] = block_minimize(blk, state.lambda, alpha, -center,
                                      state.y[size_t(i)], inner);
  });
  state.y = std::move(y_new);

  Vector total_new = Vector::Zero(p.r());
  for (int j = 0; j < m; ++j) total_new += p.blocks[size_t(j)].A * state.y[size_t(j)];
  state.lambda += (alpha / double(m)) * (total_new - b);
  state.k += 1;
}

void scaled_admm_step(const SeparableProblem& p, AdmmState& state, double alpha,
                      const InnerSolveSettings& inner) {
  const int m = p.m();
  const Vector b = p.b_total();
  const Vector lambda_old = state.lambda;

  std::vector<Vector> y_new(static_cast<size_t>(m));
  kernels::parallel_blocks(m, [&](int i) {
    const auto& blk = p.blocks[size_t(i)];
    y_new[size_t(i)] = block_minimize(blk, lambda_old, alpha, -state.z[size_t(i)],
                                      state.y[size_t(i)], inner);
  });
  state.y = std::move(y_new);

  Vector total_new = Vector::Zero(p.r());
  for (int j = 0; j < m; ++j) total_new += p.blocks[size_t(j)].A * state.y[size_t(j)];
  // Row-wise scaling by the number of blocks actually coupled through the row.
  for (int j = 0; j < p.r(); ++j)
    state.lambda[j] = lambda_old[j] +
                      (alpha / double(state.row_counts[size_t(j)])) * (total_new[j] - b[j]);
  for (int i = 0; i < m; ++i)
    state.z[size_t(i)] = p.blocks[size_t(i)].A * state.y[size_t(i)] +
                         (lambda_old - state.lambda) / alpha;
  state.k += 1;
}

DualState make_dual_state(const SeparableProblem& p, const InnerSolveSettings& inner) {
  p.validate();
  DualState state;
  state.lambda = Vector::Zero(p.r());
  state.y.reserve(size_t(p.m()));
  for (const auto& blk : p.blocks) state.y.push_back(initial_block_iterate(blk, inner));
  state.table = GradientTable(p.m(), p.r());
  state.table.initialize([&](int i) { return block_contribution(p, state.y, i); }, 0);
  return state;
}

AdmmState make_admm_state(const SeparableProblem& p, const InnerSolveSettings& inner) {
  p.validate();
  AdmmState state;
  state.lambda = Vector::Zero(p.r());
  for (const auto& blk : p.blocks) state.y.push_back(initial_block_iterate(blk, inner));

  state.row_counts.assign(size_t(p.r()), 0);
  for (int j = 0; j < p.r(); ++j) {
    int count = 0;
    for (const auto& blk : p.blocks)
      if (blk.A.row(j).cwiseAbs().maxCoeff() > 0.0) ++count;
    state.row_counts[size_t(j)] = count > 0 ? count : p.m();
  }

  // Centers start at the plain-variant value generalized row-wise, so the
  // scaled and unscaled runs coincide from step zero when every row touches
  // every block.
  Vector total = Vector::Zero(p.r());
  for (int j = 0; j < p.m(); ++j) total += p.blocks[size_t(j)].A * state.y[size_t(j)];
  Vector spread = total - p.b_total();
  for (int j = 0; j < p.r(); ++j) spread[j] /= double(state.row_counts[size_t(j)]);
  for (int i = 0; i < p.m(); ++i)
    state.z.push_back(p.blocks[size_t(i)].A * state.y[size_t(i)] - spread);
  return state;
}

DualRunResult run_dual(const SeparableProblem& p, DualAlgorithm algorithm,
                       const DelaySchedule& schedule, const DualOptions& options) {
  p.validate();
  require(p.coupling == CouplingKind::Equality,
          "run_dual: equality coupling required (inequalities use the multiplier module)");
  require(options.max_iterations >= 0, "run_dual: max_iterations must be nonnegative");
  if (options.lambda_star)
    require(int(options.lambda_star->size()) == p.r(),
            "run_dual: lambda_star dimension mismatch");

  const bool incremental = algorithm == DualAlgorithm::IADG ||
                           algorithm == DualAlgorithm::IAL ||
                           algorithm == DualAlgorithm::IAAL;
  const bool admm_family =
      algorithm == DualAlgorithm::ADMM || algorithm == DualAlgorithm::ScaledADMM;

  DualRunResult out;
  DualStepsizeRule rule = options.stepsize;
  if (algorithm == DualAlgorithm::IAAL && rule.kind == DualStepsizeRule::Kind::Constant &&
      !p.dual_strong_concavity()) {
    out.forced_diminishing = true;
    rule = DualStepsizeRule::diminishing(rule.alpha);
  }

  DelayEngine engine(schedule, p.m());
  if (incremental) {
    out.state = make_dual_state(p, options.inner);
  } else {
    out.state.lambda = Vector::Zero(p.r());
    if (admm_family) out.admm_state = make_admm_state(p, options.inner);
    else out.state = make_dual_state(p, options.inner);  // batch cycle
  }
  DualState& ds = out.state;
  AdmmState& as = out.admm_state;

  std::optional<ContributionHistory> history;
  if (incremental && (schedule.policy == DelayPolicy::FixedDelay ||
                      schedule.policy == DelayPolicy::UniformRandom)) {
    int bound = std::max(schedule.policy == DelayPolicy::FixedDelay ? schedule.d : schedule.b, 0);
    std::vector<Vector> init(size_t(p.m()));
    for (int i = 0; i < p.m(); ++i) init[size_t(i)] = block_contribution(p, ds.y, i);
    history.emplace(bound + 1, std::move(init));
  }

  Trace& trace = out.trace;
  RunStatus status = RunStatus::MaxIterations;
  int k = 0;
  for (; k < options.max_iterations; ++k) {
    int i = incremental ? engine.select(k) : -1;
    double alpha = rule.at(k);

    if (incremental) {
      if (auto plan = engine.plan(k)) {
        for (int j = 0; j < p.m(); ++j) {
          int l = (*plan)[size_t(j)];
          if (l == k) ds.table.refresh(j, block_contribution(p, ds.y, j), k);
          else ds.table.refresh(j, history->at(l, j), l);
        }
      }
    }

    push_dual_row(trace, p, admm_family ? nullptr : &ds, admm_family ? &as : nullptr, k, i,
                  alpha, options, algorithm == DualAlgorithm::IADG ? i : -1);
    if (options.residual_tol > 0.0 && trace.rows.back().residual <= options.residual_tol) {
      status = RunStatus::Converged;
      trace.rows.back().i = -1;
      trace.rows.back().alpha = 0.0;
      trace.rows.back().staleness = 0;
      break;
    }

    switch (algorithm) {
      case DualAlgorithm::IADG: iadg_step(p, ds, i, alpha, options.inner); break;
      case DualAlgorithm::IAL: ial_step(p, ds, i, alpha, options.inner); break;
      case DualAlgorithm::IAAL: iaal_step(p, ds, i, alpha, options.inner); break;
      case DualAlgorithm::IAALBatchCycle: iaal_batch_cycle(p, ds, alpha, options.inner); break;
      case DualAlgorithm::ADMM: admm_step(p, as, alpha, options.inner); break;
      case DualAlgorithm::ScaledADMM: scaled_admm_step(p, as, alpha, options.inner); break;
    }

    const Vector& lambda = admm_family ? as.lambda : ds.lambda;
    const std::vector<Vector>& y = admm_family ? as.y : ds.y;
    bool bad = !lambda.allFinite() || lambda.norm() > options.divergence_norm;
    for (const auto& yi : y)
      bad = bad || !yi.allFinite() || yi.norm() > options.divergence_norm;
    if (bad) {
      push_dual_row(trace, p, admm_family ? nullptr : &ds, admm_family ? &as : nullptr,
                    k + 1, -1, 0.0, options);
      trace.rows.back().staleness = 0;
      status = RunStatus::Diverged;
      ++k;
      break;
    }

    if (history) {
      std::vector<Vector> snap(size_t(p.m()));
      for (int j = 0; j < p.m(); ++j) snap[size_t(j)] = block_contribution(p, ds.y, j);
      history->push(k + 1, snap);
    }
  }

  if (status == RunStatus::MaxIterations && k == options.max_iterations) {
    push_dual_row(trace, p, admm_family ? nullptr : &ds, admm_family ? &as : nullptr, k, -1,
                  0.0, options);
    trace.rows.back().staleness = 0;
  }

  trace.status = status;
  trace.iterations = std::min(k, options.max_iterations);
  return out;
}

QuadraticDual quadratic_dual(const SeparableProblem& p) {
  p.validate();
  const int r = p.r();
  QuadraticDual qd;
  qd.H = Matrix::Zero(r, r);
  qd.g = p.b_total();
  for (const auto& blk : p.blocks) {
    if (!blk.h.is_quadratic() || !blk.Y.is_free())
      throw UnsupportedOperation(
          "quadratic_dual: quadratic costs over free blocks required");
    Eigen::LDLT<Matrix> ldlt(blk.h.Q());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw UnsupportedOperation("quadratic_dual: block costs must be positive definite");
    Matrix QinvAt = ldlt.solve(Matrix(blk.A.transpose()));
    qd.H += blk.A * QinvAt;
    qd.g += blk.A * ldlt.solve(blk.h.c());
  }
  return qd;
}

ProxAlEquivalence prox_al_equivalence_check(const SeparableProblem& p, double alpha,
                                            int steps, const InnerSolveSettings& inner) {
  require(p.m() == 1, "prox_al_equivalence_check: single-block instances only");
  require(alpha > 0.0 && steps > 0, "prox_al_equivalence_check: alpha and steps must be positive");
  QuadraticDual qd = quadratic_dual(p);
  const int r = p.r();
  const auto& blk = p.blocks[0];

  Matrix prox_system = qd.H + Matrix::Identity(r, r) / alpha;
  Eigen::LDLT<Matrix> prox_ldlt(prox_system);
  require(prox_ldlt.info() == Eigen::Success,
          "prox_al_equivalence_check: proximal system factorization failed");

  ProxAlEquivalence out;
  Vector lambda_al = Vector::Zero(r);
  Vector lambda_dp = Vector::Zero(r);
  Vector y = initial_block_iterate(blk, inner);
  for (int k = 0; k < steps; ++k) {
    // Augmented Lagrangian two-step form.
    y = block_minimize(blk, lambda_al, alpha, -blk.b, y, inner);
    Vector u = blk.A * y - blk.b;
    Vector lambda_next = lambda_al + alpha * u;
    out.max_identity_deviation =
        std::max(out.max_identity_deviation, ((lambda_next - lambda_al) / alpha - u).norm());
    lambda_al = lambda_next;

    // Explicit proximal recursion on the closed-form dual.
    lambda_dp = prox_ldlt.solve(lambda_dp / alpha - qd.g);

    out.max_multiplier_deviation =
        std::max(out.max_multiplier_deviation, (lambda_al - lambda_dp).norm());
  }
  return out;
}

}  // namespace iasolve
