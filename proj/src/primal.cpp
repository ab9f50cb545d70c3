#include "iasolve/primal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "iasolve/analysis.hpp"

namespace iasolve {

PrimalAlgorithm primal_algorithm_from_tag(const std::string& tag) {
  if (tag == "is") return PrimalAlgorithm::IS;
  if (tag == "ip") return PrimalAlgorithm::IP;
  if (tag == "ias") return PrimalAlgorithm::IAS;
  if (tag == "iag") return PrimalAlgorithm::IAG;
  if (tag == "iap") return PrimalAlgorithm::IAP;
  if (tag == "iap_direct") return PrimalAlgorithm::IAPDirect;
  throw SolverError("unknown primal algorithm tag: " + tag);
}

std::string to_tag(PrimalAlgorithm a) {
  switch (a) {
    case PrimalAlgorithm::IS: return "is";
    case PrimalAlgorithm::IP: return "ip";
    case PrimalAlgorithm::IAS: return "ias";
    case PrimalAlgorithm::IAG: return "iag";
    case PrimalAlgorithm::IAP: return "iap";
    case PrimalAlgorithm::IAPDirect: return "iap_direct";
  }
  return "?";
}

StepsizeRule StepsizeRule::constant(double a) {
  require(a > 0.0, "stepsize: alpha must be positive");
  StepsizeRule r;
  r.kind = Kind::Constant;
  r.alpha = a;
  return r;
}

StepsizeRule StepsizeRule::diagonal(Vector a) {
  require(a.size() > 0 && (a.array() > 0.0).all(), "stepsize: diagonal entries must be positive");
  StepsizeRule r;
  r.kind = Kind::ConstantDiagonal;
  r.alpha_vec = std::move(a);
  r.alpha = r.alpha_vec.mean();
  return r;
}

StepsizeRule StepsizeRule::diminishing(double a0) {
  require(a0 > 0.0, "stepsize: alpha0 must be positive");
  StepsizeRule r;
  r.kind = Kind::Diminishing;
  r.alpha0 = a0;
  return r;
}

double StepsizeRule::at(int k) const {
  switch (kind) {
    case Kind::Constant: return alpha;
    case Kind::ConstantDiagonal: return alpha;  // mean, for reporting
    case Kind::Diminishing: return alpha0 / double(k + 1);
  }
  return 0.0;
}

Vector is_step(const SumProblem& p, const Vector& x, int i, double alpha,
               const ConstraintSet& X) {
  return X.project(x - alpha * p.components[size_t(i)].subgradient(x));
}

Vector ip_step(const SumProblem& p, const Vector& x, int i, double alpha,
               const ConstraintSet& X, const InnerSolveSettings& inner) {
  return prox(p.components[size_t(i)], x, alpha, X, inner);
}

Vector ias_step(const SumProblem& p, const Vector& x, const Vector& aggregate,
                double alpha, const ConstraintSet& X) {
  (void)p;
  return X.project(x - alpha * aggregate);
}

Vector iag_step(const SumProblem& p, const Vector& x, const Vector& aggregate,
                double alpha, const ConstraintSet& X) {
  (void)p;
  return X.project(x - alpha * aggregate);
}

Vector iap_step(const SumProblem& p, const Vector& x, int i, const Vector& others,
                double alpha, const ConstraintSet& X, Vector* z_out,
                const InnerSolveSettings& inner) {
  Vector z = x - alpha * others;
  if (z_out) *z_out = z;
  return prox(p.components[size_t(i)], z, alpha, X, inner);
}

Vector iap_direct_step(const SumProblem& p, const Vector& x, int i, const Vector& others,
                       double alpha, const ConstraintSet& X,
                       const InnerSolveSettings& inner) {
  return linearized_prox(p.components[size_t(i)], x, others, alpha, X, inner);
}

namespace {

bool uses_table(PrimalAlgorithm a) {
  return a == PrimalAlgorithm::IAS || a == PrimalAlgorithm::IAG ||
         a == PrimalAlgorithm::IAP || a == PrimalAlgorithm::IAPDirect;
}

bool uses_subgradients(PrimalAlgorithm a) {
  return a == PrimalAlgorithm::IS || a == PrimalAlgorithm::IAS;
}

// Iterate ring buffer for the resampling delay policies.
class History {
 public:
  History(int window, const Vector& x0) : window_(window + 1) {
    buf_.assign(size_t(window_), x0);
  }
  void push(int k, const Vector& x) { buf_[size_t(k % window_)] = x; }
  const Vector& at(int l) const { return buf_[size_t(l % window_)]; }

 private:
  int window_;
  std::vector<Vector> buf_;
};

}  // namespace

Trace run_primal(const SumProblem& p, PrimalAlgorithm algorithm,
                 const DelaySchedule& schedule, const PrimalOptions& options) {
  p.validate();
  const int n = p.dim();
  const int m = p.m();
  const ConstraintSet& X = p.constraint;

  Vector x = options.x0.size() ? options.x0 : Vector::Zero(n);
  require(x.size() == n, "run: x0 dimension mismatch");
  x = X.project(x);

  const bool diagonal = options.stepsize.is_diagonal();
  if (diagonal) {
    require(options.stepsize.alpha_vec.size() == n, "run: diagonal stepsize dimension mismatch");
    require(algorithm != PrimalAlgorithm::IS && algorithm != PrimalAlgorithm::IP,
            "run: diagonal stepsizes are supported for aggregated algorithms only");
  }

  DelayEngine engine(schedule, m);
  const bool table_used = uses_table(algorithm);
  const bool subgrad = uses_subgradients(algorithm);
  auto slot_value = [&](int i, const Vector& at) {
    return subgrad ? p.components[size_t(i)].subgradient(at)
                   : p.components[size_t(i)].gradient(at);
  };

  GradientTable table;
  std::optional<History> history;
  if (table_used) {
    table = GradientTable(m, n);
    table.initialize([&](int i) { return slot_value(i, x); }, 0);
    auto bound = schedule.effective_bound(m);
    if (schedule.policy == DelayPolicy::FixedDelay ||
        schedule.policy == DelayPolicy::UniformRandom)
      history.emplace(bound.value(), x);
  }

  const Vector* x_star = p.known_opt ? &*p.known_opt : nullptr;

  Trace trace;
  trace.rows.reserve(size_t(options.max_iterations) + 1);
  auto push_row = [&](int k, int i, double alpha, int staleness) {
    TraceRow row;
    row.k = k;
    row.i = i;
    row.alpha = alpha;
    row.err = x_star ? (x - *x_star).norm() : kNaN;
    row.obj = p.evaluate(x);
    row.staleness = staleness;
    trace.rows.push_back(row);
    if (options.record_iterates) trace.iterates.push_back(x);
  };

  RunStatus status = RunStatus::MaxIterations;
  int k = 0;
  for (; k < options.max_iterations; ++k) {
    const double alpha = options.stepsize.at(k);
    const int i = engine.select(k);

    if (table_used) {
      if (auto plan = engine.plan(k)) {
        for (int j = 0; j < m; ++j) {
          int l = (*plan)[size_t(j)];
          const Vector& xl = (l == k) ? x : history->at(l);
          table.refresh(j, slot_value(j, xl), l);
        }
      }
      // IAG/IAS process the selected component fresh; IAP refreshes it after
      // the step at the new point instead.
      if (algorithm == PrimalAlgorithm::IAG ||
          (algorithm == PrimalAlgorithm::IAS && options.ias_refresh == IasRefreshPoint::AtCurrent))
        table.refresh(i, slot_value(i, x), k);
    }

    const int staleness = table_used ? table.max_staleness(k) : 0;
    push_row(k, i, alpha, staleness);

    if (x_star && options.err_tol > 0.0 && trace.rows.back().err <= options.err_tol) {
      // Terminal rows describe an iterate, not a step: i=-1, alpha=0,
      // staleness=0 (no aggregate was read).
      trace.rows.back().i = -1;
      trace.rows.back().alpha = 0.0;
      trace.rows.back().staleness = 0;
      status = RunStatus::Converged;
      break;
    }

    Vector x_next;
    switch (algorithm) {
      case PrimalAlgorithm::IS:
        x_next = is_step(p, x, i, alpha, X);
        break;
      case PrimalAlgorithm::IP:
        x_next = ip_step(p, x, i, alpha, X, options.inner);
        break;
      case PrimalAlgorithm::IAS:
      case PrimalAlgorithm::IAG: {
        const Vector& agg = table.aggregate();
        if (options.record_aggregates) trace.step_aggregates.push_back(agg);
        x_next = diagonal
                     ? X.project(x - options.stepsize.alpha_vec.cwiseProduct(agg))
                     : X.project(x - alpha * agg);
        if (algorithm == PrimalAlgorithm::IAS && options.ias_refresh == IasRefreshPoint::AtNext)
          table.refresh(i, slot_value(i, x_next), k + 1);
        break;
      }
      case PrimalAlgorithm::IAP:
      case PrimalAlgorithm::IAPDirect: {
        Vector others = table.aggregate_excluding(i);
        if (options.record_aggregates) trace.step_aggregates.push_back(others);
        Vector z;
        if (diagonal) {
          z = x - options.stepsize.alpha_vec.cwiseProduct(others);
          x_next = prox_diag(p.components[size_t(i)], z, options.stepsize.alpha_vec, X,
                             options.inner);
          table.refresh(i, p.components[size_t(i)].gradient(x_next), k + 1);
        } else if (algorithm == PrimalAlgorithm::IAP) {
          x_next = iap_step(p, x, i, others, alpha, X, &z, options.inner);
          // Free case: the implicit-step identity supplies the new gradient.
          table.refresh(i,
                        X.is_free() ? Vector((z - x_next) / alpha)
                                    : p.components[size_t(i)].gradient(x_next),
                        k + 1);
        } else {
          x_next = iap_direct_step(p, x, i, others, alpha, X, options.inner);
          z = x - alpha * others;
          table.refresh(i,
                        X.is_free() ? Vector((z - x_next) / alpha)
                                    : p.components[size_t(i)].gradient(x_next),
                        k + 1);
        }
        break;
      }
    }

    if (options.record_aggregates) {
      trace.step_alphas.push_back(alpha);
      trace.step_indices.push_back(i);
    }

    if (!x_next.allFinite() || x_next.norm() > options.divergence_norm) {
      x = x_next;
      push_row(k + 1, -1, 0.0, 0);
      status = RunStatus::Diverged;
      ++k;
      trace.status = status;
      trace.iterations = k;
      return trace;
    }

    x = x_next;
    if (history) history->push(k + 1, x);
  }

  if (status != RunStatus::Converged && k == options.max_iterations) {
    push_row(k, -1, 0.0, 0);
    if (x_star && options.err_tol > 0.0 && trace.rows.back().err <= options.err_tol)
      status = RunStatus::Converged;
  }

  trace.status = status;
  trace.iterations = std::min(k, options.max_iterations);
  return trace;
}

namespace {

std::optional<Vector> quadratic_free_minimizer(const SumProblem& p) {
  if (!p.constraint.is_free()) return std::nullopt;
  for (const auto& f : p.components)
    if (!f.is_quadratic()) return std::nullopt;
  int n = p.dim();
  Matrix S = Matrix::Zero(n, n);
  Vector c = Vector::Zero(n);
  for (const auto& f : p.components) {
    S += f.Q();
    c += f.c();
  }
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  Vector x = ldlt.solve(-c);
  if ((S * x + c).norm() > 1e-8 * std::max(1.0, c.norm())) return std::nullopt;
  return x;
}

}  // namespace

TuneResult tune_constant_stepsize(const SumProblem& p, PrimalAlgorithm algorithm,
                                  const DelaySchedule& schedule,
                                  const PrimalOptions& base_options, int probe_iterations,
                                  double alpha_floor) {
  SumProblem probe_problem = p;
  if (!probe_problem.known_opt) {
    auto opt = quadratic_free_minimizer(p);
    if (!opt)
      throw SolverError("tuning requires a known or computable optimum");
    probe_problem.known_opt = *opt;
  }

  const double L = p.lipschitz_sum();
  require(L > 0.0, "tuning requires a positive Lipschitz sum");

  Vector x0 = base_options.x0.size() ? base_options.x0 : Vector::Zero(p.dim());
  const double err0 = (p.constraint.project(x0) - *probe_problem.known_opt).norm();
  require(err0 > 0.0, "tuning requires a start distinct from the optimum");

  const int m = p.m();
  const int b_eff = schedule.effective_bound(m).value_or(m - 1);
  const int burn_in = std::min(2 * b_eff + m, probe_iterations / 4);

  double alpha = 1.0 / L;
  TuneResult result;
  for (int halvings = 0;; ++halvings) {
    if (alpha < alpha_floor)
      throw TuningFailure("no stable stepsize found above the floor " +
                          std::to_string(alpha_floor));
    PrimalOptions opts = base_options;
    opts.stepsize = StepsizeRule::constant(alpha);
    opts.max_iterations = probe_iterations;
    opts.err_tol = 0.0;
    opts.record_iterates = false;
    opts.record_aggregates = false;

    Trace trace = run_primal(probe_problem, algorithm, schedule, opts);
    if (trace.status != RunStatus::Diverged) {
      const double err_final = trace.final_err();
      if (std::isfinite(err_final) && err_final < err0) {
        // Deep contraction is accepted outright; otherwise the tail must fit
        // a geometric decay.  The fit window stops at the roundoff floor.
        if (err_final <= 1e-10 * err0) {
          result.alpha = alpha;
          result.probe_rho = 0.0;
          result.halvings = halvings;
          return result;
        }
        std::vector<double> errs;
        const double floor = std::max(1e-13, 1e-12 * err0);
        for (const auto& row : trace.rows) {
          if (!std::isfinite(row.err) || row.err <= floor) break;
          errs.push_back(row.err);
        }
        if (int(errs.size()) >= burn_in + 20) {
          RateFit fit = fit_rate(errs, burn_in);
          if (std::isfinite(fit.rho_hat) && fit.rho_hat < 1.0) {
            result.alpha = alpha;
            result.probe_rho = fit.rho_hat;
            result.halvings = halvings;
            return result;
          }
        }
      }
    }
    alpha *= 0.5;
  }
}

}  // namespace iasolve
