#include "iasolve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace iasolve {

RateFit fit_rate(const std::vector<double>& errors, int burn_in) {
  require(burn_in >= 0, "fit_rate: burn_in must be nonnegative");
  if (int(errors.size()) < burn_in + 2)
    throw SolverError("fit_rate: too few error entries for the requested burn-in");

  // Collect ln(err) from burn_in up to the first nonpositive or nonfinite
  // entry; zeros end the usable window.
  std::vector<double> ks, ys;
  double max_ratio = -std::numeric_limits<double>::infinity();
  for (int k = burn_in; k < int(errors.size()); ++k) {
    double e = errors[size_t(k)];
    if (!(e > 0.0) || !std::isfinite(e)) break;
    if (!ys.empty()) max_ratio = std::max(max_ratio, e / errors[size_t(k - 1)]);
    ks.push_back(double(k));
    ys.push_back(std::log(e));
  }
  if (ks.size() < 2) throw SolverError("fit_rate: fewer than two positive errors after burn-in");

  const double n = double(ks.size());
  double km = 0.0, ym = 0.0;
  for (size_t t = 0; t < ks.size(); ++t) {
    km += ks[t];
    ym += ys[t];
  }
  km /= n;
  ym /= n;
  double skk = 0.0, sky = 0.0, syy = 0.0;
  for (size_t t = 0; t < ks.size(); ++t) {
    double dk = ks[t] - km, dy = ys[t] - ym;
    skk += dk * dk;
    sky += dk * dy;
    syy += dy * dy;
  }
  const double slope = sky / skk;
  const double intercept = ym - slope * km;

  double ss_res = 0.0;
  for (size_t t = 0; t < ks.size(); ++t) {
    double r = ys[t] - (intercept + slope * ks[t]);
    ss_res += r * r;
  }

  RateFit fit;
  fit.rho_hat = std::exp(slope);
  fit.gamma_hat = std::exp(intercept);
  fit.r2 = (syy <= 1e-300) ? 1.0 : 1.0 - ss_res / syy;
  fit.burn_in = burn_in;
  fit.window = int(ks.size());
  fit.max_ratio = max_ratio;
  return fit;
}

RateFit fit_rate(const Trace& trace, int burn_in) {
  std::vector<double> errors;
  errors.reserve(trace.rows.size());
  for (const auto& row : trace.rows) errors.push_back(row.err);
  int finite = 0;
  for (double e : errors)
    if (std::isfinite(e)) ++finite;
  if (finite < burn_in + 20)
    throw SolverError("fit_rate: trace needs at least burn_in + 20 finite errors");
  return fit_rate(errors, burn_in);
}

Lemma31Result lemma31_bound_check(double p, double q, int d, double beta0, int horizon) {
  require(p >= 0.0 && q >= 0.0, "lemma31: p and q must be nonnegative");
  require(p + q < 1.0, "lemma31: p + q must be strictly less than 1");
  require(d >= 1, "lemma31: d must be at least 1");
  require(beta0 >= 0.0, "lemma31: beta0 must be nonnegative");
  require(horizon >= 1, "lemma31: horizon must be positive");

  Lemma31Result out;
  out.rho = std::pow(p + q, 1.0 / double(1 + d));

  // Equality recursion, the extreme case of the inequality.
  std::vector<double> beta(size_t(horizon) + 1);
  beta[0] = beta0;
  for (int k = 0; k < horizon; ++k) {
    double window_max = 0.0;
    for (int l = std::max(0, k - d); l <= k; ++l)
      window_max = std::max(window_max, beta[size_t(l)]);
    beta[size_t(k) + 1] = p * beta[size_t(k)] + q * window_max;
  }

  double envelope = beta0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= horizon; ++k) {
    min_margin = std::min(min_margin, envelope - beta[size_t(k)]);
    envelope *= out.rho;
  }
  out.min_margin = min_margin;
  out.holds = min_margin >= -1e-12 * std::max(1.0, beta0);
  return out;
}

ErrorDecomposition error_audit(const Trace& trace, const SumProblem& p, int b,
                               const Vector& x_star) {
  require(!trace.iterates.empty(), "error_audit: trace must be recorded with iterates");
  const int steps = int(trace.step_aggregates.size());
  require(steps > 0 && int(trace.iterates.size()) >= steps + 1,
          "error_audit: trace must be recorded with step aggregates");
  require(p.constraint.is_free(), "error_audit: free-constraint runs only");

  ErrorDecomposition out;
  out.e_norms.reserve(size_t(steps));
  out.window_max.reserve(size_t(steps));

  std::vector<double> dists(size_t(steps) + 1);
  for (int k = 0; k <= steps; ++k) dists[size_t(k)] = (trace.iterates[size_t(k)] - x_star).norm();

  std::vector<double> ratios;
  for (int k = 0; k < steps; ++k) {
    const Vector& xk = trace.iterates[size_t(k)];
    const Vector& xn = trace.iterates[size_t(k) + 1];
    const double alpha = trace.step_alphas[size_t(k)];
    const int i = trace.step_indices[size_t(k)];
    Vector grad_full = p.gradient(xk);

    Vector e_identity = (xk - xn) / alpha - grad_full;
    Vector e_direct =
        trace.step_aggregates[size_t(k)] + p.components[size_t(i)].gradient(xn) - grad_full;
    out.max_route_deviation =
        std::max(out.max_route_deviation, (e_identity - e_direct).norm());

    double wmax = 0.0;
    for (int l = std::max(0, k - 2 * b); l <= k; ++l) wmax = std::max(wmax, dists[size_t(l)]);
    out.e_norms.push_back(e_identity.norm());
    out.window_max.push_back(wmax);
    if (wmax > 1e-14) {
      double C = e_identity.norm() / (alpha * wmax);
      ratios.push_back(C);
      out.C_fit = std::max(out.C_fit, C);
    } else {
      ratios.push_back(0.0);
    }
  }

  const int third = std::max(1, steps / 3);
  for (int t = 0; t < 3; ++t) {
    int lo = t * third;
    int hi = (t == 2) ? steps : std::min(steps, (t + 1) * third);
    double mx = 0.0;
    for (int k = lo; k < hi; ++k) mx = std::max(mx, ratios[size_t(k)]);
    out.C_by_third.push_back(mx);
  }
  return out;
}

KktSolution kkt_oracle(const SeparableProblem& p) {
  p.validate();
  if (p.coupling != CouplingKind::Equality)
    throw OracleUnavailable("kkt oracle: equality coupling required");
  int N = 0;
  for (const auto& blk : p.blocks) {
    if (!blk.h.is_quadratic() || !blk.Y.is_free())
      throw OracleUnavailable("kkt oracle: quadratic costs over free blocks required");
    N += blk.h.dim();
  }
  const int r = p.r();
  Matrix K = Matrix::Zero(N + r, N + r);
  Vector rhs = Vector::Zero(N + r);
  int off = 0;
  for (const auto& blk : p.blocks) {
    int n = blk.h.dim();
    K.block(off, off, n, n) = blk.h.Q();
    K.block(off, N, n, r) = blk.A.transpose();
    K.block(N, off, r, n) = blk.A;
    rhs.segment(off, n) = -blk.h.c();
    off += n;
  }
  rhs.segment(N, r) = p.b_total();

  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible())
    throw OracleUnavailable("kkt oracle: singular saddle system");
  Vector sol = lu.solve(rhs);

  KktSolution out;
  off = 0;
  for (const auto& blk : p.blocks) {
    out.y.push_back(sol.segment(off, blk.h.dim()));
    off += blk.h.dim();
  }
  out.lambda = sol.segment(N, r);
  out.residual = (K * sol - rhs).norm() / std::max(1.0, rhs.norm());
  return out;
}

KktSolution kkt_oracle(const SumProblem& p) {
  p.validate();
  if (!p.constraint.is_free())
    throw OracleUnavailable("kkt oracle: free constraint required");
  const int n = p.dim();
  Matrix S = Matrix::Zero(n, n);
  Vector c = Vector::Zero(n);
  for (const auto& f : p.components) {
    if (!f.is_quadratic()) throw OracleUnavailable("kkt oracle: quadratic components required");
    S += f.Q();
    c += f.c();
  }
  Eigen::FullPivLU<Matrix> lu(S);
  if (!lu.isInvertible()) throw OracleUnavailable("kkt oracle: singular normal system");
  KktSolution out;
  out.x = lu.solve(-c);
  out.residual = (S * out.x + c).norm() / std::max(1.0, c.norm());
  return out;
}

double iap_route_deviation(const SumProblem& p, const DelaySchedule& schedule,
                           double alpha, int steps, const Vector& x0,
                           const InnerSolveSettings& inner) {
  PrimalOptions opts;
  opts.stepsize = StepsizeRule::constant(alpha);
  opts.max_iterations = steps;
  opts.x0 = x0;
  opts.inner = inner;
  opts.record_iterates = true;

  Trace a = run_primal(p, PrimalAlgorithm::IAP, schedule, opts);
  Trace b = run_primal(p, PrimalAlgorithm::IAPDirect, schedule, opts);
  require(a.iterates.size() == b.iterates.size(), "route deviation: mismatched run lengths");
  double dev = 0.0;
  for (size_t k = 0; k < a.iterates.size(); ++k)
    dev = std::max(dev, (a.iterates[k] - b.iterates[k]).norm());
  return dev;
}

double admm_route_deviation(const SeparableProblem& p, double alpha, int steps,
                            const InnerSolveSettings& inner) {
  AdmmState plain = make_admm_state(p, inner);
  AdmmState scaled = make_admm_state(p, inner);
  double dev = 0.0;
  for (int k = 0; k < steps; ++k) {
    admm_step(p, plain, alpha, inner);
    scaled_admm_step(p, scaled, alpha, inner);
    double d = (plain.lambda - scaled.lambda).norm();
    for (int i = 0; i < p.m(); ++i) d = std::max(d, (plain.y[size_t(i)] - scaled.y[size_t(i)]).norm());
    dev = std::max(dev, d);
  }
  return dev;
}

}  // namespace iasolve
