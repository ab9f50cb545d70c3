#include "iasolve/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace iasolve {
namespace {

// Deterministic fingerprint digest (FNV-1a) so summaries stay short.
std::string digest(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::optional<RateFit> try_fit(const Trace& trace) {
  int burn_in = std::min(50, int(trace.rows.size()) / 4);
  try {
    return fit_rate(trace, burn_in);
  } catch (const SolverError&) {
    return std::nullopt;
  }
}

ExperimentResult run_primal_experiment(const ExperimentConfig& cfg) {
  SumProblem p = *cfg.sum;
  if (!p.known_opt && cfg.tol > 0.0) {
    try {
      p.known_opt = kkt_oracle(p).x;
    } catch (const SolverError&) {
      throw ConfigError(
          "stop.tol on a primal run needs a known optimum (x_star or a "
          "closed-form instance)");
    }
  }
  PrimalOptions opts;
  opts.stepsize = cfg.stepsize;
  opts.max_iterations = cfg.max_iterations;
  opts.err_tol = cfg.tol;
  opts.x0 = cfg.x0;
  opts.record_iterates = cfg.record_iterates;

  ExperimentResult out;
  out.trace = run_primal(p, primal_algorithm_from_tag(cfg.algorithm_tag), cfg.schedule, opts);
  return out;
}

ExperimentResult run_dual_experiment(const ExperimentConfig& cfg) {
  const SeparableProblem& p = *cfg.separable;
  DualOptions opts;
  opts.stepsize = cfg.dual_stepsize;
  opts.max_iterations = cfg.max_iterations;
  opts.residual_tol = cfg.tol;
  opts.record_iterates = cfg.record_iterates;
  try {
    opts.lambda_star = kkt_oracle(p).lambda;
  } catch (const SolverError&) {
    // No closed-form saddle point; the err column stays empty.
  }

  DualRunResult res =
      run_dual(p, dual_algorithm_from_tag(cfg.algorithm_tag), cfg.schedule, opts);
  ExperimentResult out;
  out.trace = std::move(res.trace);
  out.forced_diminishing = res.forced_diminishing;
  return out;
}

ExperimentResult run_multiplier_experiment(const ExperimentConfig& cfg) {
  MultiplierOptions opts = cfg.multiplier;
  if (opts.alpha.size() == 0) opts.alpha = Vector::Constant(1, 1.0);
  opts.max_iterations = cfg.max_iterations;
  opts.mu_change_tol = cfg.tol;
  opts.record_iterates = cfg.record_iterates;

  MultiplierAlgorithm algo = cfg.algorithm_tag == "exp_al" ? MultiplierAlgorithm::ExpAl
                                                           : MultiplierAlgorithm::IAALI;
  MultiplierRunResult res = run_multiplier(*cfg.separable, algo, cfg.schedule, opts);
  ExperimentResult out;
  out.trace = std::move(res.trace);
  return out;
}

ExperimentResult run_entropy_experiment(const ExperimentConfig& cfg) {
  EntropyOptions opts = cfg.entropy;
  if (cfg.stepsize.kind == StepsizeRule::Kind::Constant && cfg.stepsize.alpha > 0.0 &&
      opts.alpha <= 0.0 && !opts.per_coordinate)
    opts.alpha = cfg.stepsize.alpha;
  if (cfg.stepsize.is_diagonal() && !opts.per_coordinate)
    opts.per_coordinate = cfg.stepsize.alpha_vec;
  opts.max_iterations = cfg.max_iterations;
  opts.err_tol = cfg.tol;
  if (cfg.x0.size() > 0) opts.x0 = cfg.x0;
  opts.record_iterates = cfg.record_iterates;

  EntropyAlgorithm algo = EntropyAlgorithm::EntropyIAG;
  if (cfg.algorithm_tag == "entropy_iap") algo = EntropyAlgorithm::EntropyIAP;
  if (cfg.algorithm_tag == "proj_iag") algo = EntropyAlgorithm::ProjectedIAG;

  EntropyRunResult res = run_entropy(*cfg.sum, algo, cfg.schedule, opts);
  ExperimentResult out;
  out.trace = std::move(res.trace);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult out;
  switch (cfg.family) {
    case AlgorithmFamily::Primal: out = run_primal_experiment(cfg); break;
    case AlgorithmFamily::Dual: out = run_dual_experiment(cfg); break;
    case AlgorithmFamily::Multiplier: out = run_multiplier_experiment(cfg); break;
    case AlgorithmFamily::Entropy: out = run_entropy_experiment(cfg); break;
  }
  out.family = cfg.family;
  out.algorithm_tag = cfg.algorithm_tag;
  out.rate = try_fit(out.trace);
  return out;
}

int iterations_to_tolerance(const ExperimentResult& result, double tol) {
  if (tol <= 0.0) return -1;
  const bool dual = result.family == AlgorithmFamily::Dual;
  for (const auto& row : result.trace.rows) {
    double v = dual ? row.residual : row.err;
    if (std::isfinite(v) && v <= tol) return row.k;
  }
  return -1;
}

void write_experiment_artifacts(const ExperimentResult& result, const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  switch (result.family) {
    case AlgorithmFamily::Primal:
      write_primal_csv(result.trace, (dir / cfg.trace_name).string());
      break;
    case AlgorithmFamily::Dual:
      write_dual_csv(result.trace, (dir / cfg.trace_name).string());
      break;
    case AlgorithmFamily::Multiplier:
    case AlgorithmFamily::Entropy:
      write_multiplier_csv(result.trace, (dir / cfg.trace_name).string());
      break;
  }

  nlohmann::json j;
  j["algorithm"] = result.algorithm_tag;
  j["status"] = to_string(result.trace.status);
  j["iterations"] = result.trace.iterations;
  j["final_err"] = format_double(result.trace.final_err());
  j["final_obj"] = format_double(result.trace.final_obj());
  if (!result.trace.rows.empty())
    j["final_residual"] = format_double(result.trace.rows.back().residual);
  j["max_staleness"] = result.trace.max_staleness();
  j["iterations_to_tol"] = iterations_to_tolerance(result, cfg.tol);
  if (result.rate) {
    j["rho_hat"] = format_double(result.rate->rho_hat);
    j["r2"] = format_double(result.rate->r2);
  }
  if (result.family == AlgorithmFamily::Dual)
    j["forced_diminishing"] = result.forced_diminishing;
  j["problem_digest"] = digest(cfg.problem_fingerprint);

  std::ofstream out(dir / cfg.summary_name, std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace iasolve
