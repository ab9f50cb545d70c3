#include "iasolve/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "iasolve/builtin.hpp"

namespace iasolve {
namespace {

using nlohmann::json;

std::string path_join(const std::string& ctx, const std::string& key) {
  return ctx.empty() ? key : ctx + "." + key;
}

const json& need(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object())
    throw ConfigError(ctx.empty() ? "config root must be an object"
                                  : ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing field '" + path_join(ctx, key) + "'");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

std::uint64_t as_seed(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    throw ConfigError(where + ": expected a nonnegative integer seed");
  auto v = j.get<std::int64_t>();
  if (v < 0) throw ConfigError(where + ": expected a nonnegative integer seed");
  return std::uint64_t(v);
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Vector v(j.size());
  for (size_t t = 0; t < j.size(); ++t)
    v[Eigen::Index(t)] = as_number(j[t], where + "[" + std::to_string(t) + "]");
  return v;
}

Matrix as_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + ": expected a nonempty array of rows");
  size_t cols = 0;
  Matrix M;
  for (size_t rix = 0; rix < j.size(); ++rix) {
    Vector row = as_vector(j[rix], where + "[" + std::to_string(rix) + "]");
    if (rix == 0) {
      cols = size_t(row.size());
      M.resize(Eigen::Index(j.size()), Eigen::Index(cols));
    } else if (size_t(row.size()) != cols) {
      throw ConfigError(where + ": rows have inconsistent lengths");
    }
    M.row(Eigen::Index(rix)) = row.transpose();
  }
  return M;
}

ConstraintSet parse_constraint(const json& j, const std::string& ctx) {
  std::string kind = as_string(need(j, "kind", ctx), path_join(ctx, "kind"));
  if (kind == "free") return ConstraintSet::free();
  if (kind == "nonnegative_orthant") return ConstraintSet::nonnegative();
  if (kind == "box")
    return ConstraintSet::box(as_vector(need(j, "lo", ctx), path_join(ctx, "lo")),
                              as_vector(need(j, "hi", ctx), path_join(ctx, "hi")));
  throw ConfigError(path_join(ctx, "kind") + ": unknown constraint kind '" + kind + "'");
}

ComponentFunction parse_quadratic(const json& j, const std::string& ctx) {
  Matrix Q = as_matrix(need(j, "Q", ctx), path_join(ctx, "Q"));
  Vector c = as_vector(need(j, "c", ctx), path_join(ctx, "c"));
  double d = j.contains("d") ? as_number(j.at("d"), path_join(ctx, "d")) : 0.0;
  try {
    return ComponentFunction::quadratic(std::move(Q), std::move(c), d);
  } catch (const SolverError& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

SumProblem parse_sum(const json& j, const std::string& ctx) {
  SumProblem p;
  const json& comps = need(j, "components", ctx);
  if (!comps.is_array() || comps.empty())
    throw ConfigError(path_join(ctx, "components") + ": expected a nonempty array");
  for (size_t i = 0; i < comps.size(); ++i)
    p.components.push_back(
        parse_quadratic(comps[i], path_join(ctx, "components[" + std::to_string(i) + "]")));
  p.constraint = j.contains("constraint")
                     ? parse_constraint(j.at("constraint"), path_join(ctx, "constraint"))
                     : ConstraintSet::free();
  if (j.contains("sigma")) p.sigma = as_number(j.at("sigma"), path_join(ctx, "sigma"));
  if (j.contains("x_star")) p.known_opt = as_vector(j.at("x_star"), path_join(ctx, "x_star"));
  return p;
}

SeparableProblem parse_separable(const json& j, const std::string& ctx) {
  SeparableProblem p;
  std::string coupling = j.contains("coupling")
                             ? as_string(j.at("coupling"), path_join(ctx, "coupling"))
                             : std::string("equality");
  if (coupling == "equality") p.coupling = CouplingKind::Equality;
  else if (coupling == "inequality") p.coupling = CouplingKind::Inequality;
  else throw ConfigError(path_join(ctx, "coupling") + ": unknown coupling '" + coupling + "'");

  const json& blocks = need(j, "blocks", ctx);
  if (!blocks.is_array() || blocks.empty())
    throw ConfigError(path_join(ctx, "blocks") + ": expected a nonempty array");
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string bctx = path_join(ctx, "blocks[" + std::to_string(i) + "]");
    const json& bj = blocks[i];
    SeparableBlock blk;
    blk.h = parse_quadratic(bj, bctx);
    blk.A = as_matrix(need(bj, "A", bctx), path_join(bctx, "A"));
    blk.b = as_vector(need(bj, "b", bctx), path_join(bctx, "b"));
    blk.Y = bj.contains("constraint")
                ? parse_constraint(bj.at("constraint"), path_join(bctx, "constraint"))
                : ConstraintSet::free();
    p.blocks.push_back(std::move(blk));
  }
  return p;
}

void parse_builtin(const std::string& name, const json& j, ExperimentConfig& cfg,
                   const std::string& ctx) {
  auto seed = [&](std::uint64_t fallback) {
    return j.contains("seed") ? as_seed(j.at("seed"), path_join(ctx, "seed")) : fallback;
  };
  auto dims = [&] {
    return std::pair<int, int>(as_int(need(j, "m", ctx), path_join(ctx, "m")),
                               as_int(need(j, "n", ctx), path_join(ctx, "n")));
  };
  if (name == "quadratic_mean") cfg.sum = builtin::quadratic_mean(seed(12345));
  else if (name == "quadratic_mean_orthant") cfg.sum = builtin::quadratic_mean_orthant(seed(12345));
  else if (name == "random_quadratic") {
    auto [m, n] = dims();
    cfg.sum = builtin::random_quadratic(m, n, seed(1));
  } else if (name == "random_quadratic_orthant") {
    auto [m, n] = dims();
    cfg.sum = builtin::random_quadratic_orthant(m, n, seed(1));
  } else if (name == "flat_direction") cfg.sum = builtin::flat_direction();
  else if (name == "orthant_strict_complementarity")
    cfg.sum = builtin::orthant_strict_complementarity();
  else if (name == "symmetric_two_block") cfg.separable = builtin::symmetric_two_block();
  else if (name == "mixed_row_two_block") cfg.separable = builtin::mixed_row_two_block();
  else if (name == "dense_two_block") cfg.separable = builtin::dense_two_block(seed(7));
  else if (name == "single_block") cfg.separable = builtin::single_block(seed(3));
  else if (name == "scalar_inequality") cfg.separable = builtin::scalar_inequality();
  else if (name == "two_block_inequality") cfg.separable = builtin::two_block_inequality();
  else throw ConfigError(path_join(ctx, "builtin") + ": unknown builtin problem '" + name + "'");
}

DelaySchedule parse_schedule(const json& j, const std::string& ctx) {
  DelaySchedule s;
  std::string policy = as_string(need(j, "policy", ctx), path_join(ctx, "policy"));
  if (policy == "last_update") s.policy = DelayPolicy::LastUpdate;
  else if (policy == "zero_delay") s.policy = DelayPolicy::ZeroDelay;
  else if (policy == "fixed_delay") s.policy = DelayPolicy::FixedDelay;
  else if (policy == "uniform_random") s.policy = DelayPolicy::UniformRandom;
  else throw ConfigError(path_join(ctx, "policy") + ": unknown policy '" + policy + "'");

  if (s.policy == DelayPolicy::FixedDelay)
    s.d = as_int(need(j, "d", ctx), path_join(ctx, "d"));
  if (s.policy == DelayPolicy::UniformRandom) {
    s.b = as_int(need(j, "b", ctx), path_join(ctx, "b"));
    s.seed = j.contains("seed") ? as_seed(j.at("seed"), path_join(ctx, "seed")) : 0;
  }
  if (j.contains("selection")) {
    std::string sel = as_string(j.at("selection"), path_join(ctx, "selection"));
    if (sel == "cyclic") s.selection = SelectionRule::Cyclic;
    else if (sel == "random") s.selection = SelectionRule::Random;
    else throw ConfigError(path_join(ctx, "selection") + ": unknown rule '" + sel + "'");
  }
  if (j.contains("selection_seed"))
    s.selection_seed = as_seed(j.at("selection_seed"), path_join(ctx, "selection_seed"));
  return s;
}

}  // namespace

AlgorithmFamily family_of_tag(const std::string& tag) {
  for (const char* t : {"is", "ip", "ias", "iag", "iap", "iap_direct"})
    if (tag == t) return AlgorithmFamily::Primal;
  for (const char* t : {"iadg", "ial", "iaal", "iaal_cycle", "admm", "admm_scaled"})
    if (tag == t) return AlgorithmFamily::Dual;
  for (const char* t : {"exp_al", "iaali"})
    if (tag == t) return AlgorithmFamily::Multiplier;
  for (const char* t : {"entropy_iap", "entropy_iag", "proj_iag"})
    if (tag == t) return AlgorithmFamily::Entropy;
  throw ConfigError("unknown algorithm tag '" + tag + "'");
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.algorithm_tag = as_string(need(j, "algorithm", ""), "algorithm");
  cfg.family = family_of_tag(cfg.algorithm_tag);

  const json& pj = need(j, "problem", "");
  cfg.problem_fingerprint = pj.dump();
  if (pj.contains("builtin")) {
    parse_builtin(as_string(pj.at("builtin"), "problem.builtin"), pj, cfg, "problem");
  } else {
    std::string type = as_string(need(pj, "type", "problem"), "problem.type");
    if (type == "sum") cfg.sum = parse_sum(pj, "problem");
    else if (type == "separable") cfg.separable = parse_separable(pj, "problem");
    else throw ConfigError("problem.type: expected 'sum' or 'separable'");
  }

  const bool needs_sum =
      cfg.family == AlgorithmFamily::Primal || cfg.family == AlgorithmFamily::Entropy;
  if (needs_sum && !cfg.sum)
    throw ConfigError("algorithm '" + cfg.algorithm_tag + "' needs an additive sum problem");
  if (!needs_sum && !cfg.separable)
    throw ConfigError("algorithm '" + cfg.algorithm_tag + "' needs a separable problem");

  if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"), "schedule");

  if (j.contains("stepsize")) {
    const json& sj = j.at("stepsize");
    std::string rule = sj.contains("rule") ? as_string(sj.at("rule"), "stepsize.rule")
                                           : std::string("constant");
    if (rule == "constant") {
      if (sj.contains("per_coordinate"))
        cfg.stepsize =
            StepsizeRule::diagonal(as_vector(sj.at("per_coordinate"), "stepsize.per_coordinate"));
      else
        cfg.stepsize = StepsizeRule::constant(
            as_number(need(sj, "alpha", "stepsize"), "stepsize.alpha"));
      if (cfg.stepsize.kind == StepsizeRule::Kind::Constant)
        cfg.dual_stepsize = DualStepsizeRule::constant(cfg.stepsize.alpha);
    } else if (rule == "diminishing") {
      double a0 = as_number(need(sj, "alpha0", "stepsize"), "stepsize.alpha0");
      cfg.stepsize = StepsizeRule::diminishing(a0);
      cfg.dual_stepsize = DualStepsizeRule::diminishing(a0);
    } else {
      throw ConfigError("stepsize.rule: unknown rule '" + rule + "'");
    }
  }

  if (j.contains("multiplier")) {
    const json& mj = j.at("multiplier");
    if (mj.contains("alpha")) {
      if (mj.at("alpha").is_array()) cfg.multiplier.alpha = as_vector(mj.at("alpha"), "multiplier.alpha");
      else cfg.multiplier.alpha = Vector::Constant(1, as_number(mj.at("alpha"), "multiplier.alpha"));
    }
    if (mj.contains("penalty")) {
      std::string pen = as_string(mj.at("penalty"), "multiplier.penalty");
      if (pen == "exponential") cfg.multiplier.penalty = PenaltySpec::exponential();
      else if (pen == "quadratic") cfg.multiplier.penalty = PenaltySpec::quadratic();
      else throw ConfigError("multiplier.penalty: unknown penalty '" + pen + "'");
    }
    if (mj.contains("mu0")) cfg.multiplier.mu0 = as_vector(mj.at("mu0"), "multiplier.mu0");
  }

  if (j.contains("entropy")) {
    const json& ej = j.at("entropy");
    if (ej.contains("alpha")) cfg.entropy.alpha = as_number(ej.at("alpha"), "entropy.alpha");
    if (ej.contains("per_coordinate"))
      cfg.entropy.per_coordinate = as_vector(ej.at("per_coordinate"), "entropy.per_coordinate");
    if (ej.contains("heuristic"))
      cfg.entropy.use_heuristic = ej.at("heuristic").is_boolean()
                                      ? ej.at("heuristic").get<bool>()
                                      : throw ConfigError("entropy.heuristic: expected a boolean");
    if (ej.contains("delta"))
      cfg.entropy.heuristic_delta = as_number(ej.at("delta"), "entropy.delta");
    if (ej.contains("refresh"))
      cfg.entropy.heuristic_refresh = as_int(ej.at("refresh"), "entropy.refresh");
    if (ej.contains("penalty")) {
      std::string pen = as_string(ej.at("penalty"), "entropy.penalty");
      if (pen == "exponential") cfg.entropy.penalty = PenaltySpec::exponential();
      else if (pen == "quadratic") cfg.entropy.penalty = PenaltySpec::quadratic();
      else throw ConfigError("entropy.penalty: unknown penalty '" + pen + "'");
    }
  }

  if (j.contains("stop")) {
    const json& tj = j.at("stop");
    if (tj.contains("max_iterations"))
      cfg.max_iterations = as_int(tj.at("max_iterations"), "stop.max_iterations");
    if (tj.contains("tol")) cfg.tol = as_number(tj.at("tol"), "stop.tol");
    if (cfg.max_iterations < 0) throw ConfigError("stop.max_iterations: must be nonnegative");
    if (cfg.tol < 0.0) throw ConfigError("stop.tol: must be nonnegative");
  }

  if (j.contains("x0")) cfg.x0 = as_vector(j.at("x0"), "x0");
  if (j.contains("record_iterates")) {
    if (!j.at("record_iterates").is_boolean())
      throw ConfigError("record_iterates: expected a boolean");
    cfg.record_iterates = j.at("record_iterates").get<bool>();
  }

  if (j.contains("output")) {
    const json& oj = j.at("output");
    if (oj.contains("trace")) cfg.trace_name = as_string(oj.at("trace"), "output.trace");
    if (oj.contains("summary")) cfg.summary_name = as_string(oj.at("summary"), "output.summary");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<int> max_iter, std::optional<double> tol) {
  if (seed) {
    cfg.schedule.seed = *seed;
    cfg.schedule.selection_seed = *seed + 1;
  }
  if (max_iter) {
    if (*max_iter < 0) throw ConfigError("--max-iter: must be nonnegative");
    cfg.max_iterations = *max_iter;
  }
  if (tol) {
    if (*tol < 0.0) throw ConfigError("--tol: must be nonnegative");
    cfg.tol = *tol;
  }
}

}  // namespace iasolve
