#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "iasolve/builtin.hpp"
#include "iasolve/component.hpp"
#include "iasolve/constraint.hpp"
#include "iasolve/delay.hpp"
#include "iasolve/kernels.hpp"
#include "iasolve/penalty.hpp"
#include "iasolve/primal.hpp"
#include "iasolve/prox.hpp"
#include "iasolve/quadratic_model.hpp"
#include "iasolve/trace.hpp"
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

double rand_u(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

Vector random_vector(int n, std::mt19937_64& rng) {
  Vector v(n);
  for (int j = 0; j < n; ++j) v[j] = 2.0 * rand_u(rng) - 1.0;
  return v;
}

}  // namespace

TEST_CASE("constraint sets project and report membership") {
  ConstraintSet F = ConstraintSet::free();
  Vector x = vec({-1.0, 2.0, 0.0});
  CHECK(F.is_free());
  CHECK((F.project(x) - x).norm() == 0.0);
  CHECK(F.contains(x));

  ConstraintSet P = ConstraintSet::nonnegative();
  Vector px = P.project(x);
  CHECK(px[0] == 0.0);
  CHECK(px[1] == 2.0);
  CHECK(px[2] == 0.0);
  CHECK(!P.contains(x));
  CHECK(P.contains(px));
  CHECK(P.contains(vec({-1e-9, 0.0, 0.0}), 1e-8));

  ConstraintSet B = ConstraintSet::box(vec({0.0, -1.0}), vec({1.0, 1.0}));
  Vector bx = B.project(vec({2.0, -3.0}));
  CHECK(bx[0] == 1.0);
  CHECK(bx[1] == -1.0);
  CHECK(B.contains(bx));
  CHECK(!B.contains(vec({0.5, 1.5})));
}

TEST_CASE("box constraint rejects inverted bounds") {
  CHECK_THROWS_AS(ConstraintSet::box(vec({1.0}), vec({0.0})), InvalidProblem);
  CHECK_THROWS_AS(ConstraintSet::box(vec({0.0, 0.0}), vec({1.0})), InvalidProblem);
}

TEST_CASE("quadratic component matches closed forms") {
  Matrix Q(2, 2);
  Q << 1.0, 0.0, 0.0, 4.0;
  Vector c = vec({1.0, -2.0});
  ComponentFunction f = ComponentFunction::quadratic(Q, c, 3.0);

  CHECK(f.dim() == 2);
  CHECK(f.is_quadratic());
  CHECK(f.has_gradient());
  CHECK(f.prox_available());

  Vector x = vec({2.0, -1.0});
  // 1/2 x'Qx + c'x + d = 1/2(4 + 4) + (2 + 2) + 3 = 11
  CHECK(f.evaluate(x) == doctest::Approx(11.0).epsilon(1e-14));
  Vector g = f.gradient(x);
  CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-14));   // x1 + 1
  CHECK(g[1] == doctest::Approx(-6.0).epsilon(1e-14));  // 4 x2 - 2
  // Largest eigenvalue of Q.
  CHECK(f.lipschitz() == doctest::Approx(4.0).epsilon(1e-8));

  Matrix bad(2, 2);
  bad << 1.0, 0.5, 0.0, 1.0;  // not symmetric
  CHECK_THROWS_AS(ComponentFunction::quadratic(bad, c), InvalidProblem);
  CHECK_THROWS_AS(f.evaluate(vec({1.0})), InvalidProblem);
}

TEST_CASE("callback component gradients agree with finite differences") {
  auto value = [](const Vector& x) { return std::log(1.0 + x.squaredNorm()); };
  auto gradient = [](const Vector& x) {
    return Vector(2.0 * x / (1.0 + x.squaredNorm()));
  };
  ComponentFunction f = ComponentFunction::callback(3, value, gradient);

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x = random_vector(3, rng);
    Vector g = f.gradient(x);
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Vector xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      double fd = (f.evaluate(xp) - f.evaluate(xm)) / (2.0 * h);
      CHECK(g[j] == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  ComponentFunction with_override = ComponentFunction::callback(3, value, gradient, 7.5);
  CHECK(with_override.lipschitz() == 7.5);

  // Estimated Lipschitz constant of a quadratic callback is close to the top
  // curvature (power iteration on the finite-difference Hessian).
  auto qv = [](const Vector& x) {
    return 0.5 * (x[0] * x[0] + 2.0 * x[1] * x[1] + 3.0 * x[2] * x[2]);
  };
  auto qg = [](const Vector& x) { return Vector(vec({x[0], 2.0 * x[1], 3.0 * x[2]})); };
  ComponentFunction q = ComponentFunction::callback(3, qv, qg);
  CHECK(q.lipschitz() == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("nonsmooth component exposes subgradients only") {
  auto value = [](const Vector& x) { return x.cwiseAbs().sum(); };
  auto sub = [](const Vector& x) {
    Vector s(x.size());
    for (int j = 0; j < x.size(); ++j) s[j] = x[j] > 0 ? 1.0 : (x[j] < 0 ? -1.0 : 0.0);
    return s;
  };
  ComponentFunction f = ComponentFunction::nonsmooth(2, value, sub);
  CHECK(!f.has_gradient());
  CHECK(f.lipschitz() == 0.0);
  Vector s = f.subgradient(vec({-2.0, 3.0}));
  CHECK(s[0] == -1.0);
  CHECK(s[1] == 1.0);
}

TEST_CASE("penalty specs satisfy conjugacy and inverse-gradient identities") {
  for (PenaltySpec spec : {PenaltySpec::exponential(), PenaltySpec::quadratic()}) {
    CHECK(spec.psi(0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(spec.dpsi(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (double s : {-1.5, -0.3, 0.0, 0.4, 1.2, 2.5}) {
      double t = spec.dpsi(s);
      if (spec.kind == PenaltyKind::Exponential) CHECK(t > 0.0);
      CHECK(spec.d2psi(s) > 0.0);
      // Fenchel equality at the gradient point: psi*(psi'(s)) = s psi'(s) - psi(s).
      CHECK(spec.conj(t) == doctest::Approx(s * t - spec.psi(s)).epsilon(1e-12));
      // (psi*)' inverts psi'.
      CHECK(spec.dconj(t) == doctest::Approx(s).epsilon(1e-12));
      // Finite-difference check of the derivatives.
      const double h = 1e-6;
      CHECK(spec.dpsi(s) ==
            doctest::Approx((spec.psi(s + h) - spec.psi(s - h)) / (2 * h)).epsilon(1e-6));
      CHECK(spec.d2psi(s) ==
            doctest::Approx((spec.dpsi(s + h) - spec.dpsi(s - h)) / (2 * h)).epsilon(1e-6));
    }
  }

  PenaltySpec e = PenaltySpec::exponential();
  CHECK(e.psi(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
  CHECK(e.conj(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::isinf(e.conj(-0.5)));

  PenaltySpec qd = PenaltySpec::quadratic();
  CHECK(qd.psi(2.0) == doctest::Approx(4.0).epsilon(1e-15));       // s + s^2/2
  CHECK(qd.conj(3.0) == doctest::Approx(2.0).epsilon(1e-15));      // (t-1)^2/2
  CHECK(qd.dconj(3.0) == doctest::Approx(2.0).epsilon(1e-15));     // t-1

  // Numeric conjugate: dense maximization of s*t - psi(s) agrees with conj.
  for (double t : {0.5, 1.0, 2.0}) {
    double best = -1e300;
    for (double s = -6.0; s <= 6.0; s += 1e-4) {
      best = std::max(best, s * t - e.psi(s));
    }
    CHECK(e.conj(t) == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("safe_exp clamps at the overflow threshold") {
  bool clamped = false;
  CHECK(safe_exp(1.0, &clamped) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(!clamped);
  double big = safe_exp(900.0, &clamped);
  CHECK(clamped);
  CHECK(big == doctest::Approx(std::exp(kExpClamp)).epsilon(1e-12));
  CHECK(std::isfinite(big));
  clamped = false;
  double tiny = safe_exp(-900.0, &clamped);
  CHECK(clamped);
  CHECK(tiny == doctest::Approx(std::exp(-kExpClamp)).epsilon(1e-12));
}

TEST_CASE("kernels: serial and parallel paths are bit-identical") {
  const bool prior = kernels::parallel_enabled();
  kernels::set_parallel(true);

  std::mt19937_64 rng(2024);
  const int n = 3 * kernels::kParallelThreshold / 2;  // above the threshold

  Matrix M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = 2.0 * rand_u(rng) - 1.0;
  Vector x = random_vector(n, rng);

  Vector out_serial, out_parallel;
  kernels::matvec_serial(M, x, out_serial);
  kernels::matvec(M, x, out_parallel);
  REQUIRE(out_serial.size() == n);
  for (int j = 0; j < n; ++j) CHECK(out_serial[j] == out_parallel[j]);

  std::vector<Vector> slots;
  for (int i = 0; i < 9; ++i) slots.push_back(random_vector(n, rng));
  Vector agg_serial, agg_parallel;
  kernels::aggregate_sum_serial(slots, agg_serial);
  kernels::aggregate_sum(slots, agg_parallel);
  for (int j = 0; j < n; ++j) CHECK(agg_serial[j] == agg_parallel[j]);

  Vector pos = x.cwiseAbs().array() + 0.1;
  Vector alpha = Vector::Constant(n, 0.3);
  Vector g = random_vector(n, rng);
  g[5] = -1e6;  // forces the exponent clamp on one coordinate
  Vector es, ep;
  bool cs = kernels::exp_scale_serial(pos, alpha, g, es);
  bool cp = kernels::exp_scale(pos, alpha, g, ep);
  CHECK(cs == cp);
  CHECK(cs);
  for (int j = 0; j < n; ++j) CHECK(es[j] == ep[j]);

  std::vector<double> res(400, 0.0);
  kernels::parallel_blocks(int(res.size()), [&](int i) { res[i] = std::sqrt(double(i)); });
  for (int i = 0; i < int(res.size()); ++i) CHECK(res[i] == std::sqrt(double(i)));

  kernels::set_parallel(prior);
}

TEST_CASE("prox matches hand-computed values") {
  // f(x) = 1/2 x^2: prox_alpha(z) = z / (1 + alpha).
  ComponentFunction half_sq = ComponentFunction::quadratic(mat1(1.0), vec({0.0}));
  Vector p = prox(half_sq, vec({2.0}), 1.0, ConstraintSet::free());
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-12));

  // f(x) = 1/2 (x-2)^2: prox_alpha(z) = (z + 2 alpha) / (1 + alpha).
  ComponentFunction shifted = ComponentFunction::quadratic(mat1(1.0), vec({-2.0}), 2.0);
  Vector p2 = prox(shifted, vec({1.0}), 2.0, ConstraintSet::free());
  CHECK(p2[0] == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  Vector p3 = prox(shifted, vec({1.0}), 0.5, ConstraintSet::free());
  CHECK(p3[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // Constrained prox pins the unconstrained minimizer to the boundary:
  // f(x) = 1/2 (x+3)^2 over x >= 0, any z <= 0 maps to 0.
  ComponentFunction up = ComponentFunction::quadratic(mat1(1.0), vec({3.0}), 4.5);
  Vector p4 = prox(up, vec({0.0}), 1.0, ConstraintSet::nonnegative());
  CHECK(std::abs(p4[0]) <= 1e-9);
}

TEST_CASE("prox is nonexpansive and the diagonal metric reduces to scalar") {
  std::mt19937_64 rng(7);
  Matrix B(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) B(r, c) = 2.0 * rand_u(rng) - 1.0;
  Matrix Q = B.transpose() * B + 0.5 * Matrix::Identity(4, 4);
  Q = 0.5 * (Q + Q.transpose());
  ComponentFunction f = ComponentFunction::quadratic(Q, random_vector(4, rng));
  ConstraintSet X = ConstraintSet::nonnegative();

  for (int trial = 0; trial < 10; ++trial) {
    Vector z1 = random_vector(4, rng);
    Vector z2 = random_vector(4, rng);
    Vector p1 = prox(f, z1, 0.7, X);
    Vector p2 = prox(f, z2, 0.7, X);
    CHECK((p1 - p2).norm() <= (z1 - z2).norm() + 1e-8);
  }

  Vector z = random_vector(4, rng);
  Vector scalar_p = prox(f, z, 0.3, X);
  Vector diag_p = prox_diag(f, z, Vector::Constant(4, 0.3), X);
  CHECK((scalar_p - diag_p).norm() <= 1e-8);
}

TEST_CASE("linearized prox agrees with the closed-form optimality system") {
  std::mt19937_64 rng(31);
  Matrix B(3, 3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) B(r, c) = 2.0 * rand_u(rng) - 1.0;
  Matrix Q = B.transpose() * B + Matrix::Identity(3, 3);
  Q = 0.5 * (Q + Q.transpose());
  Vector c = random_vector(3, rng);
  ComponentFunction f = ComponentFunction::quadratic(Q, c);

  Vector x_ref = random_vector(3, rng);
  Vector s = random_vector(3, rng);
  const double alpha = 0.4;
  Vector got = linearized_prox(f, x_ref, s, alpha, ConstraintSet::free());

  // Stationarity: (Q + I/alpha) x = x_ref/alpha - c - s.
  Matrix A = Q + Matrix::Identity(3, 3) / alpha;
  Vector rhs = x_ref / alpha - c - s;
  Vector expect = A.ldlt().solve(rhs);
  CHECK((got - expect).norm() <= 1e-10);
}

TEST_CASE("quadratic inner solver handles constrained minimization") {
  QuadraticModel model;
  model.Q = Matrix::Zero(2, 2);
  model.Q(0, 0) = 1.0;
  model.Q(1, 1) = 2.0;
  model.c = vec({1.0, -2.0});
  ConstraintSet X = ConstraintSet::nonnegative();
  Vector x = minimize_quadratic(model, X, vec({1.0, 1.0}));
  // Coordinate problems: x1 minimizes 1/2 x^2 + x over x>=0 -> 0;
  // x2 minimizes x^2 - 2x -> 1.
  CHECK(std::abs(x[0]) <= 1e-8);
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(first_order_residual(model, X, x) <= 1e-8);
}

TEST_CASE("format_double round-trips every value bit-exactly") {
  const double values[] = {1.0 / 3.0,
                           3.141592653589793,
                           1e-300,
                           2.2250738585072014e-308,
                           4.9e-324,
                           123456789.123456789,
                           -0.0,
                           0.0,
                           1e308,
                           -2.5};
  for (double v : values) {
    std::string s = format_double(v);
    double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
    if (v == 0.0) CHECK(std::signbit(back) == std::signbit(v));
  }
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("trace CSV row count equals iterations plus one") {
  SumProblem p = builtin::quadratic_mean();
  PrimalOptions opt;
  opt.stepsize = StepsizeRule::constant(0.05);
  opt.max_iterations = 40;
  Trace t = run_primal(p, PrimalAlgorithm::IAG, DelaySchedule::last_update(), opt);

  CHECK(t.status == RunStatus::MaxIterations);
  CHECK(t.iterations == 40);
  REQUIRE(int(t.rows.size()) == t.iterations + 1);
  CHECK(t.rows.back().i == -1);
  CHECK(t.rows.back().alpha == 0.0);

  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "iasolve_test_core_trace.csv";
  write_primal_csv(t, path.string());
  std::ifstream in(path);
  REQUIRE(in.good());
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == t.iterations + 1 + 1);  // header + one row per iterate
  fs::remove(path);
}

TEST_CASE("delay schedules report the staleness bound seen at table reads") {
  CHECK(DelaySchedule::zero_delay().effective_bound(5) == 0);
  CHECK(DelaySchedule::fixed_delay(4).effective_bound(5) == 4);
  CHECK(DelaySchedule::uniform_random(7, 1).effective_bound(5) == 7);
  CHECK(DelaySchedule::last_update().effective_bound(5) == 4);
  CHECK(!DelaySchedule::last_update(SelectionRule::Random, 3).effective_bound(5).has_value());
  CHECK_THROWS_AS(DelaySchedule::fixed_delay(-1), InvalidProblem);
  CHECK_THROWS_AS(DelaySchedule::uniform_random(-2, 0), InvalidProblem);
}

TEST_CASE("delay engine plans stay in range and replay deterministically") {
  const int m = 4;

  DelayEngine zero(DelaySchedule::zero_delay(), m);
  DelayEngine fixed(DelaySchedule::fixed_delay(3), m);
  DelayEngine uni_a(DelaySchedule::uniform_random(2, 42), m);
  DelayEngine uni_b(DelaySchedule::uniform_random(2, 42), m);
  DelayEngine last(DelaySchedule::last_update(), m);

  for (int k = 0; k < 60; ++k) {
    auto pz = zero.plan(k);
    REQUIRE(pz.has_value());
    for (int l : *pz) CHECK(l == k);

    auto pf = fixed.plan(k);
    REQUIRE(pf.has_value());
    for (int l : *pf) CHECK(l == std::max(0, k - 3));

    auto pa = uni_a.plan(k);
    auto pb = uni_b.plan(k);
    REQUIRE(pa.has_value());
    REQUIRE(pb.has_value());
    REQUIRE(pa->size() == std::size_t(m));
    for (int i = 0; i < m; ++i) {
      CHECK((*pa)[i] >= std::max(0, k - 2));
      CHECK((*pa)[i] <= k);
      CHECK((*pa)[i] == (*pb)[i]);  // same seed, same draws
    }

    CHECK(!last.plan(k).has_value());
  }

  // Cyclic selection is k mod m; random selection replays under one seed and
  // must be driven in iteration order.
  DelayEngine cyc(DelaySchedule::last_update(), m);
  for (int k = 0; k < 12; ++k) CHECK(cyc.select(k) == k % m);

  DelayEngine rnd_a(DelaySchedule::last_update(SelectionRule::Random, 5), m);
  DelayEngine rnd_b(DelaySchedule::last_update(SelectionRule::Random, 5), m);
  for (int k = 0; k < 30; ++k) {
    int ia = rnd_a.select(k);
    CHECK(ia >= 0);
    CHECK(ia < m);
    CHECK(ia == rnd_b.select(k));
  }
  CHECK_THROWS_AS(rnd_a.select(35), InvalidProblem);
}

TEST_CASE("gradient table stamps, staleness, and drift control") {
  const int m = 6, dim = 4;
  GradientTable table(m, dim);
  table.initialize([&](int i) { return Vector::Constant(dim, double(i)); }, 0);

  CHECK(table.m() == m);
  CHECK(table.dim() == dim);
  for (int i = 0; i < m; ++i) CHECK(table.stamp(i) == 0);
  // Aggregate of constants 0..5 is 15 per coordinate.
  CHECK((table.aggregate() - Vector::Constant(dim, 15.0)).norm() <= 1e-14);
  CHECK((table.aggregate_excluding(2) - Vector::Constant(dim, 13.0)).norm() <= 1e-14);

  table.refresh(2, Vector::Constant(dim, 10.0), 5);
  CHECK(table.stamp(2) == 5);
  CHECK((table.aggregate() - Vector::Constant(dim, 23.0)).norm() <= 1e-12);
  std::vector<int> st = table.staleness(7);
  CHECK(st[0] == 7);
  CHECK(st[2] == 2);
  CHECK(table.max_staleness(7) == 7);

  // Long refresh streams: the incremental aggregate stays within 1e-12 of
  // the exact fixed-order sum thanks to periodic recomputation.
  std::mt19937_64 rng(555);
  for (int step = 0; step < 5000; ++step) {
    int i = int(rng() % std::uint64_t(m));
    table.refresh(i, random_vector(dim, rng) * 100.0, step);
  }
  CHECK((table.aggregate() - table.recompute_aggregate()).norm() <= 1e-12);
}

TEST_CASE("sum problem accessors on the built-in mean instance") {
  SumProblem p = builtin::quadratic_mean();
  CHECK(p.m() == 10);
  CHECK(p.dim() == 5);
  CHECK(p.lipschitz_sum() == doctest::Approx(10.0).epsilon(1e-9));
  REQUIRE(p.sigma.has_value());
  CHECK(*p.sigma == doctest::Approx(10.0).epsilon(1e-9));
  REQUIRE(p.known_opt.has_value());

  // grad F at the known optimum vanishes, and F(x*) <= F(x) nearby.
  Vector xs = *p.known_opt;
  CHECK(p.gradient(xs).norm() <= 1e-10);
  std::mt19937_64 rng(123);
  for (int t = 0; t < 5; ++t) {
    Vector x = xs + 0.1 * random_vector(5, rng);
    CHECK(p.evaluate(x) >= p.evaluate(xs) - 1e-12);
    // Componentwise gradient sum matches the problem-level gradient.
    Vector g = Vector::Zero(5);
    for (const auto& f : p.components) g += f.gradient(x);
    CHECK((g - p.gradient(x)).norm() <= 1e-12);
  }
}
