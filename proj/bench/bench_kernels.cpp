#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "iasolve/kernels.hpp"

namespace {

using iasolve::Matrix;
using iasolve::Vector;

Vector random_vector(std::mt19937_64& rng, int n) {
  Vector v(n);
  for (int j = 0; j < n; ++j) v[j] = double(rng() >> 11) * 0x1.0p-53 - 0.5;
  return v;
}

void bench_matvec(benchmark::State& state, bool parallel) {
  const int n = int(state.range(0));
  std::mt19937_64 rng(99);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i) M.row(i) = random_vector(rng, n).transpose();
  Vector x = random_vector(rng, n);
  Vector out(n);
  iasolve::kernels::set_parallel(parallel);
  for (auto _ : state) {
    iasolve::kernels::matvec(M, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  iasolve::kernels::set_parallel(true);
}

void bench_aggregate(benchmark::State& state, bool parallel) {
  const int n = int(state.range(0));
  std::mt19937_64 rng(7);
  std::vector<Vector> slots;
  for (int i = 0; i < 32; ++i) slots.push_back(random_vector(rng, n));
  Vector out(n);
  iasolve::kernels::set_parallel(parallel);
  for (auto _ : state) {
    iasolve::kernels::aggregate_sum(slots, out);
    benchmark::DoNotOptimize(out.data());
  }
  iasolve::kernels::set_parallel(true);
}

void bench_exp_scale(benchmark::State& state, bool parallel) {
  const int n = int(state.range(0));
  std::mt19937_64 rng(13);
  Vector x = random_vector(rng, n).cwiseAbs();
  Vector alpha = Vector::Constant(n, 0.05);
  Vector g = random_vector(rng, n);
  Vector out(n);
  iasolve::kernels::set_parallel(parallel);
  for (auto _ : state) {
    iasolve::kernels::exp_scale(x, alpha, g, out);
    benchmark::DoNotOptimize(out.data());
  }
  iasolve::kernels::set_parallel(true);
}

void matvec_serial(benchmark::State& s) { bench_matvec(s, false); }
void matvec_parallel(benchmark::State& s) { bench_matvec(s, true); }
void aggregate_serial(benchmark::State& s) { bench_aggregate(s, false); }
void aggregate_parallel(benchmark::State& s) { bench_aggregate(s, true); }
void exp_scale_serial(benchmark::State& s) { bench_exp_scale(s, false); }
void exp_scale_parallel(benchmark::State& s) { bench_exp_scale(s, true); }

}  // namespace

BENCHMARK(matvec_serial)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(matvec_parallel)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(aggregate_serial)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(aggregate_parallel)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(exp_scale_serial)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(exp_scale_parallel)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
