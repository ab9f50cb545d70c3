#include "iasolve/kernels.hpp"

#include <atomic>
#include <cmath>
#include <exception>

#include "iasolve/penalty.hpp"

namespace iasolve::kernels {

namespace {
bool g_parallel = true;
bool use_parallel(long elements) {
#ifdef _OPENMP
  return g_parallel && elements >= kParallelThreshold;
#else
  (void)elements;
  return false;
#endif
}
}  // namespace

void set_parallel(bool enabled) { g_parallel = enabled; }
bool parallel_enabled() { return g_parallel; }

void matvec_serial(const Matrix& M, const Vector& x, Vector& out) {
  const long rows = M.rows();
  out.resize(rows);
  for (long i = 0; i < rows; ++i) out[i] = M.row(i).dot(x);
}

void matvec(const Matrix& M, const Vector& x, Vector& out) {
  const long rows = M.rows();
  if (!use_parallel(rows * M.cols())) {
    matvec_serial(M, x, out);
    return;
  }
  out.resize(rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long i = 0; i < rows; ++i) out[i] = M.row(i).dot(x);
}

void aggregate_sum_serial(const std::vector<Vector>& slots, Vector& out) {
  const long n = slots.empty() ? 0 : slots[0].size();
  out = Vector::Zero(n);
  // Fixed slot order per coordinate keeps the sum bit-identical across paths.
  for (long j = 0; j < n; ++j) {
    double acc = 0.0;
    for (const auto& s : slots) acc += s[j];
    out[j] = acc;
  }
}

void aggregate_sum(const std::vector<Vector>& slots, Vector& out) {
  const long n = slots.empty() ? 0 : slots[0].size();
  if (!use_parallel(n)) {
    aggregate_sum_serial(slots, out);
    return;
  }
  out.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long j = 0; j < n; ++j) {
    double acc = 0.0;
    for (const auto& s : slots) acc += s[j];
    out[j] = acc;
  }
}

bool exp_scale_serial(const Vector& x, const Vector& alpha, const Vector& g, Vector& out) {
  const long n = x.size();
  out.resize(n);
  bool clamped = false;
  for (long j = 0; j < n; ++j) out[j] = x[j] * safe_exp(-alpha[j] * g[j], &clamped);
  return clamped;
}

bool exp_scale(const Vector& x, const Vector& alpha, const Vector& g, Vector& out) {
  const long n = x.size();
  if (!use_parallel(n)) return exp_scale_serial(x, alpha, g, out);
  out.resize(n);
  std::atomic<bool> clamped{false};
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long j = 0; j < n; ++j) {
    bool c = false;
    out[j] = x[j] * safe_exp(-alpha[j] * g[j], &c);
    if (c) clamped.store(true, std::memory_order_relaxed);
  }
  return clamped.load();
}

void parallel_blocks(int count, const std::function<void(int)>& fn) {
#ifdef _OPENMP
  if (g_parallel && count > 1) {
    // Exceptions must not unwind out of the parallel region; keep the first.
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#endif
  for (int i = 0; i < count; ++i) fn(i);
}

}  // namespace iasolve::kernels
