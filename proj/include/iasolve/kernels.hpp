#pragma once

#include <functional>
#include <vector>

#include "iasolve/types.hpp"

// Data-parallel inner kernels.  Each kernel has a serial reference path and
// an OpenMP path; both compute every output element with the same fixed-order
// inner loop, so results are bit-identical and the parallel path is safe to
// enable under the byte-determinism requirements.  The outer solver loops are
// sequential by nature and are never parallelized.
namespace iasolve::kernels {

// Parallel path is used only when enabled and the element count is at least
// the threshold; below it the fork/join overhead dominates.
void set_parallel(bool enabled);
bool parallel_enabled();
inline constexpr int kParallelThreshold = 256;

// out = M x (dense, row-major traversal).
void matvec_serial(const Matrix& M, const Vector& x, Vector& out);
void matvec(const Matrix& M, const Vector& x, Vector& out);

// out[j] = sum_i slots[i][j], inner sum in fixed slot order.
void aggregate_sum_serial(const std::vector<Vector>& slots, Vector& out);
void aggregate_sum(const std::vector<Vector>& slots, Vector& out);

// out[j] = x[j] * exp(clamp(-alpha[j] * g[j])); returns whether any exponent
// was clamped.
bool exp_scale_serial(const Vector& x, const Vector& alpha, const Vector& g, Vector& out);
bool exp_scale(const Vector& x, const Vector& alpha, const Vector& g, Vector& out);

// Runs fn(i) for i in [0, count); bodies must be independent and write only
// their own slot.  Used for the per-block minimization sweep.
void parallel_blocks(int count, const std::function<void(int)>& fn);

}  // namespace iasolve::kernels
