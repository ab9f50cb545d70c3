#pragma once

#include "iasolve/problem.hpp"

// Built-in instances shared by the check suite, the acceptance tests, and
// the CLI.  Everything is seeded and reproducible.
namespace iasolve::builtin {

// F(x) = sum_{i=1}^{10} 1/2 ||x - c_i||^2 over R^5 with seeded centers.
// L = 10, sigma = 10, x* = mean of the centers.
SumProblem quadratic_mean(std::uint64_t seed = 12345);

// Same shape restricted to the nonnegative orthant, centers shifted so some
// coordinates of the solution are active at zero.
SumProblem quadratic_mean_orthant(std::uint64_t seed = 12345);

// Random strongly convex quadratic components, free constraint.
SumProblem random_quadratic(int m, int n, std::uint64_t seed);

// Anisotropic random components over the nonnegative orthant, centered so
// several coordinates are active at the solution.  No closed-form optimum.
SumProblem random_quadratic_orthant(int m, int n, std::uint64_t seed);

// Flat direction: F has a zero-curvature direction (sigma = 0), used to
// exercise tuning failure flags.
SumProblem flat_direction();

// min y1^2 + y2^2 subject to y1 + y2 = 2; saddle point y = (1,1), lambda = -2.
SeparableProblem symmetric_two_block();

// Two blocks whose A_i have a shared dense coupling row and one private row
// each, so the scaled splitting's row counts differ from m.
SeparableProblem mixed_row_two_block();

// Dense rows: every A_i row nonzero, so row counts equal m and the scaled
// splitting coincides with the plain one.
SeparableProblem dense_two_block(std::uint64_t seed = 7);

// m = 1: min 1/2 y'Qy + c'y subject to Ay = b with a closed-form dual.
SeparableProblem single_block(std::uint64_t seed = 3);

// min 1/2 (y-2)^2 subject to y <= 0; multiplier limit mu = 2, y -> 0.
SeparableProblem scalar_inequality();

// min 1/2 (y1-1)^2 + 1/2 (y2-1)^2 subject to y1 + y2 <= 1 across two blocks;
// solution y = (1/2, 1/2), mu = 1/2.
SeparableProblem two_block_inequality();

// F(x) = x1 + 1/2 (x2 - 1)^2 over the nonnegative orthant; x* = (0, 1) with
// strict complementarity in the first coordinate.
SumProblem orthant_strict_complementarity();

}  // namespace iasolve::builtin
