#pragma once

#include "iasolve/types.hpp"

namespace iasolve {

enum class PenaltyKind { Quadratic, Exponential };

// Penalty function psi for multiplier methods and its convex conjugate.
// Required normalization: psi(0) = 0, psi'(0) = 1, psi increasing and
// strictly convex.  Exponential: psi(s) = e^s - 1, with conjugate
// psi*(t) = t(ln t - 1) + 1 for t > 0, psi*(0) = 1, +inf for t < 0.
// Quadratic: psi(s) = s + s^2/2; its generalized proximal term is the
// standard quadratic prox, so the generalized step reduces to the plain one.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Exponential;

  double psi(double s) const;
  double dpsi(double s) const;
  double d2psi(double s) const;
  double conj(double t) const;   // psi*(t)
  double dconj(double t) const;  // (psi*)'(t), t > 0

  static PenaltySpec exponential() { return {PenaltyKind::Exponential}; }
  static PenaltySpec quadratic() { return {PenaltyKind::Quadratic}; }
};

// Exponent clamp applied before std::exp to avoid overflow; clamped steps
// are reported by the callers that can encounter them.
inline constexpr double kExpClamp = 700.0;
double safe_exp(double s, bool* clamped = nullptr);

}  // namespace iasolve
