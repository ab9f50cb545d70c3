#include "iasolve/penalty.hpp"

#include <cmath>
#include <limits>

namespace iasolve {

double safe_exp(double s, bool* clamped) {
  if (s > kExpClamp) {
    if (clamped) *clamped = true;
    s = kExpClamp;
  } else if (s < -kExpClamp) {
    if (clamped) *clamped = true;
    s = -kExpClamp;
  }
  return std::exp(s);
}

double PenaltySpec::psi(double s) const {
  if (kind == PenaltyKind::Exponential) return safe_exp(s) - 1.0;
  return s + 0.5 * s * s;
}

double PenaltySpec::dpsi(double s) const {
  if (kind == PenaltyKind::Exponential) return safe_exp(s);
  return 1.0 + s;
}

double PenaltySpec::d2psi(double s) const {
  if (kind == PenaltyKind::Exponential) return safe_exp(s);
  return 1.0;
}

double PenaltySpec::conj(double t) const {
  if (kind == PenaltyKind::Exponential) {
    if (t < 0.0) return std::numeric_limits<double>::infinity();
    if (t == 0.0) return 1.0;
    return t * (std::log(t) - 1.0) + 1.0;
  }
  return 0.5 * (t - 1.0) * (t - 1.0);
}

double PenaltySpec::dconj(double t) const {
  if (kind == PenaltyKind::Exponential) return std::log(t);
  return t - 1.0;
}

}  // namespace iasolve
