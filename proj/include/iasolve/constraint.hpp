#pragma once

#include "iasolve/types.hpp"

namespace iasolve {

enum class ConstraintKind { Free, NonnegativeOrthant, Box };

// Closed convex constraint set X with a cheap exact projection.
struct ConstraintSet {
  ConstraintKind kind = ConstraintKind::Free;
  Vector lo;  // Box only
  Vector hi;  // Box only

  static ConstraintSet free() { return {}; }
  static ConstraintSet nonnegative() {
    ConstraintSet s;
    s.kind = ConstraintKind::NonnegativeOrthant;
    return s;
  }
  static ConstraintSet box(Vector lo, Vector hi);

  bool is_free() const { return kind == ConstraintKind::Free; }
  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = 0.0) const;
};

}  // namespace iasolve
