#include "iasolve/constraint.hpp"

namespace iasolve {

ConstraintSet ConstraintSet::box(Vector lo, Vector hi) {
  require(lo.size() == hi.size(), "box bounds must have equal dimension");
  for (int j = 0; j < lo.size(); ++j)
    require(lo[j] <= hi[j], "box bounds must satisfy lo <= hi");
  ConstraintSet s;
  s.kind = ConstraintKind::Box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

Vector ConstraintSet::project(const Vector& x) const {
  switch (kind) {
    case ConstraintKind::Free:
      return x;
    case ConstraintKind::NonnegativeOrthant:
      return x.cwiseMax(0.0);
    case ConstraintKind::Box:
      require(lo.size() == x.size(), "box dimension mismatch");
      return x.cwiseMax(lo).cwiseMin(hi);
  }
  return x;
}

bool ConstraintSet::contains(const Vector& x, double tol) const {
  switch (kind) {
    case ConstraintKind::Free:
      return true;
    case ConstraintKind::NonnegativeOrthant:
      return (x.array() >= -tol).all();
    case ConstraintKind::Box:
      return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
  }
  return true;
}

}  // namespace iasolve
