#include "einhyp/spaceform.hpp"

namespace einhyp {

SpaceFormChart SpaceFormChart::make(int dim, double curvature, double radius) {
  if (dim < 1) throw ConstraintError("space-form dimension must be >= 1");
  if (!std::isfinite(curvature)) throw ConstraintError("space-form curvature must be finite");
  if (radius == 0.0) radius = default_radius(curvature);
  if (!(radius > 0.0)) throw ConstraintError("chart radius must be positive");
  if (curvature < 0.0 && radius > default_radius(curvature) * (1.0 + 1e-12)) {
    throw ConstraintError("chart radius exceeds the Poincare ball 1/sqrt(-k)");
  }
  return {dim, curvature, radius};
}

CoordinateBox<double> SpaceFormChart::box() const {
  // strictly inside the ball: the cube corners sit at 0.999 radius
  const double half = 0.999 * radius / std::sqrt(static_cast<double>(dim));
  return {Vec::Constant(dim, -half), Vec::Constant(dim, half)};
}

bool SpaceFormChart::contains(const Vec& x) const {
  return x.size() == dim && 1.0 + curvature * x.squaredNorm() > 0.0;
}

}  // namespace einhyp
