#pragma once

// Conformal charts of the space forms Q^p(k).
//
// For k != 0 the chart is the stereographic (k > 0) or Poincare-ball (k < 0)
// model with metric 4 / (1 + k |x|^2)^2 * delta_ij, which has sectional
// curvature exactly k. For k = 0 the chart is the identity. A sphere of
// radius 1/sqrt(k) is represented by its chart with curvature k.

#include <cmath>
#include <limits>
#include <string>

#include "einhyp/coordinate_metric.hpp"

namespace einhyp {

struct SpaceFormChart {
  int dim = 1;
  double curvature = 0.0;
  // Radius of the coordinate ball used for sampling (see box()). For k < 0
  // it may not exceed 1/sqrt(-k), the boundary of the Poincare ball.
  double radius = 1.0;

  // Default radius: 1/sqrt(|k|) for k != 0, 1 for k = 0.
  static double default_radius(double k) { return k == 0.0 ? 1.0 : 1.0 / std::sqrt(std::abs(k)); }
  // Throws ConstraintError on dim < 1, radius <= 0 or radius beyond the ball.
  static SpaceFormChart make(int dim, double curvature, double radius = 0.0);

  // Largest axis-aligned cube inscribed in the chart ball.
  CoordinateBox<double> box() const;
  bool contains(const Vec& x) const;
};

// Metric matrix of the chart at x. Throws DomainError when 1 + k|x|^2 <= 0
// (the Poincare-ball boundary and beyond for k < 0).
template <typename Scalar>
MatX<Scalar> space_form_metric(const SpaceFormChart& chart, const VecX<Scalar>& x) {
  if (x.size() != chart.dim) throw DomainError("point dimension does not match chart dimension");
  const Scalar r2 = x.squaredNorm();
  const Scalar denom = Scalar(1) + Scalar(chart.curvature) * r2;
  if (!(denom > Scalar(0))) {
    throw DomainError("point with |x| = " + std::to_string(static_cast<double>(std::sqrt(r2))) +
                      " outside the space-form chart (1 + k|x|^2 <= 0)");
  }
  if (chart.curvature == 0.0) return MatX<Scalar>::Identity(chart.dim, chart.dim);
  const Scalar factor = Scalar(4) / (denom * denom);
  return factor * MatX<Scalar>::Identity(chart.dim, chart.dim);
}

// Conformal factor of the chart (the metric is factor * identity); no checks.
template <typename Scalar, typename Derived>
Scalar space_form_factor(double curvature, const Eigen::MatrixBase<Derived>& x) {
  if (curvature == 0.0) return Scalar(1);
  const Scalar denom = Scalar(1) + Scalar(curvature) * x.squaredNorm();
  return Scalar(4) / (denom * denom);
}

template <typename Scalar>
CoordinateMetric<Scalar> space_form_coordinate_metric(const SpaceFormChart& chart) {
  const auto box = chart.box();
  CoordinateBox<Scalar> sbox{box.lower.cast<Scalar>(), box.upper.cast<Scalar>()};
  const double k = chart.curvature;
  const int p = chart.dim;
  return CoordinateMetric<Scalar>(std::move(sbox), [k, p](const VecX<Scalar>& x, MatX<Scalar>& g) {
    g.setZero(p, p);
    g.diagonal().setConstant(space_form_factor<Scalar>(k, x));
  });
}

}  // namespace einhyp
