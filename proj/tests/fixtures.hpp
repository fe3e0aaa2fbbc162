#pragma once

// Data shared by the unit and acceptance tests.

#include <cmath>
#include <random>

#include "einhyp/classifier.hpp"
#include "einhyp/hypersurface.hpp"
#include "einhyp/mwp.hpp"

namespace einhyp::testing {

// n = 5, p1 = p2 = 2, k1 = k2 = 1, rho = 4, f = sqrt(2/3) sin t.
inline ExampleTheorem3 reference_example() { return build_example_theorem3(ExampleTheorem3Spec{}); }

// Uniform point in the Euclidean ball of the given radius.
inline Vec random_in_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v.normalized() * radius * std::pow(unit(rng), 1.0 / n);
}

// Two fibers of dimension 2 or 3 and curvature -1, 0 or 1 over [0.2, 1.2],
// warpings drawn from four positive families.
inline MWPSpec random_mwp(std::mt19937_64& rng) {
  const SmoothFn t = SmoothFn::variable();
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_int_distribution<int> curv(-1, 1);
  std::uniform_real_distribution<double> coef(0.2, 0.8);
  MWPSpec spec;
  spec.base = IntervalDomain::make(0.2, 1.2);
  const SmoothFn warps[] = {1.0 + coef(rng) * t * t, coef(rng) + 0.5 * exp(coef(rng) * t),
                            1.5 + coef(rng) * sin(2.0 * t), cosh(coef(rng) * t)};
  std::uniform_int_distribution<int> pick(0, 3);
  for (int i = 0; i < 2; ++i) {
    const int p = 2 + (dim(rng) > 2 ? 1 : 0);
    spec.fibers.push_back({SpaceFormChart::make(p, curv(rng)), warps[pick(rng)]});
  }
  return spec;
}

// Point on the base line at s, fiber coordinates at the chart centre.
inline Vec base_point(const ExampleTheorem3& ex, double s) {
  const auto box = mwp_box(ex.metric_spec());
  Vec x = 0.5 * (box.lower + box.upper);
  x(0) = s;
  return x;
}

// Flat R^4 with coordinates (x, y, z, u), rotated by a fixed orthogonal Q.
// T = d_u with eigenvalue 0, the contact normal xi ~ (-y, 0, 1, 0) with
// eigenvalue -1 and the contact plane ker(dz - y dx) with eigenvalue +1.
// The +1 eigendistribution is not integrable, so its involutivity residual
// is of order one.
inline StructureData contact_plane_control() {
  Mat Q(4, 4);
  const double c1 = std::cos(0.4), s1 = std::sin(0.4), c2 = std::cos(-0.7), s2 = std::sin(-0.7);
  Mat R1 = Mat::Identity(4, 4), R2 = Mat::Identity(4, 4);
  R1(0, 0) = c1;
  R1(0, 2) = -s1;
  R1(2, 0) = s1;
  R1(2, 2) = c1;
  R2(1, 1) = c2;
  R2(1, 3) = -s2;
  R2(3, 1) = s2;
  R2(3, 3) = c2;
  Q = R1 * R2;
  StructureData d;
  d.metric = CoordinateMetric<double>({Vec::Constant(4, -1.0), Vec::Constant(4, 1.0)},
                                      [](const Vec&, Mat& g) { g = Mat::Identity(4, 4); });
  d.shape = [Q](const Vec& y) -> Mat {
    const Vec x = Q.transpose() * y;
    Vec xi = Vec::Zero(4);
    xi(0) = -x(1);
    xi(2) = 1.0;
    xi /= xi.norm();
    Mat A = Mat::Identity(4, 4);
    A(3, 3) = 0.0;
    A -= 2.0 * xi * xi.transpose();
    return Q * A * Q.transpose();
  };
  d.tangent = [Q](const Vec&) -> Vec { return Q.col(3); };
  d.angle = [](const Vec&) { return 0.0; };
  d.height = [Q](const Vec& y) { return Q.col(3).dot(y); };
  d.f = SmoothFn::constant(1.0);
  d.c = 1;
  return d;
}

}  // namespace einhyp::testing
