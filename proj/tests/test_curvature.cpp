#include "einhyp/curvature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <initializer_list>
#include <random>

#include "einhyp/errors.hpp"
#include "einhyp/mwp.hpp"
#include "einhyp/spaceform.hpp"
#include "fixtures.hpp"

namespace einhyp {
namespace {

using testing::random_in_ball;
using testing::random_mwp;

CoordinateBox<double> cube(int n, double half) {
  return {Vec::Constant(n, -half), Vec::Constant(n, half)};
}

CoordinateMetric<double> flat(int n) {
  return CoordinateMetric<double>(cube(n, 1.0), [n](const Vec&, Mat& g) { g = Mat::Identity(n, n); });
}

// g = e^{2u} (dx^2 + dy^2) with u = 0.3 x^2 + 0.2 x y: K = -e^{-2u} (u_xx + u_yy) = -0.6 e^{-2u}.
CoordinateMetric<double> conformal_plane() {
  return CoordinateMetric<double>(cube(2, 1.0), [](const Vec& x, Mat& g) {
    const double u = 0.3 * x(0) * x(0) + 0.2 * x(0) * x(1);
    g = std::exp(2 * u) * Mat::Identity(2, 2);
  });
}

// Non-diagonal, non-conformal metric used for tensor identities.
CoordinateMetric<double> generic(int n) {
  return CoordinateMetric<double>(cube(n, 1.0), [n](const Vec& x, Mat& g) {
    g.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        g(i, j) = (i == j ? 1.0 + 0.1 * std::sin(2 * x(i)) : 0.0) + 0.08 * std::sin(x(i) + x(j) + 0.3 * i * j);
      }
  });
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(CurvatureOracle, FlatMetricHasZeroCurvature) {
  const auto b = curvature_oracle(flat(4), Vec::Zero(4).eval());
  for (double v : b.riemann.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(b.scalar, 0.0);
}

TEST(CurvatureOracle, RoundThreeSphere) {
  const auto chart = SpaceFormChart::make(3, 1.0);
  const auto metric = space_form_coordinate_metric<double>(chart);
  const Vec x = Vec::Constant(3, 0.1);
  const auto b = curvature_oracle(metric, x);
  EXPECT_NEAR(sectional_curvature<double>(b, Vec::Unit(3, 0), Vec::Unit(3, 2)), 1.0, 1e-7);
  EXPECT_NEAR(b.scalar, 6.0, 1e-6);
  EXPECT_NEAR((ricci_in_frame(b) - 2.0 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0, 1e-6);
}

TEST(CurvatureOracle, WeylVanishesBelowDimensionFour) {
  const auto metric = space_form_coordinate_metric<double>(SpaceFormChart::make(2, 1.0));
  EXPECT_EQ(weyl_norm(curvature_oracle(metric, Vec::Zero(2).eval())), 0.0);
  EXPECT_EQ(weyl_norm(curvature_oracle(conformal_plane(), Vec::Zero(2).eval())), 0.0);
}

TEST(CurvatureOracle, GaussianCurvatureOfConformalPlane) {
  const auto metric = conformal_plane();
  for (const Vec& p : {vec({0.0, 0.0}), vec({0.4, -0.3}), vec({-0.7, 0.6})}) {
    const double u = 0.3 * p(0) * p(0) + 0.2 * p(0) * p(1);
    const auto b = curvature_oracle(metric, p);
    EXPECT_NEAR(sectional_curvature<double>(b, Vec::Unit(2, 0), Vec::Unit(2, 1)), -0.6 * std::exp(-2 * u), 1e-7);
  }
}

TEST(CurvatureOracle, RandomPlanesInSpaceForms) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (double k : {-1.0, 0.0, 1.0}) {
    const auto chart = SpaceFormChart::make(4, k);
    const auto metric = space_form_coordinate_metric<double>(chart);
    const double radius = 0.9 * (chart.box().upper(0) - 2 * OracleConfig{}.margin());
    for (int q = 0; q < 100; ++q) {
      const Vec x = random_in_ball(rng, 4, radius / 2.0);
      Vec u(4), v(4);
      for (int i = 0; i < 4; ++i) {
        u(i) = normal(rng);
        v(i) = normal(rng);
      }
      const auto b = curvature_oracle(metric, x);
      EXPECT_NEAR(sectional_curvature(b, u, v), k, 1e-6) << "k = " << k << " sample " << q;
    }
  }
}

TEST(CurvatureOracle, PoincareBallBoundaryIsOutsideTheChart) {
  const auto chart = SpaceFormChart::make(3, -1.0);
  EXPECT_THROW(space_form_metric<double>(chart, Vec::Unit(3, 0)), DomainError);
  EXPECT_THROW(space_form_metric<double>(chart, (1.5 * Vec::Unit(3, 1)).eval()), DomainError);
  EXPECT_THROW(SpaceFormChart::make(3, -1.0, 1.2), ConstraintError);
}

TEST(CurvatureOracle, StencilLeavingTheBoxThrows) {
  const auto metric = flat(3);
  Vec x = Vec::Zero(3);
  x(1) = 1.0 - 0.5 * OracleConfig{}.margin();
  EXPECT_THROW(curvature_oracle(metric, x), MarginError);
}

TEST(CurvatureOracle, StencilsAgree) {
  const auto metric = generic(4);
  const Vec x = Vec::Constant(4, 0.2);
  OracleConfig nested;
  nested.stencil = RiemannStencil::kNestedChristoffel;
  const auto a = curvature_oracle(metric, x);
  const auto b = curvature_oracle(metric, x, nested);
  double worst = 0.0;
  for (std::size_t q = 0; q < a.riemann.data().size(); ++q) {
    worst = std::max(worst, std::abs(a.riemann.data()[q] - b.riemann.data()[q]));
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(CurvatureOracle, PlainStencilErrorIsSecondOrder) {
  // Sectional curvature of S^3 away from the origin; halving h should cut
  // the error by about four.
  const auto metric = space_form_coordinate_metric<double>(SpaceFormChart::make(3, 1.0));
  const Vec x = vec({0.3, -0.2, 0.25});
  auto error = [&](double h) {
    OracleConfig cfg;
    cfg.step = h;
    cfg.richardson = false;
    return std::abs(sectional_curvature<double>(curvature_oracle(metric, x, cfg), Vec::Unit(3, 0), Vec::Unit(3, 1)) - 1.0);
  };
  const double ratio = error(2e-2) / error(1e-2);
  EXPECT_NEAR(ratio, 4.0, 0.2);
}

TEST(CurvatureOracle, AlgebraicSymmetries) {
  for (int n : {3, 4, 5}) {
    const auto b = curvature_oracle(generic(n), Vec::Constant(n, 0.15).eval());
    const auto r = symmetry_residuals(b);
    EXPECT_LT(r.antisymmetry, 1e-12) << n;
    EXPECT_LT(r.pair_symmetry, 1e-6) << n;
    EXPECT_LT(r.bianchi, 1e-6) << n;
    EXPECT_LT(r.weyl_trace, 1e-6) << n;
    EXPECT_LT(r.scalar_trace, 1e-12) << n;
  }
}

TEST(CurvatureOracle, LinearChangeOfCoordinates) {
  // g'(y) = M^T g(M y) M, so R'_ijkl(y) = R(M e_i, M e_j, M e_k, M e_l)(M y).
  const int n = 4;
  const auto base = generic(n);
  Mat M(n, n);
  M << 0.9, 0.1, 0.0, 0.2, -0.1, 1.0, 0.3, 0.0, 0.0, -0.2, 0.8, 0.1, 0.1, 0.0, -0.1, 1.1;
  const CoordinateMetric<double> pulled(cube(n, 0.5), [&](const Vec& y, Mat& g) {
    Mat inner(n, n);
    base.evaluate_into(M * y, inner);
    g = M.transpose() * inner * M;
  });
  const Vec y = vec({0.1, -0.05, 0.2, 0.0});
  const auto a = curvature_oracle(pulled, y);
  const auto b = curvature_oracle(base, (M * y).eval());
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double expected =
              b.riemann_form(M.col(i).eval(), M.col(j).eval(), M.col(k).eval(), M.col(l).eval());
          worst = std::max(worst, std::abs(a.riemann(i, j, k, l) - expected));
        }
  EXPECT_LT(worst, 1e-6);
}

TEST(CurvatureOracle, ConstantRescalingDividesSectionalCurvature) {
  const auto base = generic(3);
  const double c = 2.5;
  const CoordinateMetric<double> scaled(cube(3, 1.0), [&](const Vec& x, Mat& g) {
    base.evaluate_into(x, g);
    g *= c;
  });
  const Vec x = Vec::Constant(3, -0.1);
  const Vec u = vec({1.0, 0.2, 0.0}), v = vec({0.0, 1.0, -0.5});
  EXPECT_NEAR(sectional_curvature(curvature_oracle(scaled, x), u, v),
              sectional_curvature(curvature_oracle(base, x), u, v) / c, 1e-7);
}

TEST(CurvatureOracle, DependentPlaneVectorsThrow) {
  const auto b = curvature_oracle(generic(3), Vec::Zero(3).eval());
  const Vec u = vec({1.0, 2.0, 3.0});
  EXPECT_THROW(sectional_curvature<double>(b, u, (2.0 * u).eval()), DegeneratePlaneError);
}

TEST(CurvatureOracle, ChristoffelSymbolsOfPolarCoordinates) {
  // dr^2 + r^2 dphi^2: G^r_phiphi = -r, G^phi_rphi = 1/r.
  const CoordinateMetric<double> polar({vec({0.5, -1.0}), vec({2.0, 1.0})}, [](const Vec& x, Mat& g) {
    g = Mat::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = x(0) * x(0);
  });
  const Vec x = vec({1.3, 0.2});
  const auto G = christoffel_symbols(polar, x);
  auto at = [&](int k, int i, int j) { return G[static_cast<std::size_t>((k * 2 + i) * 2 + j)]; };
  EXPECT_NEAR(at(0, 1, 1), -1.3, 1e-10);
  EXPECT_NEAR(at(1, 0, 1), 1.0 / 1.3, 1e-10);
  EXPECT_NEAR(at(1, 1, 0), 1.0 / 1.3, 1e-10);
  EXPECT_NEAR(at(0, 0, 0), 0.0, 1e-12);
}

// ---- multiply warped products ----------------------------------------------

const SmoothFn t = SmoothFn::variable();

TEST(WarpedProduct, ClosedFormPlaneClassesMatchOracle) {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> s_dist(0.3, 1.1);
  for (int q = 0; q < 20; ++q) {
    const auto spec = random_mwp(rng);
    const auto metric = build_mwp_metric<double>(spec);
    const auto box = mwp_box(spec);
    Vec x = 0.5 * (box.lower + box.upper);
    x(0) = s_dist(rng);
    const auto b = curvature_oracle(metric, x);
    const int o1 = spec.fiber_offset(0), o2 = spec.fiber_offset(1);
    const Vec e0 = Vec::Unit(x.size(), 0);
    auto e = [&](int i) -> Vec { return Vec::Unit(x.size(), i); };
    for (std::size_t i = 0; i < 2; ++i) {
      const int o = spec.fiber_offset(i);
      EXPECT_NEAR(sectional_curvature(b, e0, e(o)), mwp_sectional_closed_form(spec, x(0), PlaneClass::kBaseFiber, i),
                  1e-5);
      EXPECT_NEAR(sectional_curvature(b, e(o), e(o + 1)),
                  mwp_sectional_closed_form(spec, x(0), PlaneClass::kWithinFiber, i), 1e-5);
    }
    EXPECT_NEAR(sectional_curvature(b, e(o1), e(o2)), mwp_sectional_closed_form(spec, x(0), PlaneClass::kMixed), 1e-5);
  }
}

TEST(WarpedProduct, WithinFiberPlaneOnLineFiberIsRejected) {
  MWPSpec spec;
  spec.base = IntervalDomain::make(0.0, 1.0);
  spec.fibers.push_back({SpaceFormChart::make(1, 0.0), 1.0 + t});
  EXPECT_THROW(mwp_sectional_closed_form(spec, 0.5, PlaneClass::kWithinFiber, 0), ShapeError);
  EXPECT_THROW(mwp_sectional_closed_form(spec, 0.5, PlaneClass::kMixed), ShapeError);
}

TEST(WarpedProduct, NonPositiveWarpingIsRejected) {
  MWPSpec spec;
  spec.base = IntervalDomain::make(-1.0, 1.0);
  spec.fibers.push_back({SpaceFormChart::make(2, 1.0), t});
  EXPECT_THROW(spec.validate(), ConstraintError);
}

TEST(WarpedProduct, SingleFiberOverSpaceFormIsConformallyFlat) {
  MWPSpec spec;
  spec.base = IntervalDomain::make(0.2, 1.2);
  spec.fibers.push_back({SpaceFormChart::make(3, 1.0), 1.0 + 0.3 * t * t});
  const auto metric = build_mwp_metric<double>(spec);
  const auto box = mwp_box(spec);
  const Vec x = 0.5 * (box.lower + box.upper);
  EXPECT_LT(weyl_norm(curvature_oracle(metric, x)), 1e-6);
}

}  // namespace
}  // namespace einhyp
