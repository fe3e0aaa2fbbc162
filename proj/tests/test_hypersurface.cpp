#include "einhyp/hypersurface.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "einhyp/errors.hpp"
#include "einhyp/spaceform.hpp"
#include "fixtures.hpp"

namespace einhyp {
namespace {

using testing::base_point;
using testing::reference_example;

const SmoothFn t = SmoothFn::variable();

SampleGrid reference_grid(const ExampleTheorem3& ex, int points = 3) {
  GridConfig cfg;
  cfg.points_per_axis = points;
  return tensor_grid(mwp_box(ex.metric_spec()), cfg, 2.0 * OracleConfig{}.margin());
}

SampleGrid reference_line(const ExampleTheorem3& ex, int points = 20) {
  const auto& base = ex.metric_spec().base;
  return base_line_grid(mwp_box(ex.metric_spec()), linspace(base.t_min + 0.3, base.t_max - 0.3, points));
}

double residual(const ResidualReport& rep, const std::string& name) {
  const auto* e = rep.find(name);
  if (e == nullptr) throw std::runtime_error("missing entry " + name);
  return e->residual;
}

// ---- ambient invariants --------------------------------------------------

TEST(AmbientInvariants, RoundSphereAsWarpedProduct) {
  const auto inv = ambient_invariants(sin(t), 1, 0.9);
  EXPECT_NEAR(inv.a, -1.0, 1e-14);
  EXPECT_NEAR(inv.b, 0.0, 1e-14);
}

TEST(AmbientInvariants, HyperbolicSpaceAsWarpedProduct) {
  const auto inv = ambient_invariants(cosh(t), -1, 0.4);
  EXPECT_NEAR(inv.a, 1.0, 1e-14);
  EXPECT_NEAR(inv.b, 0.0, 1e-14);
}

TEST(AmbientInvariants, ProductWithUnitSphere) {
  const auto inv = ambient_invariants(SmoothFn::constant(1.0), 1, 3.0);
  EXPECT_DOUBLE_EQ(inv.a, -1.0);
  EXPECT_DOUBLE_EQ(inv.b, 1.0);
}

TEST(AmbientInvariants, ReferenceWarping) {
  const SmoothFn f = std::sqrt(2.0 / 3.0) * sin(t);
  for (double s : {0.3, 1.0, M_PI / 2, 2.5}) {
    const double fs = std::sqrt(2.0 / 3.0) * std::sin(s);
    const auto inv = ambient_invariants(f, 1, s);
    EXPECT_NEAR(inv.a, -1.0 - 1.0 / (3 * fs * fs), 1e-12);
    EXPECT_NEAR(inv.b, 1.0 / (3 * fs * fs), 1e-12);
  }
}

TEST(AmbientInvariants, NonPositiveWarpingThrows) {
  EXPECT_THROW(ambient_invariants(sin(t), 1, -0.5), DomainError);
  EXPECT_THROW(ambient_invariants(sin(t).with_domain(IntervalDomain::make(0.0, M_PI)), 1, 4.0), DomainError);
}

// ---- structure conditions ------------------------------------------------

TEST(StructureResiduals, ReferenceExamplePasses) {
  const auto ex = reference_example();
  const auto rep = structure_residuals(ex.data, reference_grid(ex));
  for (const auto& e : rep.entries()) EXPECT_TRUE(e.pass) << e.name << " = " << e.residual;
  EXPECT_EQ(rep.entries().size(), 7u);
}

TEST(StructureResiduals, FlippedOrientationAlsoPasses) {
  const auto ex = reference_example();
  const auto rep = structure_residuals(flipped(ex.data), reference_grid(ex));
  EXPECT_TRUE(rep.all_pass());
  EXPECT_EQ(rep.orientation, "flipped");
}

TEST(StructureResiduals, ShiftedShapeOperatorBreaksGauss) {
  const auto ex = reference_example();
  auto data = ex.data;
  const auto shape = data.shape;
  data.shape = [shape](const Vec& x) -> Mat { return shape(x) + 0.1 * Mat::Identity(x.size(), x.size()); };
  const auto rep = structure_residuals(data, reference_grid(ex));
  EXPECT_GT(residual(rep, "F_gauss"), 1e-2);
  EXPECT_FALSE(rep.find("F_gauss")->pass);
  EXPECT_TRUE(rep.find("A_self_adjoint")->pass);
}

TEST(StructureResiduals, WrongAngleBreaksUnitDecomposition) {
  const auto ex = reference_example();
  auto w = ex.warped;
  w.theta = SmoothFn::constant(0.2);
  const auto rep = structure_residuals(to_structure_data(w), reference_grid(ex));
  EXPECT_NEAR(residual(rep, "B_unit_decomposition"), 0.04, 1e-12);
  EXPECT_FALSE(rep.find("B_unit_decomposition")->pass);
}

TEST(StructureResiduals, NonGradientTangentIsDetected) {
  const auto ex = reference_example();
  auto w = ex.warped;
  w.height = 0.5 * t + SmoothFn::constant(0.5);
  const auto rep = structure_residuals(to_structure_data(w), reference_grid(ex));
  EXPECT_NEAR(residual(rep, "T_gradient_of_height"), 0.5, 1e-8);
}

TEST(StructureResiduals, AsymmetricShapeIsDetected) {
  const auto ex = reference_example();
  auto data = ex.data;
  const auto shape = data.shape;
  data.shape = [shape](const Vec& x) -> Mat {
    Mat A = shape(x);
    A(0, 1) += 0.05;
    return A;
  };
  EXPECT_FALSE(structure_residuals(data, reference_grid(ex, 2)).find("A_self_adjoint")->pass);
}

TEST(StructureEvaluator, CodazziPairsIncludeCoordinateAndRandomPairs) {
  const auto ex = reference_example();
  CheckConfig cfg;
  cfg.random_directions = 4;
  const StructureEvaluator eval(ex.data, cfg);
  EXPECT_EQ(eval.codazzi_pairs(), 10 + 4);
}

// ---- Ricci -----------------------------------------------------------------

TEST(Ricci, CorollaryOnReferenceExample) {
  const auto ex = reference_example();
  const Vec x = base_point(ex, M_PI / 2);
  const Mat g = ex.data.metric(x);
  auto unit = [&](int i) -> Vec { return Vec::Unit(5, i) / std::sqrt(g(i, i)); };
  EXPECT_NEAR(ricci_via_corollary(ex.data, x, unit(0), unit(0)), 4.0, 1e-12);
  EXPECT_NEAR(ricci_via_corollary(ex.data, x, unit(1), unit(1)), 4.0, 1e-12);
  EXPECT_NEAR(ricci_via_corollary(ex.data, x, unit(3), unit(3)), 4.0, 1e-12);
  EXPECT_NEAR(ricci_via_corollary(ex.data, x, unit(0), unit(3)), 0.0, 1e-12);
  EXPECT_NEAR(ricci_via_corollary(ex.data, x, unit(1), unit(4)), 0.0, 1e-12);
}

TEST(Ricci, CorollaryAgreesWithOracle) {
  const auto ex = reference_example();
  EXPECT_TRUE(corollary_agreement(ex.data, reference_grid(ex)).all_pass());
}

TEST(Ricci, EinsteinResidualOfRoundFourSphere) {
  const auto chart = SpaceFormChart::make(4, 1.0);
  const auto metric = space_form_coordinate_metric<double>(chart);
  GridConfig cfg;
  cfg.points_per_axis = 3;
  const auto grid = tensor_grid(chart.box(), cfg, 0.01);
  EXPECT_TRUE(einstein_residual(metric, 3.0, grid).all_pass());
  const auto wrong = einstein_residual(metric, 4.0, grid);
  EXPECT_NEAR(wrong.entries()[0].residual, 1.0, 1e-6);
  EXPECT_FALSE(wrong.all_pass());
}

TEST(Ricci, EinsteinResidualOfReferenceExample) {
  const auto ex = reference_example();
  const auto grid = reference_grid(ex);
  EXPECT_LT(einstein_residual(ex.data.metric, 4.0, grid).entries()[0].residual, 1e-6);
  EXPECT_NEAR(einstein_residual(ex.data.metric, 3.0, grid).entries()[0].residual, 1.0, 1e-6);
}

// ---- principal curvatures ------------------------------------------------

TEST(PrincipalDecomposition, ZeroShapeIsOneCluster) {
  const auto sp = principal_decomposition(Mat::Zero(4, 4), Mat::Identity(4, 4));
  ASSERT_EQ(sp.clusters.size(), 1u);
  EXPECT_EQ(sp.clusters[0].multiplicity, 4);
  EXPECT_EQ(sp.clusters[0].value, 0.0);
  EXPECT_EQ(sp.t_cluster, -1);
}

TEST(PrincipalDecomposition, ReferenceExample) {
  const auto ex = reference_example();
  const double s = 1.1;
  const auto sp = principal_decomposition(ex.data, base_point(ex, s));
  ASSERT_EQ(sp.clusters.size(), 3u);
  const double f = std::sqrt(2.0 / 3.0) * std::sin(s);
  EXPECT_NEAR(sp.clusters[0].value, -1.0 / f, 1e-12);
  EXPECT_NEAR(sp.clusters[1].value, 0.0, 1e-12);
  EXPECT_NEAR(sp.clusters[2].value, 1.0 / f, 1e-12);
  EXPECT_EQ(sp.clusters[0].multiplicity, 2);
  EXPECT_EQ(sp.clusters[1].multiplicity, 1);
  EXPECT_EQ(sp.clusters[2].multiplicity, 2);
  EXPECT_EQ(sp.t_cluster, 1);
  EXPECT_FALSE(sp.classification_violation);
  const auto L = label_spectrum(sp);
  EXPECT_EQ(L.p1, 2);
  EXPECT_EQ(L.p2, 2);
  EXPECT_NEAR(L.lambda_n, 0.0, 1e-12);
  EXPECT_NEAR(L.trace, 0.0, 1e-12);
}

TEST(PrincipalDecomposition, BasisIsMetricOrthonormal) {
  Mat g(3, 3);
  g << 2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 1.5;
  Mat A(3, 3);
  A << 1.0, 0.2, 0.0, 0.1, -1.0, 0.4, 0.0, 0.3, 0.5;
  const Mat shape = g.inverse() * (0.5 * (g * A + (g * A).transpose()));
  const auto sp = principal_decomposition(shape, g);
  Mat basis(3, 0);
  for (const auto& c : sp.clusters) {
    basis.conservativeResize(3, basis.cols() + c.basis.cols());
    basis.rightCols(c.basis.cols()) = c.basis;
    for (int k = 0; k < c.basis.cols(); ++k) {
      EXPECT_LT((shape * c.basis.col(k) - c.value * c.basis.col(k)).norm(), 1e-12);
    }
  }
  EXPECT_LT((basis.transpose() * g * basis - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PrincipalDecomposition, NearlyEqualEigenvaluesCluster) {
  Mat A = Mat::Zero(3, 3);
  A.diagonal() << 1.0, 1.0 + 1e-9, 2.0;
  const auto merged = principal_decomposition(A, Mat::Identity(3, 3));
  ASSERT_EQ(merged.clusters.size(), 2u);
  EXPECT_EQ(merged.clusters[0].multiplicity, 2);
  A(1, 1) = 1.01;
  EXPECT_EQ(principal_decomposition(A, Mat::Identity(3, 3)).clusters.size(), 3u);
}

TEST(PrincipalDecomposition, FourValuesAreAClassificationViolation) {
  Mat A = Mat::Zero(4, 4);
  A.diagonal() << -1.0, 0.0, 1.0, 2.0;
  const Vec T = Vec::Unit(4, 1);
  const auto sp = principal_decomposition(A, Mat::Identity(4, 4), 0.0, &T);
  EXPECT_TRUE(sp.classification_violation);
  EXPECT_THROW(label_spectrum(sp), ShapeError);
}

TEST(PrincipalDecomposition, ClusterContainingTangent) {
  Mat A = Mat::Zero(3, 3);
  A.diagonal() << 3.0, -1.0, -1.0;
  const Vec T = Vec::Unit(3, 0);
  const auto sp = principal_decomposition(A, Mat::Identity(3, 3), 0.0, &T);
  EXPECT_EQ(sp.clusters[static_cast<std::size_t>(sp.t_cluster)].value, 3.0);
  EXPECT_EQ(cluster_containing(sp, Mat::Identity(3, 3), Vec::Unit(3, 2)), 0);
}

TEST(TPrincipal, ReferenceExample) {
  const auto ex = reference_example();
  EXPECT_LT(check_T_principal(ex.data, base_point(ex, 0.8)), 1e-14);
}

TEST(TPrincipal, TangentOffAnEigendirection) {
  StructureData d;
  d.metric = CoordinateMetric<double>({Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)},
                                      [](const Vec&, Mat& g) { g = Mat::Identity(2, 2); });
  d.shape = [](const Vec&) -> Mat { return Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix(); };
  d.tangent = [](const Vec&) -> Vec { return Vec::Constant(2, 1.0 / std::sqrt(2.0)); };
  EXPECT_NEAR(check_T_principal(d, Vec::Zero(2)), 0.5, 1e-14);
  d.tangent = [](const Vec&) -> Vec { return Vec::Zero(2); };
  EXPECT_THROW(check_T_principal(d, Vec::Zero(2)), ShapeError);
}

// ---- algebraic laws -------------------------------------------------------

TEST(Quadratics, ReferenceExampleAndWrongRho) {
  const auto ex = reference_example();
  const Vec x = base_point(ex, 1.3);
  const auto q = slice_quantities(ex.data, ex.metric_spec(), x);
  const auto sp = principal_decomposition(ex.data, x);
  const auto good = check_quadratics(sp, 4.0, q.a, q.b, q.tnorm2);
  for (const auto& e : good.entries()) EXPECT_LT(e.residual, 1e-12) << e.name;
  const auto bad = check_quadratics(sp, 5.0, q.a, q.b, q.tnorm2);
  EXPECT_NEAR(residual(bad, "eq1_lambda1"), 1.0, 1e-12);
  EXPECT_NEAR(residual(bad, "eq1_lambda2"), 1.0, 1e-12);
  EXPECT_NEAR(residual(bad, "eq2_lambda_n"), 1.0, 1e-12);
}

TEST(MultiplicityLaws, ReferenceExample) {
  const auto ex = reference_example();
  const Vec x = base_point(ex, 2.0);
  const auto q = slice_quantities(ex.data, ex.metric_spec(), x);
  const auto rep = check_multiplicity_laws(principal_decomposition(ex.data, x), q.b, q.tnorm2, 5);
  EXPECT_TRUE(rep.all_pass());
  EXPECT_TRUE(rep.flags().empty());
  EXPECT_LT(residual(rep, "intsyst_sum"), 1e-12);
}

TEST(MultiplicityLaws, NegativeBWithTwoValuesIsFlagged) {
  Mat A = Mat::Zero(5, 5);
  A.diagonal() << 0.0, -1.0, -1.0, 1.0, 1.0;
  const Vec T = Vec::Unit(5, 0);
  const auto rep = check_multiplicity_laws(principal_decomposition(A, Mat::Identity(5, 5), 0.0, &T), -0.5, 1.0, 5);
  EXPECT_FALSE(rep.find("branch_consistency")->pass);
  ASSERT_EQ(rep.flags().size(), 1u);
}

TEST(MultiplicityLaws, SimpleEigenvalueWithPositiveBIsFlagged) {
  Mat A = Mat::Zero(5, 5);
  A.diagonal() << 0.0, -3.0, 1.0, 1.0, 1.0;
  const Vec T = Vec::Unit(5, 0);
  const auto rep = check_multiplicity_laws(principal_decomposition(A, Mat::Identity(5, 5), 0.0, &T), 0.5, 1.0, 5);
  EXPECT_FALSE(rep.find("branch_consistency")->pass);
  EXPECT_EQ(rep.flags().size(), 1u);
  EXPECT_EQ(rep.find("lambda_squares"), nullptr);
}

TEST(MultiplicityLaws, NonzeroLambdaNIsRejected) {
  Mat A = Mat::Zero(5, 5);
  A.diagonal() << 0.5, -1.0, -1.0, 1.0, 1.0;
  const Vec T = Vec::Unit(5, 0);
  EXPECT_THROW(check_multiplicity_laws(principal_decomposition(A, Mat::Identity(5, 5), 0.0, &T), 0.5, 1.0, 5),
               ConstraintError);
}

TEST(MultiplicityLaws, ZeroBOnlyNotes) {
  Mat A = Mat::Zero(5, 5);
  A.diagonal() << 0.0, -1.0, -1.0, 1.0, 1.0;
  const Vec T = Vec::Unit(5, 0);
  const auto rep = check_multiplicity_laws(principal_decomposition(A, Mat::Identity(5, 5), 0.0, &T), 0.0, 1.0, 5);
  EXPECT_TRUE(rep.entries().empty());
  EXPECT_EQ(rep.notices().size(), 1u);
}

TEST(ThetaGradient, ReferenceExample) {
  const auto ex = reference_example();
  const auto rep = check_theta_gradient(ex.data, reference_grid(ex, 2));
  EXPECT_TRUE(rep.all_pass()) << residual(rep, "theta_gradient") << " " << residual(rep, "T_geodesic");
}

TEST(ThetaGradient, InconsistentAngleIsDetected) {
  const auto ex = reference_example();
  auto w = ex.warped;
  w.theta = 0.1 * cos(t);
  const auto rep = check_theta_gradient(to_structure_data(w), reference_grid(ex, 2));
  EXPECT_GT(residual(rep, "theta_gradient"), 1e-2);
}

TEST(ThetaGradient, VanishingTangentIsRejected) {
  const auto ex = reference_example();
  auto w = ex.warped;
  w.tangent_s = SmoothFn::constant(0.0);
  EXPECT_THROW(check_theta_gradient(to_structure_data(w), reference_grid(ex, 2)), ShapeError);
}

TEST(LogDerivative, ReferenceExample) {
  const auto ex = reference_example();
  const auto rep = check_log_derivative_link(ex.data, ex.metric_spec(), reference_line(ex));
  EXPECT_TRUE(rep.all_pass());
  EXPECT_LT(residual(rep, "log_derivative_phi1"), 1e-12);
}

TEST(LogDerivative, WrongWarpingIsDetected) {
  const auto ex = reference_example();
  auto spec = ex.metric_spec();
  spec.fibers[1].warping = spec.fibers[1].warping * (1.0 + 0.2 * t);
  const auto rep = check_log_derivative_link(ex.data, spec, reference_line(ex));
  EXPECT_TRUE(rep.find("log_derivative_phi1")->pass);
  EXPECT_GT(residual(rep, "log_derivative_phi2"), 0.05);
}

TEST(IdSystem, ReferenceExample) {
  const auto ex = reference_example();
  std::vector<SliceQuantities> slices;
  for (const auto& x : reference_line(ex).points) slices.push_back(slice_quantities(ex.data, ex.metric_spec(), x));
  const auto rep = check_id_system(ex.metric_spec(), slices);
  EXPECT_TRUE(rep.all_pass());
  EXPECT_EQ(rep.entries().size(), 5u);
}

TEST(IdSystem, WrongFiberCurvatureBreaksId2) {
  const auto ex = reference_example();
  std::vector<SliceQuantities> slices;
  for (const auto& x : reference_line(ex).points) slices.push_back(slice_quantities(ex.data, ex.metric_spec(), x));
  auto spec = ex.metric_spec();
  spec.fibers[0].chart.curvature = 2.0;
  const auto rep = check_id_system(spec, slices);
  EXPECT_NEAR(residual(rep, "id2_phi1"), 1.0, 1e-12);
  EXPECT_TRUE(rep.find("id2_phi2")->pass);
}

// ---- involutivity ---------------------------------------------------------

TEST(Involutivity, ReferenceExampleDistributionsAreIntegrable) {
  const auto ex = reference_example();
  const Vec x = base_point(ex, 1.2);
  EXPECT_LT(involutivity_residual(ex.data, 1, x), 1e-5);
  EXPECT_LT(involutivity_residual(ex.data, 2, x), 1e-5);
}

TEST(Involutivity, ContactPlaneControlIsNot) {
  const auto control = testing::contact_plane_control();
  const Vec x = Vec::Constant(4, 0.1);
  EXPECT_GT(involutivity_residual(control, 2, x), 1e-2);
  EXPECT_EQ(involutivity_residual(control, 1, x), 0.0);  // simple eigenvalue
}

TEST(Involutivity, LieBracketOfCoordinateRotation) {
  // X = y d_x - x d_y: [X, d_x] = -(d_x X) = d_y.
  const std::function<Vec(const Vec&)> X = [](const Vec& p) -> Vec { return Eigen::Vector2d(p(1), -p(0)); };
  const std::function<Vec(const Vec&)> Y = [](const Vec&) -> Vec { return Eigen::Vector2d(1.0, 0.0); };
  const Vec br = lie_bracket(X, Y, Eigen::Vector2d(0.3, -0.4), 1e-3, true);
  EXPECT_NEAR(br(0), 0.0, 1e-10);
  EXPECT_NEAR(br(1), 1.0, 1e-10);
}

// ---- scenes ---------------------------------------------------------------

TEST(WarpedStructureJson, RoundTrip) {
  const auto ex = reference_example();
  const auto j = to_json(ex.warped);
  const auto back = warped_structure_from_json(j);
  EXPECT_EQ(to_json(back), j);
  const Vec x = base_point(ex, 0.7);
  const auto d = to_structure_data(back);
  EXPECT_LT((d.shape(x) - ex.data.shape(x)).norm(), 1e-15);
}

TEST(WarpedStructureJson, MalformedInputIsASchemaError) {
  EXPECT_THROW(warped_structure_from_json(nlohmann::json::array()), SchemaError);
  auto j = to_json(reference_example().warped);
  j.erase("tangent_s");
  EXPECT_THROW(warped_structure_from_json(j), SchemaError);
}

}  // namespace
}  // namespace einhyp
