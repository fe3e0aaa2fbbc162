#pragma once

// Structure conditions (A)-(F) for a Riemannian manifold (M, g) to sit as a
// hypersurface of I x_f Q^n(c), evaluated numerically on a concrete datum,
// together with the spectral identities that follow from Ric = rho g.
//
// Everything is intrinsic: the datum is (g, A, T, theta, pi, f, c) on a
// coordinate box of M. Field derivatives are central differences of the
// coordinate components (Richardson-extrapolated when the oracle config
// asks for it) plus Christoffel corrections taken from the curvature oracle.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "einhyp/coordinate_metric.hpp"
#include "einhyp/curvature.hpp"
#include "einhyp/mwp.hpp"
#include "einhyp/report.hpp"
#include "einhyp/sampling.hpp"
#include "einhyp/scalarfun.hpp"

namespace einhyp {

enum class Orientation { kAsSupplied, kFlipped };

const char* orientation_name(Orientation o);

struct StructureData {
  CoordinateMetric<double> metric;
  std::function<Mat(const Vec&)> shape;       // A^i_j
  std::function<Vec(const Vec&)> tangent;     // T^i
  std::function<double(const Vec&)> angle;    // theta
  std::function<double(const Vec&)> height;   // pi, values in the domain of f
  SmoothFn f;
  int c = 0;
  Orientation orientation = Orientation::kAsSupplied;

  int dim() const { return metric.dim(); }
};

// (A, theta) -> (-A, -theta), i.e. the opposite unit normal.
StructureData flipped(const StructureData& data);

// Closed-form datum on a multiply warped product whose fields depend on s
// only: A = diag(shape_base, shape_fiber_1 Id, shape_fiber_2 Id),
// T = tangent_s * d_s. This is the form the JSON scenes use.
struct WarpedStructure {
  MWPSpec metric;
  SmoothFn shape_base;
  std::vector<SmoothFn> shape_fibers;  // one per fiber
  SmoothFn tangent_s;
  SmoothFn theta;
  SmoothFn height;
  SmoothFn f;
  int c = 0;
  Orientation orientation = Orientation::kAsSupplied;
};

StructureData to_structure_data(const WarpedStructure& w);
nlohmann::json to_json(const WarpedStructure& w);
WarpedStructure warped_structure_from_json(const nlohmann::json& j);

struct AmbientInvariants {
  double a = 0.0;
  double b = 0.0;
};

// a = ((f')^2 - c) / f^2,  b = f''/f - (f')^2/f^2 + c/f^2.
// Throws DomainError outside the domain of f and when f(t) <= 0.
AmbientInvariants ambient_invariants(const SmoothFn& f, int c, double t);

struct CheckConfig {
  OracleConfig oracle;  // step and Richardson flag also drive field derivatives
  int random_directions = 10;
  std::uint64_t seed = 0;
  double cluster_tol = 0.0;  // <= 0 selects 1e-6 (1 + max |lambda|)
  Tolerances tolerances = Tolerances::defaults();
  // Integral curves of T/|T| for the geodesic check.
  int geodesic_steps = 8;
  double geodesic_step = 0.05;
};

// ---- pointwise helpers -----------------------------------------------------

double g_dot(const Mat& g, const Vec& x, const Vec& y);
double g_norm(const Mat& g, const Vec& x);

// Sample directions shared by every point of a check run: the coordinate
// frame followed by `random` constant-coefficient combinations.
std::vector<Vec> sample_directions(int dim, int random, std::uint64_t seed);

// The six residuals of (A)-(F) at one point, each normalised by g-unit
// sample vectors. `t_gradient` is |T - grad pi|.
struct StructurePointResiduals {
  double self_adjoint = 0.0;
  double unit_decomposition = 0.0;
  double tangent_hessian = 0.0;
  double angle_gradient = 0.0;
  double codazzi = 0.0;
  double gauss = 0.0;
  double t_gradient = 0.0;
};

class StructureEvaluator {
 public:
  StructureEvaluator(const StructureData& data, const CheckConfig& config);

  // `bundle` must be the oracle output at x for data.metric.
  StructurePointResiduals at(const Vec& x, const CurvatureBundle<double>& bundle) const;

  int codazzi_pairs() const { return static_cast<int>(pairs_.size()); }

 private:
  StructureData data_;
  CheckConfig config_;
  std::vector<Vec> directions_;
  std::vector<std::pair<Vec, Vec>> pairs_;
};

// ---- grid checks ---------------------------------------------------------

// Entries A_self_adjoint ... F_gauss and T_gradient_of_height.
ResidualReport structure_residuals(const StructureData& data, const SampleGrid& grid, const CheckConfig& config = {});

// Ric(X, Y) from the Gauss equation traced over a frame:
//   -((n-1)a + |T|^2 b)<X,Y> - (n-2) b <X,T><Y,T> + nH <AX,Y> - <AX,AY>.
double ricci_via_corollary(const StructureData& data, const Vec& x, const Vec& X, const Vec& Y);

// max |Ric - rho g| over orthonormal-frame components.
double einstein_defect(const CurvatureBundle<double>& bundle, double rho);
ResidualReport einstein_residual(const CoordinateMetric<double>& metric, double rho, const SampleGrid& grid,
                                 const CheckConfig& config = {});

// Oracle Ricci against ricci_via_corollary on frame pairs.
double corollary_defect(const StructureData& data, const Vec& x, const CurvatureBundle<double>& bundle);
ResidualReport corollary_agreement(const StructureData& data, const SampleGrid& grid, const CheckConfig& config = {});

// ---- principal curvatures ------------------------------------------------

struct PrincipalCluster {
  double value = 0.0;
  int multiplicity = 0;
  Mat basis;  // g-orthonormal columns
};

struct PrincipalSpectrum {
  int dim = 0;
  std::vector<PrincipalCluster> clusters;  // ascending by value
  double tolerance = 0.0;
  int t_cluster = -1;  // cluster carrying T; -1 when T = 0 or not given
  bool classification_violation = false;  // more than three clusters
  bool well_separated = true;              // gaps exceed 10x tolerance

  double trace() const;  // nH
};

// Labels lambda_n (T cluster), lambda_1 < lambda_2 (the rest). A T cluster
// of multiplicity m > 1 contributes m - 1 to the remaining directions.
// p2 = 0 when only two eigenvalues are present.
struct LabelledSpectrum {
  double lambda_n = 0.0;
  double lambda_1 = 0.0;
  double lambda_2 = 0.0;
  int p1 = 0;
  int p2 = 0;
  int dim = 0;
  double trace = 0.0;
};

// Throws ShapeError when there is no T cluster or more than three clusters.
LabelledSpectrum label_spectrum(const PrincipalSpectrum& spectrum);

// Generalised eigenproblem A v = lambda v with g-orthonormal eigenvectors.
PrincipalSpectrum principal_decomposition(const Mat& shape, const Mat& g, double cluster_tol = 0.0,
                                          const Vec* tangent = nullptr);
PrincipalSpectrum principal_decomposition(const StructureData& data, const Vec& x, double cluster_tol = 0.0);

// Index of the cluster whose eigenspace holds the largest share of v.
int cluster_containing(const PrincipalSpectrum& spectrum, const Mat& g, const Vec& v);

// |AT - (<AT,T>/|T|^2) T| / |T|. Throws ShapeError when T(x) = 0.
double check_T_principal(const StructureData& data, const Vec& x);

// eq1_lambda1, eq1_lambda2 (when p2 > 0), eq2_lambda_n.
ResidualReport check_quadratics(const PrincipalSpectrum& spectrum, double rho, double a, double b, double tnorm2,
                                const Tolerances& tol = Tolerances::defaults());

// Multiplicity laws of the lambda_n = 0 branch. Throws ConstraintError when
// lambda_n is not zero within the spectrum's tolerance. A sign of b that
// contradicts the multiplicities adds a failing branch_consistency entry
// and a flag.
ResidualReport check_multiplicity_laws(const PrincipalSpectrum& spectrum, double b, double tnorm2, int n,
                                       const Tolerances& tol = Tolerances::defaults());

// theta_gradient: |grad theta + (lambda_n + (f'/f) theta) T|; T_geodesic:
// |nabla_U U| for U = T/|T| along integrated curves. Throws ShapeError when
// T vanishes on the whole grid; points with T = 0 are skipped and counted.
ResidualReport check_theta_gradient(const StructureData& data, const SampleGrid& grid, const CheckConfig& config = {});

// log_derivative_phi<i>: phi_i'/phi_i - f'/(|T| f) - theta lambda_i / |T|
// with lambda_i the eigenvalue on fiber i's directions.
ResidualReport check_log_derivative_link(const StructureData& data, const MWPSpec& spec, const SampleGrid& grid,
                                         const CheckConfig& config = {});

// Per-point quantities the ODE system in s needs.
struct SliceQuantities {
  double s = 0.0;
  double lambda_n = 0.0;
  std::vector<double> lambda;  // eigenvalue on fiber i's directions
  double a = 0.0;
  double b = 0.0;
  double tnorm2 = 0.0;
};

SliceQuantities slice_quantities(const StructureData& data, const MWPSpec& spec, const Vec& x,
                                 const CheckConfig& config = {});

// id1_phi<i>, id2_phi<i> (p_i > 1 only), id3. Throws ShapeError unless the
// spec has two fibers.
ResidualReport check_id_system(const MWPSpec& spec, const std::vector<SliceQuantities>& slices,
                               const Tolerances& tol = Tolerances::defaults());

// [X, Y]^k = X^j d_j Y^k - Y^j d_j X^k by central differences.
Vec lie_bracket(const std::function<Vec(const Vec&)>& X, const std::function<Vec(const Vec&)>& Y, const Vec& x,
                double h, bool richardson);

// Bracket of two projector fields spanning D_i (i = 1 or 2) near x,
// projected onto the complement of D_i and divided by the field norms.
// Returns 0 when p_i < 2. Throws IllConditionedError when lambda_i is
// within 10x the clustering tolerance of another eigenvalue.
double involutivity_residual(const StructureData& data, int cluster, const Vec& x, const CheckConfig& config = {});

}  // namespace einhyp
