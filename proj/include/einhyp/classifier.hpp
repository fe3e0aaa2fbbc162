#pragma once

// Theorem-level constructors and verifiers: the explicit Einstein example
// with three principal curvatures and lambda_n = 0, the constant-curvature
// and conformal-flatness tests, and the cylinder reporter.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "einhyp/hypersurface.hpp"
#include "einhyp/mwp.hpp"
#include "einhyp/report.hpp"
#include "einhyp/sampling.hpp"
#include "einhyp/scalarfun.hpp"

namespace einhyp {

struct ExampleTheorem3Spec {
  int n = 5;
  int p1 = 2;
  int p2 = 2;
  double k1 = 1.0;
  double k2 = 1.0;
  double rho = 4.0;
  // Only used when rho <= 0, where f lives on a half-line: the base is cut
  // to an interval of this length next to t = 0.
  SlopeSign slope = SlopeSign::kIncreasing;
  double window = 3.0;

  // Throws ConstraintError.
  void validate() const;
  int p(int i) const { return i == 1 ? p1 : p2; }
  double k(int i) const { return i == 1 ? k1 : k2; }
  // B_i = sqrt((p_i - 1) k_i / (n - 3)),  A_i = sqrt((p_j - 1)/(p_i - 1)) B_i.
  double B(int i) const;
  double A(int i) const;
};

nlohmann::json to_json(const ExampleTheorem3Spec& spec);
ExampleTheorem3Spec example_spec_from_json(const nlohmann::json& j);

struct ExampleTheorem3 {
  ExampleTheorem3Spec spec;
  SmoothFn f;
  std::vector<SmoothFn> phi;     // phi_i = B_i f
  std::vector<SmoothFn> lambda;  // lambda_i = (-1)^i sqrt((p_j-1)/(p_i-1)) / f
  WarpedStructure warped;
  StructureData data;
  double rho = 0.0;

  const MWPSpec& metric_spec() const { return warped.metric; }
  // Base point where f' = 0 (rho > 0), otherwise the middle of the base.
  double reference_s() const;
};

ExampleTheorem3 build_example_theorem3(const ExampleTheorem3Spec& spec);

struct SpreadResult {
  double min = 0.0;
  double max = 0.0;
  double spread = 0.0;
  std::size_t samples = 0;
};

// Sectional curvature over every coordinate plane plus `random_planes`
// random planes at each grid point.
SpreadResult constant_curvature_spread(const CoordinateMetric<double>& metric, const SampleGrid& grid,
                                       int random_planes, std::uint64_t seed = 0, const OracleConfig& oracle = {});

// weyl_norm sampled over the grid. Throws ShapeError unless `spec` has
// exactly one fiber, ConstraintError when the total dimension is below 4.
ResidualReport two_curvature_lcf_check(const MWPSpec& spec, const SampleGrid& grid, const CheckConfig& config = {});

struct CylinderReport {
  bool solvable = false;     // |T|^2 in [0, 1]
  double tnorm2 = 0.0;
  double theta = 0.0;        // sqrt(1 - |T|^2) when solvable
  bool degenerate_t = false; // |T|^2 = 0 contradicts T != 0
  bool consistent = false;   // false: the three-curvature case is ruled out
  double lambda_product_from_t = 0.0;    // -c |T|^2
  double lambda_product_from_rho = 0.0;  // rho - (n-1) c + c |T|^2
  double lambda_product_residual = 0.0;
  std::string explanation;
};

// f = 1: solves 2c|T|^2 = (n-1)c - rho. Throws ConstraintError for c = 0.
CylinderReport cylinder_identities(int n, int c, double rho);
nlohmann::json to_json(const CylinderReport& r);

struct CertifyConfig {
  CheckConfig check;
  GridConfig grid;
  int line_points = 50;
  int spread_random_planes = 10;
  // Adds the flipped orientation, theta gradient, involutivity and the
  // T-principal check to the suite.
  bool extended = true;
};

// Einstein residual, (A)-(F), Ricci corollary agreement, plane classes and
// spread at the reference point, and the algebraic laws along the base.
ResidualReport certify_example(const ExampleTheorem3& ex, const CertifyConfig& config = {});

// Every valid spec for the given dimensions and curvature values, with
// rho in {n-1, 2(n-1)}.
std::vector<ExampleTheorem3Spec> sweep_specs(const std::vector<int>& dims, const std::vector<double>& curvatures);

struct SweepRow {
  ExampleTheorem3Spec spec;
  ResidualReport report;
  double seconds = 0.0;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace einhyp
