#pragma once

// Multiply warped products  J x_{phi_1} N_1 x_{phi_2} N_2  with metric
//   g = ds^2 + phi_1(s)^2 g_1 + phi_2(s)^2 g_2,
// each fiber a space form given by its conformal chart. Coordinates are
// (s, x^(1), x^(2)) in that order.

#include <vector>

#include <json.hpp>

#include "einhyp/coordinate_metric.hpp"
#include "einhyp/scalarfun.hpp"
#include "einhyp/spaceform.hpp"

namespace einhyp {

struct FiberSpec {
  SpaceFormChart chart;  // chart.dim is the fiber dimension p_i
  SmoothFn warping;

  int dim() const { return chart.dim; }
  double curvature() const { return chart.curvature; }
};

struct MWPSpec {
  IntervalDomain base;
  std::vector<FiberSpec> fibers;

  int total_dim() const;
  // Offset of the first coordinate of fiber i.
  int fiber_offset(std::size_t i) const;

  // Throws ConstraintError: more than two fibers, unbounded base, or a
  // warping that is not positive on the base (checked on 64 samples plus
  // the warping's own domain).
  void validate() const;
};

// Base interval x fiber chart boxes.
CoordinateBox<double> mwp_box(const MWPSpec& spec);

template <typename Scalar>
CoordinateMetric<Scalar> build_mwp_metric(const MWPSpec& spec) {
  spec.validate();
  const auto box = mwp_box(spec);
  CoordinateBox<Scalar> sbox{box.lower.template cast<Scalar>(), box.upper.template cast<Scalar>()};
  struct Block {
    int offset;
    int dim;
    double k;
    SmoothFn phi;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < spec.fibers.size(); ++i) {
    const auto& f = spec.fibers[i];
    blocks.push_back({spec.fiber_offset(i), f.dim(), f.curvature(), f.warping});
  }
  const int n = spec.total_dim();
  return CoordinateMetric<Scalar>(std::move(sbox), [blocks, n](const VecX<Scalar>& x, MatX<Scalar>& g) {
    g.setZero(n, n);
    g(0, 0) = Scalar(1);
    for (const auto& b : blocks) {
      const Scalar phi = b.phi.evaluate(x(0));
      const Scalar factor = phi * phi * space_form_factor<Scalar>(b.k, x.segment(b.offset, b.dim));
      g.diagonal().segment(b.offset, b.dim).setConstant(factor);
    }
  });
}

enum class PlaneClass { kBaseFiber, kWithinFiber, kMixed };

// Sectional curvature of a plane class from the warping functions:
//   base-fiber_i : -phi_i'' / phi_i
//   within fiber_i: (k_i - phi_i'^2) / phi_i^2   (requires p_i >= 2)
//   mixed        : -phi_1' phi_2' / (phi_1 phi_2)
// Throws ShapeError for a missing fiber or a within-fiber plane on a
// one-dimensional fiber.
double mwp_sectional_closed_form(const MWPSpec& spec, double s, PlaneClass plane, std::size_t fiber = 0);

nlohmann::json to_json(const MWPSpec& spec);
MWPSpec mwp_spec_from_json(const nlohmann::json& j);

}  // namespace einhyp
