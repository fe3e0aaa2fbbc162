#include "einhyp/mwp.hpp"

#include <string>

#include "einhyp/errors.hpp"

namespace einhyp {

using json = nlohmann::json;

int MWPSpec::total_dim() const {
  int n = 1;
  for (const auto& f : fibers) n += f.dim();
  return n;
}

int MWPSpec::fiber_offset(std::size_t i) const {
  int off = 1;
  for (std::size_t q = 0; q < i; ++q) off += fibers[q].dim();
  return off;
}

void MWPSpec::validate() const {
  if (fibers.empty() || fibers.size() > 2) throw ConstraintError("a warped product needs one or two fibers");
  if (!base.bounded()) throw ConstraintError("base interval must be bounded");
  for (std::size_t i = 0; i < fibers.size(); ++i) {
    const auto& f = fibers[i];
    if (f.dim() < 1) throw ConstraintError("fiber dimension must be >= 1");
    const auto& d = f.warping.domain();
    if (d.t_min > base.t_min || d.t_max < base.t_max) {
      throw ConstraintError("warping " + std::to_string(i + 1) + " is not defined on the whole base");
    }
    constexpr int kSamples = 64;
    for (int q = 0; q <= kSamples; ++q) {
      const double s = base.t_min + base.length() * (q + 0.5) / (kSamples + 1);
      const double v = f.warping.evaluate(s);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConstraintError("warping " + std::to_string(i + 1) + " is not positive at s = " + std::to_string(s));
      }
    }
  }
}

CoordinateBox<double> mwp_box(const MWPSpec& spec) {
  const int n = spec.total_dim();
  Vec lo(n), hi(n);
  lo(0) = spec.base.t_min;
  hi(0) = spec.base.t_max;
  for (std::size_t i = 0; i < spec.fibers.size(); ++i) {
    const auto b = spec.fibers[i].chart.box();
    lo.segment(spec.fiber_offset(i), b.dim()) = b.lower;
    hi.segment(spec.fiber_offset(i), b.dim()) = b.upper;
  }
  return {lo, hi};
}

double mwp_sectional_closed_form(const MWPSpec& spec, double s, PlaneClass plane, std::size_t fiber) {
  if (!spec.base.contains(s)) throw DomainError("s = " + std::to_string(s) + " outside base interval");
  auto jets = [&](std::size_t i) {
    if (i >= spec.fibers.size()) throw ShapeError("fiber " + std::to_string(i + 1) + " does not exist");
    return eval_with_derivatives(spec.fibers[i].warping, s, 2);
  };
  switch (plane) {
    case PlaneClass::kBaseFiber: {
      const auto p = jets(fiber);
      return -p[2] / p[0];
    }
    case PlaneClass::kWithinFiber: {
      const auto p = jets(fiber);
      if (spec.fibers[fiber].dim() < 2) throw ShapeError("within-fiber plane needs a fiber of dimension >= 2");
      return (spec.fibers[fiber].curvature() - p[1] * p[1]) / (p[0] * p[0]);
    }
    case PlaneClass::kMixed: {
      if (spec.fibers.size() != 2) throw ShapeError("mixed plane needs two fibers");
      const auto p1 = jets(0);
      const auto p2 = jets(1);
      return -p1[1] * p2[1] / (p1[0] * p2[0]);
    }
  }
  return 0.0;
}

json to_json(const MWPSpec& spec) {
  json j;
  j["base"] = {{"min", spec.base.t_min}, {"max", spec.base.t_max}};
  j["fibers"] = json::array();
  for (const auto& f : spec.fibers) {
    j["fibers"].push_back({{"dim", f.dim()},
                           {"curvature", f.curvature()},
                           {"chart_radius", f.chart.radius},
                           {"warping", to_json(f.warping)}});
  }
  return j;
}

MWPSpec mwp_spec_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("warped-product spec must be an object");
  if (!j.contains("base")) throw SchemaError("warped-product spec missing 'base'");
  if (!j.contains("fibers") || !j.at("fibers").is_array()) throw SchemaError("warped-product spec missing 'fibers' array");
  MWPSpec spec;
  spec.base = interval_from_json(j.at("base"));
  if (!spec.base.bounded()) throw SchemaError("'base' must be bounded");
  const auto& fibers = j.at("fibers");
  if (fibers.empty() || fibers.size() > 2) throw SchemaError("'fibers' must hold one or two entries");
  for (const auto& fj : fibers) {
    if (!fj.is_object()) throw SchemaError("fiber entry must be an object");
    for (const char* key : {"dim", "curvature", "warping"}) {
      if (!fj.contains(key)) throw SchemaError(std::string("fiber entry missing '") + key + "'");
    }
    if (!fj.at("dim").is_number_integer() || fj.at("dim").get<int>() < 1) {
      throw SchemaError("fiber 'dim' must be a positive integer");
    }
    if (!fj.at("curvature").is_number()) throw SchemaError("fiber 'curvature' must be a number");
    double radius = 0.0;
    if (fj.contains("chart_radius")) {
      if (!fj.at("chart_radius").is_number()) throw SchemaError("'chart_radius' must be a number");
      radius = fj.at("chart_radius").get<double>();
    }
    FiberSpec f;
    try {
      f.chart = SpaceFormChart::make(fj.at("dim").get<int>(), fj.at("curvature").get<double>(), radius);
    } catch (const ConstraintError& e) {
      throw SchemaError(e.what());
    }
    f.warping = smooth_fn_from_json(fj.at("warping"));
    spec.fibers.push_back(std::move(f));
  }
  return spec;
}

}  // namespace einhyp
