#include "einhyp/classifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "einhyp/errors.hpp"

namespace einhyp {

using json = nlohmann::json;

// ---- spec ------------------------------------------------------------------

void ExampleTheorem3Spec::validate() const {
  if (n < 5) throw ConstraintError("the three-curvature example needs n >= 5, got " + std::to_string(n));
  if (p1 < 2 || p2 < 2) throw ConstraintError("both multiplicities must be >= 2");
  if (p1 + p2 != n - 1) throw ConstraintError("p1 + p2 must equal n - 1");
  if (!(k1 > 0.0) || !(k2 > 0.0) || !std::isfinite(k1) || !std::isfinite(k2)) {
    throw ConstraintError("fiber curvatures must be positive");
  }
  if (!std::isfinite(rho)) throw ConstraintError("rho must be finite");
  if (rho <= 0.0 && !(window > 0.0)) throw ConstraintError("window must be positive");
}

double ExampleTheorem3Spec::B(int i) const { return std::sqrt((p(i) - 1) * k(i) / (n - 3.0)); }

double ExampleTheorem3Spec::A(int i) const {
  const int j = 3 - i;
  return std::sqrt(double(p(j) - 1) / (p(i) - 1)) * B(i);
}

json to_json(const ExampleTheorem3Spec& s) {
  return {{"n", s.n},   {"p1", s.p1},   {"p2", s.p2},
          {"k1", s.k1}, {"k2", s.k2},   {"rho", s.rho},
          {"slope", s.slope == SlopeSign::kDecreasing ? "decreasing" : "increasing"},
          {"window", s.window}};
}

ExampleTheorem3Spec example_spec_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("example spec must be an object");
  ExampleTheorem3Spec s;
  auto integer = [&](const char* key, int& out) {
    if (!j.contains(key)) throw SchemaError(std::string("example spec missing '") + key + "'");
    if (!j.at(key).is_number_integer()) throw SchemaError(std::string("'") + key + "' must be an integer");
    out = j.at(key).get<int>();
  };
  auto real = [&](const char* key, double& out, bool required) {
    if (!j.contains(key)) {
      if (required) throw SchemaError(std::string("example spec missing '") + key + "'");
      return;
    }
    if (!j.at(key).is_number()) throw SchemaError(std::string("'") + key + "' must be a number");
    out = j.at(key).get<double>();
  };
  integer("n", s.n);
  integer("p1", s.p1);
  integer("p2", s.p2);
  real("k1", s.k1, true);
  real("k2", s.k2, true);
  real("rho", s.rho, true);
  real("window", s.window, false);
  if (j.contains("slope")) {
    const auto v = j.at("slope");
    if (v == "decreasing") {
      s.slope = SlopeSign::kDecreasing;
    } else if (v != "increasing") {
      throw SchemaError("'slope' must be 'increasing' or 'decreasing'");
    }
  }
  return s;
}

// ---- construction ------------------------------------------------------

ExampleTheorem3 build_example_theorem3(const ExampleTheorem3Spec& spec) {
  spec.validate();
  ExampleTheorem3 ex;
  ex.spec = spec;
  ex.rho = spec.rho;
  ex.f = solve_f_ode(spec.n, spec.rho, spec.slope);
  IntervalDomain base = ex.f.domain();
  if (!base.bounded()) {
    base = spec.slope == SlopeSign::kDecreasing ? IntervalDomain::make(-spec.window, 0.0)
                                                : IntervalDomain::make(0.0, spec.window);
  }
  MWPSpec metric;
  metric.base = base;
  for (int i = 1; i <= 2; ++i) {
    const int j = 3 - i;
    const SmoothFn phi = spec.B(i) * ex.f;
    const double sign = i == 1 ? -1.0 : 1.0;
    const SmoothFn lambda = SmoothFn::constant(sign * std::sqrt(double(spec.p(j) - 1) / (spec.p(i) - 1))) / ex.f;
    ex.phi.push_back(phi);
    ex.lambda.push_back(lambda);
    metric.fibers.push_back({SpaceFormChart::make(spec.p(i), spec.k(i)), phi});
  }
  WarpedStructure& w = ex.warped;
  w.metric = metric;
  w.shape_base = SmoothFn::constant(0.0);
  w.shape_fibers = ex.lambda;
  w.tangent_s = SmoothFn::constant(1.0);
  w.theta = SmoothFn::constant(0.0);
  w.height = SmoothFn::variable();
  w.f = ex.f;
  w.c = 1;
  ex.data = to_structure_data(w);
  return ex;
}

double ExampleTheorem3::reference_s() const {
  // For rho > 0 the middle of (0, pi/w) is where f' = 0.
  const auto& base = warped.metric.base;
  return 0.5 * (base.t_min + base.t_max);
}

// ---- spread and conformal flatness -----------------------------------------

SpreadResult constant_curvature_spread(const CoordinateMetric<double>& metric, const SampleGrid& grid,
                                       int random_planes, std::uint64_t seed, const OracleConfig& oracle) {
  OracleConfig oc = oracle;
  oc.compute_weyl = false;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int n = metric.dim();
  SpreadResult out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -out.min;
  auto take = [&](double v) {
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
    ++out.samples;
  };
  for (const auto& x : grid.points) {
    const auto b = curvature_oracle(metric, x, oc);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) take(sectional_curvature<double>(b, Vec::Unit(n, i), Vec::Unit(n, j)));
    for (int q = 0; q < random_planes; ++q) {
      Vec u(n), v(n);
      for (int i = 0; i < n; ++i) {
        u(i) = gauss(rng);
        v(i) = gauss(rng);
      }
      take(sectional_curvature(b, u, v));
    }
  }
  out.spread = out.samples > 0 ? out.max - out.min : 0.0;
  return out;
}

ResidualReport two_curvature_lcf_check(const MWPSpec& spec, const SampleGrid& grid, const CheckConfig& config) {
  if (spec.fibers.size() != 1) throw ShapeError("conformal-flatness check needs exactly one fiber");
  if (spec.total_dim() < 4) throw ConstraintError("Weyl vanishing is only meaningful in dimension >= 4");
  const auto metric = build_mwp_metric<double>(spec);
  OracleConfig oc = config.oracle;
  oc.compute_weyl = true;
  double worst = 0.0;
  for (const auto& x : grid.points) worst = std::max(worst, weyl_norm(curvature_oracle(metric, x, oc)));
  ResidualReport rep;
  rep.add("weyl_norm", worst, config.tolerances.get("weyl_norm"), grid.description);
  return rep;
}

// ---- cylinder ------------------------------------------------------------

CylinderReport cylinder_identities(int n, int c, double rho) {
  if (c != 1 && c != -1) throw ConstraintError("cylinder identities need c = 1 or c = -1");
  CylinderReport r;
  r.tnorm2 = ((n - 1) * c - rho) / (2.0 * c);
  r.lambda_product_from_t = -c * r.tnorm2;
  r.lambda_product_from_rho = rho - (n - 1) * c + c * r.tnorm2;
  r.lambda_product_residual = std::abs(r.lambda_product_from_t - r.lambda_product_from_rho);
  if (r.tnorm2 < 0.0 || r.tnorm2 > 1.0) {
    r.solvable = false;
    r.consistent = false;
    r.explanation = "no solution: |T|^2 = " + std::to_string(r.tnorm2) + " lies outside [0, 1]";
    return r;
  }
  r.solvable = true;
  r.theta = std::sqrt(1.0 - r.tnorm2);
  r.consistent = false;
  if (r.tnorm2 == 0.0) {
    r.degenerate_t = true;
    r.explanation = "|T|^2 = 0 contradicts T != 0";
  } else {
    r.explanation = "|T|^2 is forced to a constant, so theta is constant; this contradicts three distinct principal "
                    "curvatures";
  }
  return r;
}

json to_json(const CylinderReport& r) {
  json j = {{"solvable", r.solvable},
            {"consistent", r.consistent},
            {"degenerate_T", r.degenerate_t},
            {"Tnorm2", r.tnorm2},
            {"lambda_product_from_T", r.lambda_product_from_t},
            {"lambda_product_from_rho", r.lambda_product_from_rho},
            {"lambda_product_residual", r.lambda_product_residual},
            {"explanation", r.explanation}};
  j["theta"] = r.solvable ? json(r.theta) : json(nullptr);
  return j;
}

// ---- certification ---------------------------------------------------------

namespace {

struct Max {
  double v = 0.0;
  void operator()(double x) {
    if (!(v >= x)) v = x;  // keeps NaN
  }
};

}  // namespace

ResidualReport certify_example(const ExampleTheorem3& ex, const CertifyConfig& config) {
  const auto& spec = ex.spec;
  const auto& data = ex.data;
  const auto& mspec = ex.metric_spec();
  const auto& tol = config.check.tolerances;
  const int n = spec.n;
  const double rho = ex.rho;
  const auto box = mwp_box(mspec);
  OracleConfig oc = config.check.oracle;
  oc.compute_weyl = false;

  ResidualReport rep;
  rep.orientation = orientation_name(data.orientation);

  // Pointwise curvature checks on the tensor grid, one oracle call per point.
  const auto grid = tensor_grid(box, config.grid, 2.0 * oc.margin());
  const StructureEvaluator eval(data, config.check);
  std::optional<StructureData> flipped_data;
  std::optional<StructureEvaluator> flipped_eval;
  if (config.extended) {
    flipped_data = flipped(data);
    flipped_eval.emplace(*flipped_data, config.check);
  }
  Max einstein, corollary;
  Max worst[7], fworst[7];
  auto absorb = [](Max* w, const StructurePointResiduals& r) {
    w[0](r.self_adjoint);
    w[1](r.unit_decomposition);
    w[2](r.tangent_hessian);
    w[3](r.angle_gradient);
    w[4](r.codazzi);
    w[5](r.gauss);
    w[6](r.t_gradient);
  };
  for (const auto& x : grid.points) {
    const auto bundle = curvature_oracle(data.metric, x, oc);
    einstein(einstein_defect(bundle, rho));
    absorb(worst, eval.at(x, bundle));
    corollary(corollary_defect(data, x, bundle));
    if (flipped_eval) absorb(fworst, flipped_eval->at(x, bundle));
  }
  static const char* kStructureNames[7] = {"A_self_adjoint",   "B_unit_decomposition", "C_tangent_hessian",
                                           "D_angle_gradient", "E_codazzi",            "F_gauss",
                                           "T_gradient_of_height"};
  const auto& gd = grid.description;
  rep.add("einstein_residual", einstein.v, tol.get("einstein_residual"), gd);
  for (int q = 0; q < 7; ++q) rep.add(kStructureNames[q], worst[q].v, tol.get(kStructureNames[q]), gd);
  rep.add("ricci_corollary_agreement", corollary.v, tol.get("ricci_corollary_agreement"), gd);
  if (flipped_eval) {
    for (int q = 0; q < 7; ++q) {
      rep.add(std::string("flipped/") + kStructureNames[q], fworst[q].v, tol.get(kStructureNames[q]), gd);
    }
  }

  // Plane classes and spread at the reference point.
  const double s_ref = ex.reference_s();
  Vec x_ref = 0.5 * (box.lower + box.upper);
  x_ref(0) = s_ref;
  {
    const auto b = curvature_oracle(data.metric, x_ref, oc);
    const int o1 = mspec.fiber_offset(0), o2 = mspec.fiber_offset(1);
    auto e = [n](int i) -> Vec { return Vec::Unit(n, i); };
    struct Cls {
      const char* name;
      double oracle;
      double closed;
    };
    const std::vector<Cls> classes = {
        {"base_fiber1", sectional_curvature(b, e(0), e(o1)), mwp_sectional_closed_form(mspec, s_ref, PlaneClass::kBaseFiber, 0)},
        {"base_fiber2", sectional_curvature(b, e(0), e(o2)), mwp_sectional_closed_form(mspec, s_ref, PlaneClass::kBaseFiber, 1)},
        {"within_fiber1", sectional_curvature(b, e(o1), e(o1 + 1)), mwp_sectional_closed_form(mspec, s_ref, PlaneClass::kWithinFiber, 0)},
        {"within_fiber2", sectional_curvature(b, e(o2), e(o2 + 1)), mwp_sectional_closed_form(mspec, s_ref, PlaneClass::kWithinFiber, 1)},
        {"mixed", sectional_curvature(b, e(o1), e(o2)), mwp_sectional_closed_form(mspec, s_ref, PlaneClass::kMixed)},
    };
    Max dev;
    double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
    json cj = json::object();
    for (const auto& c : classes) {
      dev(std::abs(c.oracle - c.closed));
      cmin = std::min(cmin, c.closed);
      cmax = std::max(cmax, c.closed);
      cj[c.name] = {{"oracle", c.oracle}, {"closed_form", c.closed}};
    }
    const std::string at = "s = " + std::to_string(s_ref) + ", fiber coordinates at the chart centre";
    rep.add("plane_classes", dev.v, tol.get("plane_classes"), at);
    SampleGrid one;
    one.points.push_back(x_ref);
    const auto spread = constant_curvature_spread(data.metric, one, config.spread_random_planes, config.check.seed, oc);
    rep.add("spread_shortfall", std::max(0.0, (cmax - cmin) - spread.spread), tol.get("spread_shortfall"), at);
    rep.extra["reference_s"] = s_ref;
    rep.extra["plane_classes"] = cj;
    rep.extra["spread"] = {{"min", spread.min}, {"max", spread.max}, {"spread", spread.spread},
                           {"samples", spread.samples}, {"closed_form_spread", cmax - cmin}};
  }

  // Algebraic laws along the base.
  const auto& base = mspec.base;
  std::vector<double> s_values;
  for (int k = 1; k <= config.line_points; ++k) {
    s_values.push_back(base.t_min + base.length() * k / (config.line_points + 1.0));
  }
  const auto line = base_line_grid(box, s_values);
  const double A1 = spec.A(1), A2 = spec.A(2), B1 = spec.B(1), B2 = spec.B(2);
  const int p1 = spec.p1, p2 = spec.p2;
  const double w2 = rho / (n - 1.0);
  std::vector<SliceQuantities> slices;
  ResidualReport laws;
  Max three_sum, three_prod, three_lin, eq1p[2], id1p[2], id2p[2], id3p, multiple, linrela[2], b_pos, t_principal;
  for (const auto& x : line.points) {
    const auto spectrum = principal_decomposition(data, x, config.check.cluster_tol);
    const auto q = slice_quantities(data, mspec, x, config.check);
    slices.push_back(q);
    laws.absorb(check_quadratics(spectrum, rho, q.a, q.b, q.tnorm2, tol));
    laws.absorb(check_multiplicity_laws(spectrum, q.b, q.tnorm2, n, tol));
    t_principal(check_T_principal(data, x));
    const double l1 = q.lambda[0], l2 = q.lambda[1];
    const double nH = spectrum.trace();
    three_sum(std::abs(q.a + q.tnorm2 * q.b + w2));
    three_prod(std::abs(l1 * l2 + (n - 2) * q.tnorm2 * q.b));
    three_lin(std::abs((p1 - 1) * l1 + (p2 - 1) * l2));
    b_pos(q.b > 0.0 ? 0.0 : 1.0);
    std::vector<double> ph[2];
    for (int i = 0; i < 2; ++i) {
      const int pj = i == 0 ? p2 : p1;
      const double li = q.lambda[static_cast<std::size_t>(i)];
      const double ki = spec.k(i + 1);
      ph[i] = eval_with_derivatives(ex.phi[static_cast<std::size_t>(i)], q.s, 2);
      eq1p[i](std::abs(li * li - nH * li - (n - 2) * q.tnorm2 * q.b));
      id1p[i](std::abs(ph[i][2] + w2 * ph[i][0]));
      const double coeff = (n - 3.0) * pj / ((n - 2.0) * (pj - 1.0));
      id2p[i](std::abs(ph[i][1] * ph[i][1] + (coeff * li * li + w2) * ph[i][0] * ph[i][0] - ki));
    }
    id3p(std::abs(ph[0][1] * ph[1][1] + (w2 + (n - 3.0) / (n - 2.0) * l1 * l2) * ph[0][0] * ph[1][0]));
    multiple(std::abs(ph[1][0] / ph[0][0] - (p2 - 1) * A2 / ((p1 - 1) * A1)));
    linrela[0](std::abs(ph[0][0] + A1 / l1));
    linrela[1](std::abs(ph[1][0] - A2 / l2));
  }
  const std::string lg = line.description;
  for (const auto& e : laws.entries()) rep.add(e.name, e.residual, e.tolerance, lg);
  for (const auto& m : laws.notices()) rep.note(m);
  for (const auto& f : laws.flags()) rep.flag(f);
  rep.add("T_principal", t_principal.v, tol.get("T_principal"), lg);
  rep.add("threeEQ_sum", three_sum.v, tol.get("threeEQ_sum"), lg);
  rep.add("threeEQ_product", three_prod.v, tol.get("threeEQ_product"), lg);
  rep.add("threeEQ_linear", three_lin.v, tol.get("threeEQ_linear"), lg);
  rep.add("b_positive", b_pos.v, tol.get("b_positive"), lg);
  for (int i = 0; i < 2; ++i) {
    const std::string sfx = std::to_string(i + 1);
    rep.add("eq1p_lambda" + sfx, eq1p[i].v, tol.get("eq1p_lambda" + sfx), lg);
    rep.add("id1p_phi" + sfx, id1p[i].v, tol.get("id1p_phi" + sfx), lg);
    rep.add("id2p_phi" + sfx, id2p[i].v, tol.get("id2p_phi" + sfx), lg);
    rep.add("linrela_phi" + sfx, linrela[i].v, tol.get("linrela_phi" + sfx), lg);
  }
  rep.add("id3p", id3p.v, tol.get("id3p"), lg);
  rep.add("multiple", multiple.v, tol.get("multiple"), lg);
  rep.absorb(check_id_system(mspec, slices, tol));
  rep.absorb(check_log_derivative_link(data, mspec, line, config.check));
  rep.add("rela1_ratio", std::abs((p1 - 1) * A1 / B1 - (p2 - 1) * A2 / B2), tol.get("rela1_ratio"), "constants");
  rep.add("rela1_k1", std::abs(spec.k1 - (n - 3) * A1 * A1 / (p2 - 1)), tol.get("rela1_k1"), "constants");
  rep.add("rela1_k2", std::abs(spec.k2 - (n - 3) * A2 * A2 / (p1 - 1)), tol.get("rela1_k2"), "constants");
  rep.add("A1A2_B1B2", std::abs(A1 * A2 - B1 * B2), tol.get("A1A2_B1B2"), "constants");
  {
    Max fode;
    for (double s : s_values) fode(f_ode_residual(ex.f, n, rho, s));
    rep.add("f_ode", fode.v, tol.get("f_ode"), lg);
  }

  if (config.extended) {
    rep.absorb(check_theta_gradient(data, line, config.check));
    for (int i = 1; i <= 2; ++i) {
      const std::string name = "involutivity_D" + std::to_string(i);
      rep.add(name, involutivity_residual(data, i, x_ref, config.check), tol.get(name),
              "s = " + std::to_string(s_ref) + ", fiber coordinates at the chart centre");
    }
  }
  rep.note("orientation checked as supplied" + std::string(config.extended ? " and flipped (A, theta) -> (-A, -theta)" : ""));
  return rep;
}

// ---- sweep -----------------------------------------------------------------

std::vector<ExampleTheorem3Spec> sweep_specs(const std::vector<int>& dims, const std::vector<double>& curvatures) {
  std::vector<ExampleTheorem3Spec> out;
  for (int n : dims)
    for (int p1 = 2; n - 1 - p1 >= 2; ++p1)
      for (double k1 : curvatures)
        for (double k2 : curvatures)
          for (double rho : {double(n - 1), 2.0 * (n - 1)}) {
            ExampleTheorem3Spec s;
            s.n = n;
            s.p1 = p1;
            s.p2 = n - 1 - p1;
            s.k1 = k1;
            s.k2 = k2;
            s.rho = rho;
            out.push_back(s);
          }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::vector<std::string> names;
  for (const auto& r : rows)
    for (const auto& e : r.report.entries()) {
      if (std::find(names.begin(), names.end(), e.name) == names.end()) names.push_back(e.name);
    }
  std::ostringstream os;
  os << "n,p1,p2,k1,k2,rho";
  for (const auto& name : names) os << ',' << name;
  os << ",all_pass,seconds\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.spec.n << ',' << r.spec.p1 << ',' << r.spec.p2 << ',' << r.spec.k1 << ',' << r.spec.k2 << ','
       << r.spec.rho;
    for (const auto& name : names) {
      os << ',';
      if (const auto* e = r.report.find(name)) os << e->residual;
    }
    os << ',' << (r.report.all_pass() ? "true" : "false") << ',' << r.seconds << '\n';
  }
  return os.str();
}

}  // namespace einhyp
