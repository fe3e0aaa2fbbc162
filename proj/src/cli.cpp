#include "einhyp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "einhyp/classifier.hpp"
#include "einhyp/curvature.hpp"
#include "einhyp/errors.hpp"
#include "einhyp/hypersurface.hpp"
#include "einhyp/mwp.hpp"

namespace einhyp::cli {
namespace {

using json = nlohmann::json;

const std::vector<std::string> kKinds = {"mwp-metric", "structure-data", "example-theorem3", "cylinder-query"};

// Check named in the diagnostic when a command stops on an exception.
std::string check_for(const std::string& command) {
  if (command == "curvature") return "curvature_oracle";
  if (command == "check-structure") return "structure_residuals";
  if (command == "check-einstein") return "einstein_residual";
  if (command == "build-example") return "certify_example";
  if (command == "spread") return "constant_curvature_spread";
  if (command == "lcf") return "weyl_norm";
  if (command == "cylinder") return "lambda_product_agreement";
  return "f_ode";
}

double number_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw SchemaError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

int int_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw SchemaError(std::string("'") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

// Everything a command needs, resolved before any computation starts.
struct Prepared {
  Scene scene;
  CheckConfig check;
  std::optional<CoordinateMetric<double>> metric;
  std::optional<MWPSpec> mwp;
  std::optional<StructureData> structure;
  std::optional<ExampleTheorem3> example;
  double rho = 0.0;
  // cylinder-query
  int n = 0;
  int c = 0;
  // solve-f
  SlopeSign slope = SlopeSign::kIncreasing;
  double window = 3.0;
};

void require_kind(const Scene& scene, const std::string& command, std::initializer_list<const char*> allowed) {
  for (const char* k : allowed) {
    if (scene.kind == k) return;
  }
  std::string list;
  for (const char* k : allowed) list += std::string(list.empty() ? "" : ", ") + k;
  throw SchemaError("command '" + command + "' expects a scene of kind " + list + ", got '" + scene.kind + "'");
}

Prepared prepare(const Options& options) {
  Prepared p;
  p.scene = load_scene(options.scene);
  auto& scene = p.scene;
  if (options.grid) {
    if (*options.grid < 1) throw SchemaError("--grid must be at least 1");
    scene.grid.points_per_axis = *options.grid;
  }
  p.check.seed = options.seed;
  for (const auto& [name, value] : scene.tolerances.items()) {
    if (!value.is_number()) throw SchemaError("tolerance '" + name + "' must be a number");
    if (!p.check.tolerances.contains(name)) throw SchemaError("unknown tolerance name '" + name + "'");
    p.check.tolerances.set(name, value.get<double>());
  }
  for (const auto& t : options.tol) p.check.tolerances.set_from_string(t);

  const auto& cmd = options.command;
  const auto& payload = scene.payload;
  if (cmd == "cylinder") {
    require_kind(scene, cmd, {"cylinder-query"});
    p.n = int_field(payload, "n");
    p.c = int_field(payload, "c");
    p.rho = number_field(payload, "rho");
    if (p.c < -1 || p.c > 1 || p.c == 0) throw SchemaError("'c' must be -1 or 1");
    if (p.n < 2) throw SchemaError("'n' must be at least 2");
    return p;
  }
  if (cmd == "solve-f") {
    // Only n, rho and the optional slope/window are read; the fiber data
    // of a full example spec is ignored.
    require_kind(scene, cmd, {"example-theorem3"});
    p.n = int_field(payload, "n");
    p.rho = number_field(payload, "rho");
    if (payload.contains("slope")) {
      const auto s = payload.at("slope");
      if (s == "increasing") {
        p.slope = SlopeSign::kIncreasing;
      } else if (s == "decreasing") {
        p.slope = SlopeSign::kDecreasing;
      } else {
        throw SchemaError("'slope' must be 'increasing' or 'decreasing'");
      }
    }
    if (payload.contains("window")) p.window = number_field(payload, "window");
    if (!(p.window > 0.0)) throw SchemaError("'window' must be positive");
    if (p.n < 5) throw ConstraintError("solve-f needs n >= 5");
    return p;
  }

  if (cmd == "build-example") require_kind(scene, cmd, {"example-theorem3"});
  if (cmd == "lcf") require_kind(scene, cmd, {"mwp-metric"});
  if (cmd == "check-structure") require_kind(scene, cmd, {"structure-data", "example-theorem3"});
  if (cmd == "curvature" || cmd == "check-einstein" || cmd == "spread") {
    require_kind(scene, cmd, {"mwp-metric", "structure-data", "example-theorem3"});
  }

  if (scene.kind == "mwp-metric") {
    p.mwp = mwp_spec_from_json(payload);
    p.mwp->validate();
    p.metric = build_mwp_metric<double>(*p.mwp);
  } else if (scene.kind == "structure-data") {
    const auto w = warped_structure_from_json(payload);
    w.metric.validate();
    p.mwp = w.metric;
    p.structure = to_structure_data(w);
    p.metric = p.structure->metric;
  } else {
    p.example = build_example_theorem3(example_spec_from_json(payload));
    p.mwp = p.example->metric_spec();
    p.structure = p.example->data;
    p.metric = p.example->data.metric;
    p.rho = p.example->rho;
  }
  if (scene.rho) {
    p.rho = *scene.rho;
    if (p.example) p.example->rho = *scene.rho;
  } else if (cmd == "check-einstein" && !p.example) {
    throw SchemaError("check-einstein on a '" + scene.kind + "' scene needs a top-level 'rho'");
  }
  return p;
}

SampleGrid grid_for(const Prepared& p) {
  return tensor_grid(p.metric->domain(), p.scene.grid, 2.0 * p.check.oracle.margin());
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

// Per point: metric, Christoffel symbols, Ricci, scalar curvature, Weyl
// norm, coordinate-plane sectional curvatures and symmetry residuals.
ResidualReport run_curvature(const Prepared& p, std::string& extra_csv) {
  ResidualReport rep;
  const auto grid = grid_for(p);
  const int n = p.metric->dim();
  json dumps = json::array();
  std::ostringstream csv;
  csv << std::setprecision(17);
  for (int i = 0; i < n; ++i) csv << 'x' << i << ',';
  csv << "scalar,weyl_norm,sectional_min,sectional_max,bianchi\n";
  for (const auto& x : grid.points) {
    const auto b = curvature_oracle(*p.metric, x, p.check.oracle);
    json sec = json::array();
    double smin = INFINITY, smax = -INFINITY;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double k = sectional_curvature(b, Vec::Unit(n, i).eval(), Vec::Unit(n, j).eval());
        sec.push_back({{"plane", {i, j}}, {"value", k}});
        smin = std::min(smin, k);
        smax = std::max(smax, k);
      }
    }
    const auto sym = symmetry_residuals(b);
    const double wn = weyl_norm(b);
    dumps.push_back({{"point", vec_json(x)},
                     {"metric", mat_json(b.metric)},
                     {"christoffel", b.christoffel},
                     {"ricci", mat_json(b.ricci)},
                     {"scalar", b.scalar},
                     {"weyl_norm", wn},
                     {"sectional", sec},
                     {"symmetry",
                      {{"antisymmetry", sym.antisymmetry},
                       {"pair_symmetry", sym.pair_symmetry},
                       {"bianchi", sym.bianchi},
                       {"weyl_trace", sym.weyl_trace},
                       {"scalar_trace", sym.scalar_trace}}}});
    for (int i = 0; i < n; ++i) csv << x(i) << ',';
    csv << b.scalar << ',' << wn << ',' << smin << ',' << smax << ',' << sym.bianchi << '\n';
  }
  rep.extra["grid"] = grid.description;
  rep.extra["bundles"] = std::move(dumps);
  extra_csv = csv.str();
  return rep;
}

ResidualReport run_check_structure(const Prepared& p) {
  const auto grid = grid_for(p);
  auto rep = structure_residuals(*p.structure, grid, p.check);
  rep.absorb(structure_residuals(flipped(*p.structure), grid, p.check), "flipped/");
  return rep;
}

ResidualReport run_spread(const Prepared& p) {
  ResidualReport rep;
  const auto grid = grid_for(p);
  const auto r = constant_curvature_spread(*p.metric, grid, p.scene.random_planes, p.check.seed, p.check.oracle);
  rep.extra["spread"] = {{"min", r.min}, {"max", r.max}, {"spread", r.spread}, {"samples", r.samples},
                         {"grid", grid.description}};
  return rep;
}

ResidualReport run_cylinder(const Prepared& p) {
  ResidualReport rep;
  const auto r = cylinder_identities(p.n, p.c, p.rho);
  rep.add("lambda_product_agreement", r.lambda_product_residual, p.check.tolerances.get("lambda_product_agreement"));
  rep.extra["cylinder"] = to_json(r);
  if (!r.consistent) rep.note(r.explanation);
  return rep;
}

ResidualReport run_solve_f(const Prepared& p, std::string& extra_csv) {
  const auto f = solve_f_ode(p.n, p.rho, p.slope);
  double lo = f.domain().t_min, hi = f.domain().t_max;
  if (!std::isfinite(lo)) lo = hi - p.window;
  if (!std::isfinite(hi)) hi = lo + p.window;
  const double inset = 0.01 * (hi - lo);
  const int samples = p.scene.samples.value_or(101);
  if (samples < 2) throw SchemaError("'samples' must be at least 2");
  const double tol = p.check.tolerances.get("f_ode");
  std::ostringstream csv;
  csv << std::setprecision(17) << "t,f,f_prime,residual\n";
  double worst = 0.0;
  for (double t : linspace(lo + inset, hi - inset, samples)) {
    const auto d = eval_with_derivatives(f, t, 1);
    const double r = f_ode_residual(f, p.n, p.rho, t);
    worst = std::max(worst, std::isnan(r) ? INFINITY : r);
    csv << t << ',' << d[0] << ',' << d[1] << ',' << r << '\n';
  }
  ResidualReport rep;
  std::ostringstream g;
  g << samples << " samples on [" << lo + inset << ", " << hi - inset << "]";
  rep.add("f_ode", worst, tol, g.str());
  rep.extra["f"] = to_json(f);
  extra_csv = csv.str();
  return rep;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> list = {"curvature", "check-structure", "check-einstein", "build-example",
                                                "spread",    "lcf",             "cylinder",       "solve-f"};
  return list;
}

Scene parse_scene(const json& j) {
  if (!j.is_object()) throw SchemaError("scene must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const std::vector<std::string> known = {"kind",  "payload", "grid",    "tolerances",
                                                   "rho",   "samples", "random_planes"};
    if (std::find(known.begin(), known.end(), key) == known.end()) throw SchemaError("unknown scene key '" + key + "'");
  }
  Scene s;
  if (!j.contains("kind") || !j.at("kind").is_string()) throw SchemaError("scene needs a string 'kind'");
  s.kind = j.at("kind").get<std::string>();
  if (std::find(kKinds.begin(), kKinds.end(), s.kind) == kKinds.end()) {
    throw SchemaError("unknown scene kind '" + s.kind + "'");
  }
  if (!j.contains("payload") || !j.at("payload").is_object()) throw SchemaError("scene needs an object 'payload'");
  s.payload = j.at("payload");
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_object()) throw SchemaError("'grid' must be an object");
    if (g.contains("points_per_axis")) s.grid.points_per_axis = int_field(g, "points_per_axis");
    if (g.contains("margin")) s.grid.margin_fraction = number_field(g, "margin");
    if (s.grid.points_per_axis < 1) throw SchemaError("'grid.points_per_axis' must be at least 1");
    if (!(s.grid.margin_fraction >= 0.0 && s.grid.margin_fraction < 0.5)) {
      throw SchemaError("'grid.margin' must lie in [0, 0.5)");
    }
  }
  if (j.contains("tolerances")) {
    if (!j.at("tolerances").is_object()) throw SchemaError("'tolerances' must be an object");
    s.tolerances = j.at("tolerances");
  }
  if (j.contains("rho")) s.rho = number_field(j, "rho");
  if (j.contains("samples")) s.samples = int_field(j, "samples");
  if (j.contains("random_planes")) {
    s.random_planes = int_field(j, "random_planes");
    if (s.random_planes < 0) throw SchemaError("'random_planes' must be non-negative");
  }
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot read scene file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw SchemaError("scene file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scene(j);
}

int run(const Options& options, std::ostream& out, std::ostream& err) {
  const auto& cmds = commands();
  if (std::find(cmds.begin(), cmds.end(), options.command) == cmds.end()) {
    err << "error: unknown command '" << options.command << "'\n";
    return kExitSchema;
  }

  Prepared p;
  try {
    p = prepare(options);
  } catch (const json::exception& e) {
    err << "error: invalid scene: " << e.what() << '\n';
    return kExitSchema;
  } catch (const Error& e) {
    err << "error: invalid scene: " << e.what() << '\n';
    return kExitSchema;
  }

  const std::filesystem::path dir(options.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << options.out << "': " << ec.message() << '\n';
    return kExitSchema;
  }

  json header = {{"command", options.command},
                 {"scene_kind", p.scene.kind},
                 {"seed", options.seed},
                 {"grid", {{"points_per_axis", p.scene.grid.points_per_axis}, {"margin", p.scene.grid.margin_fraction}}},
                 {"tolerance_table", p.check.tolerances.table()}};

  ResidualReport rep;
  std::string extra_csv, extra_name;
  const std::string check = check_for(options.command);
  try {
    const auto& cmd = options.command;
    if (cmd == "curvature") {
      rep = run_curvature(p, extra_csv);
      extra_name = "curvature.csv";
    } else if (cmd == "check-structure") {
      rep = run_check_structure(p);
    } else if (cmd == "check-einstein") {
      rep = einstein_residual(*p.metric, p.rho, grid_for(p), p.check);
      header["rho"] = p.rho;
    } else if (cmd == "build-example") {
      CertifyConfig cfg;
      cfg.check = p.check;
      cfg.grid = p.scene.grid;
      cfg.spread_random_planes = p.scene.random_planes;
      rep = certify_example(*p.example, cfg);
      header["rho"] = p.example->rho;
      header["spec"] = to_json(p.example->spec);
    } else if (cmd == "spread") {
      rep = run_spread(p);
    } else if (cmd == "lcf") {
      rep = two_curvature_lcf_check(*p.mwp, grid_for(p), p.check);
    } else if (cmd == "cylinder") {
      rep = run_cylinder(p);
    } else {
      rep = run_solve_f(p, extra_csv);
      extra_name = "f_samples.csv";
    }
  } catch (const SchemaError& e) {
    err << "error: invalid scene: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    json j = header;
    j["schema_version"] = kReportSchemaVersion;
    j["all_pass"] = false;
    j["error"] = {{"check", check}, {"message", e.what()}};
    try {
      write_file(dir / "report.json", j.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    err << "error: check '" << check << "' stopped: " << e.what() << '\n';
    return kExitFailure;
  }

  json j = to_json(rep);
  j.update(header);
  try {
    write_file(dir / "report.json", j.dump(2) + "\n");
    write_file(dir / "report.csv", to_csv(rep));
    if (!extra_name.empty()) write_file(dir / extra_name, extra_csv);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  const auto failing = rep.failing();
  for (const auto& f : rep.flags()) err << "flag: " << f << '\n';
  if (!failing.empty()) {
    err << "FAIL " << options.command << ":";
    for (const auto& name : failing) {
      const auto* e = rep.find(name);
      err << ' ' << name << " (" << e->residual << " > " << e->tolerance << ')';
    }
    err << '\n';
    return kExitFailure;
  }
  out << "PASS " << options.command << ": " << rep.entries().size() << " checks, report in " << dir.string()
      << '\n';
  return kExitPass;
}

int main(int argc, const char* const* argv) {
  CLI::App app{"Einstein hypersurface checks driven by a JSON scene"};
  Options options;
  std::optional<int> grid;
  app.add_option("--scene", options.scene, "Scene JSON file")->required();
  app.add_option("--out", options.out, "Output directory")->capture_default_str();
  app.add_option("--grid", grid, "Grid points per axis (overrides the scene)");
  app.add_option("--tol", options.tol, "Tolerance override name=value (repeatable)")->allow_extra_args(false);
  app.add_option("--seed", options.seed, "Seed for random planes and directions")->capture_default_str();
  app.require_subcommand(1, 1);
  for (const auto& c : commands()) app.add_subcommand(c)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSchema;
  }
  options.grid = grid;
  options.command = app.get_subcommands().front()->get_name();
  return run(options, std::cout, std::cerr);
}

}  // namespace einhyp::cli
