#include "einhyp/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "einhyp/errors.hpp"

namespace einhyp {

using json = nlohmann::json;

Tolerances Tolerances::defaults() {
  Tolerances t;
  auto& m = t.table_;
  for (const char* name : {"A_self_adjoint", "B_unit_decomposition", "C_tangent_hessian", "D_angle_gradient",
                           "E_codazzi", "F_gauss", "T_gradient_of_height", "einstein_residual",
                           "ricci_corollary_agreement", "theta_gradient", "T_geodesic", "weyl_norm"}) {
    m[name] = 1e-6;
  }
  m["sectional_vs_closed_form"] = 1e-5;
  m["plane_classes"] = 1e-3;
  m["spread_shortfall"] = 1e-3;
  for (const char* name : {"T_principal", "eq1_lambda1", "eq1_lambda2", "eq2_lambda_n", "eq1p_lambda1",
                           "eq1p_lambda2", "intsyst_product", "intsyst_sum", "lambda_squares", "log_derivative_phi1",
                           "log_derivative_phi2", "id1_phi1", "id1_phi2", "id2_phi1", "id2_phi2", "id3",
                           "id1p_phi1", "id1p_phi2", "id2p_phi1", "id2p_phi2", "id3p", "threeEQ_sum",
                           "threeEQ_product", "threeEQ_linear", "rela1_ratio", "rela1_k1", "rela1_k2",
                           "A1A2_B1B2", "multiple", "linrela_phi1", "linrela_phi2", "f_ode"}) {
    m[name] = 1e-9;
  }
  m["f_ode"] = 1e-10;
  m["threeEQ_sum"] = 1e-10;
  m["multiple"] = 1e-12;
  m["involutivity_D1"] = 1e-5;
  m["involutivity_D2"] = 1e-5;
  m["branch_consistency"] = 0.0;
  m["b_positive"] = 0.0;
  m["lambda_product_agreement"] = 1e-12;
  return t;
}

double Tolerances::get(const std::string& name) const {
  const auto it = table_.find(name);
  if (it == table_.end()) throw SchemaError("no tolerance named '" + name + "'");
  return it->second;
}

void Tolerances::set(const std::string& name, double value) {
  if (!contains(name)) throw SchemaError("unknown tolerance '" + name + "'");
  if (!(value >= 0.0) || !std::isfinite(value)) throw SchemaError("tolerance '" + name + "' must be finite and >= 0");
  table_[name] = value;
}

void Tolerances::set_from_string(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw SchemaError("tolerance override must be name=value: " + assignment);
  const std::string name = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw SchemaError("tolerance '" + name + "' is not a number: " + value);
  }
  set(name, v);
}

void ResidualReport::add(const std::string& name, double residual, double tolerance, const std::string& grid) {
  entries_.push_back({name, residual, tolerance, residual <= tolerance, grid});
}

void ResidualReport::absorb(const ResidualReport& other, const std::string& prefix) {
  for (const auto& e : other.entries_) {
    const std::string name = prefix + e.name;
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ResidualEntry& x) { return x.name == name; });
    if (it == entries_.end()) {
      ResidualEntry copy = e;
      copy.name = name;
      entries_.push_back(std::move(copy));
    } else if (!(it->residual >= e.residual)) {
      it->residual = e.residual;
      it->pass = it->residual <= it->tolerance;
    }
  }
  for (const auto& n : other.notices_) {
    if (std::find(notices_.begin(), notices_.end(), prefix + n) == notices_.end()) notices_.push_back(prefix + n);
  }
  for (const auto& f : other.flags_) {
    if (std::find(flags_.begin(), flags_.end(), prefix + f) == flags_.end()) flags_.push_back(prefix + f);
  }
}

void ResidualReport::note(const std::string& message) { notices_.push_back(message); }
void ResidualReport::flag(const std::string& message) { flags_.push_back(message); }

bool ResidualReport::all_pass() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const ResidualEntry& e) { return e.pass; });
}

const ResidualEntry* ResidualReport::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<std::string> ResidualReport::failing() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (!e.pass) out.push_back(e.name);
  }
  return out;
}

namespace {
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
}  // namespace

json to_json(const ResidualReport& report) {
  json checks = json::array();
  json tolerances = json::object();
  for (const auto& e : report.entries()) {
    checks.push_back({{"name", e.name},
                      {"residual", number(e.residual)},
                      {"tolerance", e.tolerance},
                      {"pass", e.pass},
                      {"grid", e.grid}});
    tolerances[e.name] = e.tolerance;
  }
  return {{"schema_version", kReportSchemaVersion},
          {"orientation", report.orientation},
          {"all_pass", report.all_pass()},
          {"checks", checks},
          {"tolerances", tolerances},
          {"notices", report.notices()},
          {"flags", report.flags()},
          {"extra", report.extra}};
}

std::string to_csv(const ResidualReport& report) {
  std::ostringstream os;
  os << "check,residual,tolerance,pass,grid\n";
  os << std::setprecision(17);
  for (const auto& e : report.entries()) {
    std::string grid = e.grid;
    for (auto& ch : grid) {
      if (ch == '"') ch = '\'';
    }
    os << e.name << ',' << e.residual << ',' << e.tolerance << ',' << (e.pass ? "true" : "false") << ",\"" << grid
       << "\"\n";
  }
  return os.str();
}

}  // namespace einhyp
