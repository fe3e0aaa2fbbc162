#include "einhyp/scalarfun.hpp"

#include <string>
#include <utility>

#include "einhyp/errors.hpp"

namespace einhyp {

using json = nlohmann::json;
using Node = SmoothFn::Node;
using NodePtr = SmoothFn::NodePtr;

IntervalDomain IntervalDomain::make(double t_min, double t_max, bool open) {
  if (!(t_min < t_max)) {
    throw ConstraintError("interval requires t_min < t_max, got [" + std::to_string(t_min) + ", " +
                          std::to_string(t_max) + "]");
  }
  return {t_min, t_max, open};
}

bool IntervalDomain::contains(double t) const {
  if (std::isnan(t)) return false;
  return open ? (t > t_min && t < t_max) : (t >= t_min && t <= t_max);
}

IntervalDomain IntervalDomain::intersect(const IntervalDomain& other) const {
  return make(std::max(t_min, other.t_min), std::min(t_max, other.t_max), open || other.open);
}

namespace {

NodePtr leaf_const(double c) {
  auto n = std::make_shared<Node>();
  n->op = FnOp::kConst;
  n->value = c;
  return n;
}

NodePtr leaf_var() {
  auto n = std::make_shared<Node>();
  n->op = FnOp::kVar;
  return n;
}

bool is_const(const NodePtr& n, double c) { return n->op == FnOp::kConst && n->value == c; }
bool is_const(const NodePtr& n) { return n->op == FnOp::kConst; }

NodePtr unary(FnOp op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(a)};
  return n;
}

NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (is_const(a) && is_const(b)) return leaf_const(a->value + b->value);
  auto n = std::make_shared<Node>();
  n->op = FnOp::kAdd;
  n->args = {std::move(a), std::move(b)};
  return n;
}

NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return leaf_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return leaf_const(a->value * b->value);
  // keep constants on the left: c1 * (c2 * x) -> (c1 c2) * x
  if (is_const(b)) std::swap(a, b);
  if (is_const(a) && b->op == FnOp::kMul && is_const(b->args[0])) {
    return mul(leaf_const(a->value * b->args[0]->value), b->args[1]);
  }
  auto n = std::make_shared<Node>();
  n->op = FnOp::kMul;
  n->args = {std::move(a), std::move(b)};
  return n;
}

NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return leaf_const(0.0);
  if (is_const(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return leaf_const(a->value / b->value);
  auto n = std::make_shared<Node>();
  n->op = FnOp::kDiv;
  n->args = {std::move(a), std::move(b)};
  return n;
}

NodePtr power(NodePtr a, int m) {
  if (m == 0) return leaf_const(1.0);
  if (m == 1) return a;
  if (is_const(a)) return leaf_const(std::pow(a->value, m));
  auto n = std::make_shared<Node>();
  n->op = FnOp::kPow;
  n->exponent = m;
  n->args = {std::move(a)};
  return n;
}

NodePtr neg(NodePtr a) { return mul(leaf_const(-1.0), std::move(a)); }

NodePtr differentiate(const NodePtr& n) {
  switch (n->op) {
    case FnOp::kConst:
      return leaf_const(0.0);
    case FnOp::kVar:
      return leaf_const(1.0);
    case FnOp::kAdd:
      return add(differentiate(n->args[0]), differentiate(n->args[1]));
    case FnOp::kMul: {
      const auto& a = n->args[0];
      const auto& b = n->args[1];
      return add(mul(differentiate(a), b), mul(a, differentiate(b)));
    }
    case FnOp::kDiv: {
      const auto& a = n->args[0];
      const auto& b = n->args[1];
      auto numer = add(mul(differentiate(a), b), neg(mul(a, differentiate(b))));
      return div(numer, power(b, 2));
    }
    case FnOp::kPow: {
      const auto& a = n->args[0];
      return mul(mul(leaf_const(n->exponent), power(a, n->exponent - 1)), differentiate(a));
    }
    case FnOp::kSin:
      return mul(unary(FnOp::kCos, n->args[0]), differentiate(n->args[0]));
    case FnOp::kCos:
      return mul(neg(unary(FnOp::kSin, n->args[0])), differentiate(n->args[0]));
    case FnOp::kSinh:
      return mul(unary(FnOp::kCosh, n->args[0]), differentiate(n->args[0]));
    case FnOp::kCosh:
      return mul(unary(FnOp::kSinh, n->args[0]), differentiate(n->args[0]));
    case FnOp::kExp:
      return mul(n, differentiate(n->args[0]));
  }
  return leaf_const(0.0);
}

bool same_node(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == FnOp::kConst && a.value != b.value) return false;
  if (a.op == FnOp::kPow && a.exponent != b.exponent) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (a.args[i] != b.args[i] && !same_node(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

std::size_t count_nodes(const Node& n) {
  std::size_t total = 1;
  for (const auto& a : n.args) total += count_nodes(*a);
  return total;
}

IntervalDomain common_domain(const SmoothFn& a, const SmoothFn& b) {
  return a.domain().intersect(b.domain());
}

}  // namespace

SmoothFn::SmoothFn() : node_(leaf_const(0.0)) {}

SmoothFn SmoothFn::constant(double c) { return from_node(leaf_const(c), {}); }
SmoothFn SmoothFn::variable() { return from_node(leaf_var(), {}); }

SmoothFn SmoothFn::from_node(NodePtr node, IntervalDomain domain) {
  SmoothFn fn;
  fn.node_ = std::move(node);
  fn.domain_ = domain;
  return fn;
}

SmoothFn SmoothFn::with_domain(const IntervalDomain& domain) const { return from_node(node_, domain); }

double SmoothFn::operator()(double t) const {
  if (!domain_.contains(t)) {
    throw DomainError("t = " + std::to_string(t) + " outside function domain (" + std::to_string(domain_.t_min) +
                      ", " + std::to_string(domain_.t_max) + ")");
  }
  const double v = evaluate(t);
  if (!std::isfinite(v)) throw DomainError("function not finite at t = " + std::to_string(t));
  return v;
}

std::size_t SmoothFn::node_count() const { return count_nodes(*node_); }

SmoothFn operator+(const SmoothFn& a, const SmoothFn& b) {
  return SmoothFn::from_node(add(a.node_ptr(), b.node_ptr()), common_domain(a, b));
}
SmoothFn operator-(const SmoothFn& a, const SmoothFn& b) {
  return SmoothFn::from_node(add(a.node_ptr(), neg(b.node_ptr())), common_domain(a, b));
}
SmoothFn operator*(const SmoothFn& a, const SmoothFn& b) {
  return SmoothFn::from_node(mul(a.node_ptr(), b.node_ptr()), common_domain(a, b));
}
SmoothFn operator/(const SmoothFn& a, const SmoothFn& b) {
  return SmoothFn::from_node(div(a.node_ptr(), b.node_ptr()), common_domain(a, b));
}
SmoothFn operator-(const SmoothFn& a) { return SmoothFn::from_node(neg(a.node_ptr()), a.domain()); }
SmoothFn operator*(double c, const SmoothFn& a) {
  return SmoothFn::from_node(mul(leaf_const(c), a.node_ptr()), a.domain());
}
SmoothFn operator+(double c, const SmoothFn& a) {
  return SmoothFn::from_node(add(leaf_const(c), a.node_ptr()), a.domain());
}
SmoothFn pow(const SmoothFn& a, int exponent) {
  return SmoothFn::from_node(power(a.node_ptr(), exponent), a.domain());
}
SmoothFn sin(const SmoothFn& a) { return SmoothFn::from_node(unary(FnOp::kSin, a.node_ptr()), a.domain()); }
SmoothFn cos(const SmoothFn& a) { return SmoothFn::from_node(unary(FnOp::kCos, a.node_ptr()), a.domain()); }
SmoothFn sinh(const SmoothFn& a) { return SmoothFn::from_node(unary(FnOp::kSinh, a.node_ptr()), a.domain()); }
SmoothFn cosh(const SmoothFn& a) { return SmoothFn::from_node(unary(FnOp::kCosh, a.node_ptr()), a.domain()); }
SmoothFn exp(const SmoothFn& a) { return SmoothFn::from_node(unary(FnOp::kExp, a.node_ptr()), a.domain()); }

SmoothFn derivative(const SmoothFn& fn) { return SmoothFn::from_node(differentiate(fn.node_ptr()), fn.domain()); }

bool same_tree(const SmoothFn& a, const SmoothFn& b) {
  return a.node_ptr() == b.node_ptr() || same_node(a.node(), b.node());
}

std::vector<double> eval_with_derivatives(const SmoothFn& fn, double t, int order) {
  if (order < 0 || order > 2) {
    throw UnsupportedError("derivative order " + std::to_string(order) + " not supported (max 2)");
  }
  if (!fn.domain().contains(t)) {
    throw DomainError("t = " + std::to_string(t) + " outside function domain");
  }
  const Jet<double> j = fn.evaluate(Jet<double>::variable(t));
  std::vector<double> out{j.v, j.d1, j.d2};
  out.resize(static_cast<std::size_t>(order) + 1);
  for (double v : out) {
    if (!std::isfinite(v)) throw DomainError("function not finite at t = " + std::to_string(t));
  }
  return out;
}

SmoothFn solve_f_ode(int n, double rho, SlopeSign slope) {
  if (n <= 4) {
    throw ConstraintError("f-equation requires n >= 5 (two fibers of dimension >= 2), got n = " + std::to_string(n));
  }
  const double energy = static_cast<double>(n - 3) / static_cast<double>(n - 2);
  const double amp = std::sqrt(energy);
  const SmoothFn t = SmoothFn::variable();
  if (rho > 0.0) {
    const double w = std::sqrt(rho / (n - 1));
    return ((amp / w) * sin(w * t)).with_domain(IntervalDomain::make(0.0, M_PI / w));
  }
  if (rho == 0.0) {
    return (amp * t).with_domain(IntervalDomain::make(0.0, std::numeric_limits<double>::infinity()));
  }
  const double w = std::sqrt(-rho / (n - 1));
  if (slope == SlopeSign::kIncreasing) {
    return ((amp / w) * sinh(w * t)).with_domain(IntervalDomain::make(0.0, std::numeric_limits<double>::infinity()));
  }
  return ((amp / w) * sinh((-w) * t))
      .with_domain(IntervalDomain::make(-std::numeric_limits<double>::infinity(), 0.0));
}

double f_ode_residual(const SmoothFn& f, int n, double rho, double t) {
  const auto v = eval_with_derivatives(f, t, 1);
  const double energy = static_cast<double>(n - 3) / static_cast<double>(n - 2);
  return std::abs(v[1] * v[1] + rho / (n - 1) * v[0] * v[0] - energy);
}

// --- JSON -----------------------------------------------------------------

namespace {

const char* op_name(FnOp op) {
  switch (op) {
    case FnOp::kConst: return "const";
    case FnOp::kVar: return "var";
    case FnOp::kAdd: return "add";
    case FnOp::kMul: return "mul";
    case FnOp::kDiv: return "div";
    case FnOp::kPow: return "pow";
    case FnOp::kSin: return "sin";
    case FnOp::kCos: return "cos";
    case FnOp::kSinh: return "sinh";
    case FnOp::kCosh: return "cosh";
    case FnOp::kExp: return "exp";
  }
  return "?";
}

json node_to_json(const Node& n) {
  json j;
  j["op"] = op_name(n.op);
  if (n.op == FnOp::kConst) {
    j["value"] = n.value;
    return j;
  }
  if (n.op == FnOp::kPow) j["exponent"] = n.exponent;
  if (!n.args.empty()) {
    j["args"] = json::array();
    for (const auto& a : n.args) j["args"].push_back(node_to_json(*a));
  }
  return j;
}

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

const json& required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<NodePtr> parse_args(const json& j, std::size_t min_count, std::size_t max_count);

NodePtr node_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("function node must be an object");
  const json& opj = required(j, "op");
  if (!opj.is_string()) throw SchemaError("'op' must be a string");
  const std::string op = opj.get<std::string>();
  if (op == "const") {
    const json& v = required(j, "value");
    if (!v.is_number()) throw SchemaError("'value' must be a number");
    return leaf_const(v.get<double>());
  }
  if (op == "var") return leaf_var();
  if (op == "add" || op == "mul") {
    auto args = parse_args(j, 2, std::numeric_limits<std::size_t>::max());
    NodePtr acc = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) {
      auto n = std::make_shared<Node>();
      n->op = op == "add" ? FnOp::kAdd : FnOp::kMul;
      n->args = {acc, args[i]};
      acc = n;
    }
    return acc;
  }
  if (op == "div") {
    auto args = parse_args(j, 2, 2);
    auto n = std::make_shared<Node>();
    n->op = FnOp::kDiv;
    n->args = std::move(args);
    return n;
  }
  if (op == "pow") {
    auto args = parse_args(j, 1, 1);
    const json& e = required(j, "exponent");
    if (!e.is_number_integer()) throw SchemaError("'exponent' must be an integer");
    auto n = std::make_shared<Node>();
    n->op = FnOp::kPow;
    n->exponent = e.get<int>();
    n->args = std::move(args);
    return n;
  }
  static const std::pair<const char*, FnOp> kUnary[] = {
      {"sin", FnOp::kSin}, {"cos", FnOp::kCos}, {"sinh", FnOp::kSinh}, {"cosh", FnOp::kCosh}, {"exp", FnOp::kExp}};
  for (const auto& [name, code] : kUnary) {
    if (op == name) return unary(code, parse_args(j, 1, 1)[0]);
  }
  throw SchemaError("unknown function op '" + op + "'");
}

std::vector<NodePtr> parse_args(const json& j, std::size_t min_count, std::size_t max_count) {
  const json& a = required(j, "args");
  if (!a.is_array() || a.size() < min_count || a.size() > max_count) {
    throw SchemaError("'args' has wrong arity for op '" + j.at("op").get<std::string>() + "'");
  }
  std::vector<NodePtr> out;
  for (const auto& x : a) out.push_back(node_from_json(x));
  return out;
}

double bound_from_json(const json& j, double fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_number()) throw SchemaError("interval bound must be a number or null");
  return j.get<double>();
}

}  // namespace

json to_json(const IntervalDomain& d) {
  return json{{"min", bound_to_json(d.t_min)}, {"max", bound_to_json(d.t_max)}, {"open", d.open}};
}

json to_json(const SmoothFn& fn) {
  json j = node_to_json(fn.node());
  const auto& d = fn.domain();
  if (std::isfinite(d.t_min) || std::isfinite(d.t_max)) j["domain"] = to_json(d);
  return j;
}

IntervalDomain interval_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("interval must be an object with 'min' and 'max'");
  const double lo = bound_from_json(required(j, "min"), -std::numeric_limits<double>::infinity());
  const double hi = bound_from_json(required(j, "max"), std::numeric_limits<double>::infinity());
  bool open = true;
  if (j.contains("open")) {
    if (!j.at("open").is_boolean()) throw SchemaError("'open' must be a boolean");
    open = j.at("open").get<bool>();
  }
  if (!(lo < hi)) throw SchemaError("interval requires min < max");
  return {lo, hi, open};
}

SmoothFn smooth_fn_from_json(const json& j) {
  NodePtr node = node_from_json(j);
  IntervalDomain domain;
  if (j.contains("domain")) domain = interval_from_json(j.at("domain"));
  return SmoothFn::from_node(std::move(node), domain);
}

}  // namespace einhyp
