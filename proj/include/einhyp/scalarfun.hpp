#pragma once

// Closed-form functions of one real variable with exact derivatives.
//
// A SmoothFn is an immutable expression tree (shared, so copies are cheap)
// paired with the open interval on which it is declared smooth and finite.
// Evaluation is templated on the number type: plain floating point gives
// values, Jet<double> gives value + first + second derivative in one pass.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include <json.hpp>

namespace einhyp {

struct IntervalDomain {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  bool open = true;

  // Throws ConstraintError unless t_min < t_max.
  static IntervalDomain make(double t_min, double t_max, bool open = true);
  static IntervalDomain whole_line() { return {}; }

  bool contains(double t) const;
  bool bounded() const { return std::isfinite(t_min) && std::isfinite(t_max); }
  double length() const { return t_max - t_min; }
  IntervalDomain intersect(const IntervalDomain& other) const;
};

// Truncated Taylor jet: value, first and second derivative.
template <typename S>
struct Jet {
  S v{};
  S d1{};
  S d2{};

  Jet() = default;
  Jet(S value, S first, S second) : v(value), d1(first), d2(second) {}
  explicit Jet(S value) : v(value) {}

  static Jet variable(S t) { return Jet(t, S(1), S(0)); }
};

template <typename S>
Jet<S> operator+(const Jet<S>& a, const Jet<S>& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
template <typename S>
Jet<S> operator-(const Jet<S>& a, const Jet<S>& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
template <typename S>
Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + S(2) * a.d1 * b.d1 + a.v * b.d2};
}
template <typename S>
Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  const S q = a.v / b.v;
  const S q1 = (a.d1 - q * b.d1) / b.v;
  const S q2 = (a.d2 - S(2) * q1 * b.d1 - q * b.d2) / b.v;
  return {q, q1, q2};
}

// Chain rule for a scalar map with known derivatives (g, g', g'') at a.v.
template <typename S>
Jet<S> compose(const Jet<S>& a, S g, S g1, S g2) {
  return {g, g1 * a.d1, g2 * a.d1 * a.d1 + g1 * a.d2};
}

template <typename S>
Jet<S> sin(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  const S s = sin(a.v);
  return compose(a, s, cos(a.v), -s);
}
template <typename S>
Jet<S> cos(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  const S c = cos(a.v);
  return compose(a, c, -sin(a.v), -c);
}
template <typename S>
Jet<S> sinh(const Jet<S>& a) {
  using std::cosh;
  using std::sinh;
  const S s = sinh(a.v);
  return compose(a, s, cosh(a.v), s);
}
template <typename S>
Jet<S> cosh(const Jet<S>& a) {
  using std::cosh;
  using std::sinh;
  const S c = cosh(a.v);
  return compose(a, c, sinh(a.v), c);
}
template <typename S>
Jet<S> exp(const Jet<S>& a) {
  using std::exp;
  const S e = exp(a.v);
  return compose(a, e, e, e);
}

enum class FnOp : std::uint8_t { kConst, kVar, kAdd, kMul, kDiv, kPow, kSin, kCos, kSinh, kCosh, kExp };

class SmoothFn {
 public:
  struct Node {
    FnOp op = FnOp::kConst;
    double value = 0.0;  // kConst
    int exponent = 0;    // kPow
    std::vector<std::shared_ptr<const Node>> args;
  };
  using NodePtr = std::shared_ptr<const Node>;

  // The zero function on the whole line.
  SmoothFn();

  static SmoothFn constant(double c);
  static SmoothFn variable();
  static SmoothFn from_node(NodePtr node, IntervalDomain domain);

  FnOp op() const { return node_->op; }
  const Node& node() const { return *node_; }
  const NodePtr& node_ptr() const { return node_; }
  const IntervalDomain& domain() const { return domain_; }
  SmoothFn with_domain(const IntervalDomain& domain) const;

  bool is_constant(double c) const { return node_->op == FnOp::kConst && node_->value == c; }

  // Raw evaluation without a domain check. Works for double, long double
  // and Jet<...>.
  template <typename Number>
  Number evaluate(const Number& t) const {
    return evaluate_node(*node_, t);
  }

  // Domain-checked value. Throws DomainError outside the domain or when the
  // result is not finite.
  double operator()(double t) const;

  std::size_t node_count() const;

 private:
  template <typename Number>
  static Number evaluate_node(const Node& n, const Number& t);

  NodePtr node_;
  IntervalDomain domain_;
};

template <typename Number>
Number SmoothFn::evaluate_node(const Node& n, const Number& t) {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::sin;
  using std::sinh;
  switch (n.op) {
    case FnOp::kConst:
      return Number(n.value);
    case FnOp::kVar:
      return t;
    case FnOp::kAdd:
      return evaluate_node(*n.args[0], t) + evaluate_node(*n.args[1], t);
    case FnOp::kMul:
      return evaluate_node(*n.args[0], t) * evaluate_node(*n.args[1], t);
    case FnOp::kDiv:
      return evaluate_node(*n.args[0], t) / evaluate_node(*n.args[1], t);
    case FnOp::kPow: {
      const Number base = evaluate_node(*n.args[0], t);
      Number acc(1.0);
      const int m = n.exponent < 0 ? -n.exponent : n.exponent;
      for (int i = 0; i < m; ++i) acc = acc * base;
      return n.exponent < 0 ? Number(1.0) / acc : acc;
    }
    case FnOp::kSin:
      return sin(evaluate_node(*n.args[0], t));
    case FnOp::kCos:
      return cos(evaluate_node(*n.args[0], t));
    case FnOp::kSinh:
      return sinh(evaluate_node(*n.args[0], t));
    case FnOp::kCosh:
      return cosh(evaluate_node(*n.args[0], t));
    case FnOp::kExp:
      return exp(evaluate_node(*n.args[0], t));
  }
  return Number(0.0);
}

// Algebra. Binary operations intersect the operand domains. The builders
// fold constants and drop additive zeros / multiplicative ones so that
// repeated differentiation does not blow up the tree.
SmoothFn operator+(const SmoothFn& a, const SmoothFn& b);
SmoothFn operator-(const SmoothFn& a, const SmoothFn& b);
SmoothFn operator*(const SmoothFn& a, const SmoothFn& b);
SmoothFn operator/(const SmoothFn& a, const SmoothFn& b);
SmoothFn operator-(const SmoothFn& a);
SmoothFn operator*(double c, const SmoothFn& a);
SmoothFn operator+(double c, const SmoothFn& a);
SmoothFn pow(const SmoothFn& a, int exponent);
SmoothFn sin(const SmoothFn& a);
SmoothFn cos(const SmoothFn& a);
SmoothFn sinh(const SmoothFn& a);
SmoothFn cosh(const SmoothFn& a);
SmoothFn exp(const SmoothFn& a);

SmoothFn derivative(const SmoothFn& fn);

// Structural (tree-level) equality; domains are ignored.
bool same_tree(const SmoothFn& a, const SmoothFn& b);

// [fn(t), fn'(t), ...] with order + 1 entries. Throws DomainError if t is
// outside the domain and UnsupportedError for order > 2.
std::vector<double> eval_with_derivatives(const SmoothFn& fn, double t, int order = 2);

// Sign of f' on the hyperbolic branch (rho < 0). The equation fixes f only
// up to translation and reflection; the caller picks the monotone branch.
enum class SlopeSign { kIncreasing, kDecreasing };

// Closed-form positive solution of (f')^2 + rho/(n-1) f^2 = (n-3)/(n-2).
//   rho > 0: f = sqrt(C)/w sin(w t) on (0, pi/w), w = sqrt(rho/(n-1))
//   rho = 0: f = sqrt(C) t on (0, inf)
//   rho < 0: f = sqrt(C)/w sinh(w t) on (0, inf), or its reflection on
//            (-inf, 0) for SlopeSign::kDecreasing
// Throws ConstraintError for n <= 4.
SmoothFn solve_f_ode(int n, double rho, SlopeSign slope = SlopeSign::kIncreasing);

// |(f')^2 + rho/(n-1) f^2 - (n-3)/(n-2)| at t.
double f_ode_residual(const SmoothFn& f, int n, double rho, double t);

nlohmann::json to_json(const SmoothFn& fn);
nlohmann::json to_json(const IntervalDomain& domain);
// Throws SchemaError on malformed input.
SmoothFn smooth_fn_from_json(const nlohmann::json& j);
IntervalDomain interval_from_json(const nlohmann::json& j);

}  // namespace einhyp
