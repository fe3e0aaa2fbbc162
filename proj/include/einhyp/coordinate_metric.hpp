#pragma once

#include <functional>
#include <sstream>
#include <utility>

#include "einhyp/linalg.hpp"

namespace einhyp {

// Axis-aligned coordinate box, closed.
template <typename Scalar>
struct CoordinateBox {
  VecX<Scalar> lower;
  VecX<Scalar> upper;

  int dim() const { return static_cast<int>(lower.size()); }

  bool contains(const VecX<Scalar>& x, Scalar margin = Scalar(0)) const {
    for (int i = 0; i < dim(); ++i) {
      if (!(x(i) >= lower(i) + margin && x(i) <= upper(i) - margin)) return false;
    }
    return true;
  }
};

enum class Smoothness { kClosedForm, kFiniteDifferenceOnly };

// Metric tensor field on a coordinate box. The evaluator writes g(x) into a
// caller-provided dim x dim matrix; it may assume x lies in the box.
template <typename Scalar>
class CoordinateMetric {
 public:
  using Evaluator = std::function<void(const VecX<Scalar>&, MatX<Scalar>&)>;

  CoordinateMetric() = default;
  CoordinateMetric(CoordinateBox<Scalar> box, Evaluator eval, Smoothness smoothness = Smoothness::kClosedForm)
      : box_(std::move(box)), eval_(std::move(eval)), smoothness_(smoothness) {}

  int dim() const { return box_.dim(); }
  const CoordinateBox<Scalar>& domain() const { return box_; }
  Smoothness smoothness() const { return smoothness_; }

  // Unchecked evaluation for stencils.
  void evaluate_into(const VecX<Scalar>& x, MatX<Scalar>& g) const { eval_(x, g); }

  // Checked evaluation; throws DomainError outside the box.
  MatX<Scalar> operator()(const VecX<Scalar>& x) const {
    if (x.size() != dim() || !box_.contains(x)) {
      std::ostringstream os;
      os << "point (" << x.transpose() << ") outside metric domain";
      throw DomainError(os.str());
    }
    MatX<Scalar> g(dim(), dim());
    eval_(x, g);
    return g;
  }

 private:
  CoordinateBox<Scalar> box_;
  Evaluator eval_;
  Smoothness smoothness_ = Smoothness::kClosedForm;
};

}  // namespace einhyp
