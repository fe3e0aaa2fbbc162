#pragma once

// Tensor-product sample grids on coordinate boxes.

#include <string>
#include <vector>

#include "einhyp/coordinate_metric.hpp"
#include "einhyp/linalg.hpp"

namespace einhyp {

struct GridConfig {
  int points_per_axis = 5;
  // Inset of each axis as a fraction of its length. The inset is never
  // smaller than the absolute margin passed to tensor_grid.
  double margin_fraction = 0.1;
};

struct SampleGrid {
  std::vector<Vec> points;
  std::string description;

  std::size_t size() const { return points.size(); }
};

// Throws ConstraintError when points_per_axis < 1 or the inset box is empty.
SampleGrid tensor_grid(const CoordinateBox<double>& box, const GridConfig& config, double min_margin);

// Points (s, x_mid) for a list of s values, fiber coordinates held at the
// box centre.
SampleGrid base_line_grid(const CoordinateBox<double>& box, const std::vector<double>& s_values);

// n equally spaced values covering [lo, hi] (both ends included).
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace einhyp
