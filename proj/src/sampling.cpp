#include "einhyp/sampling.hpp"

#include <algorithm>
#include <sstream>

#include "einhyp/errors.hpp"

namespace einhyp {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ConstraintError("linspace needs at least one point");
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

SampleGrid tensor_grid(const CoordinateBox<double>& box, const GridConfig& config, double min_margin) {
  if (config.points_per_axis < 1) throw ConstraintError("grid needs at least one point per axis");
  const int n = box.dim();
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double len = box.upper(i) - box.lower(i);
    const double inset = std::max(config.margin_fraction * len, min_margin);
    const double lo = box.lower(i) + inset, hi = box.upper(i) - inset;
    if (!(hi >= lo)) throw ConstraintError("grid margin leaves no room on axis " + std::to_string(i));
    axes[static_cast<std::size_t>(i)] = linspace(lo, hi, config.points_per_axis);
  }
  SampleGrid grid;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  const std::size_t per = static_cast<std::size_t>(config.points_per_axis);
  while (true) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = axes[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    grid.points.push_back(std::move(x));
    int d = n - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == per) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  std::ostringstream desc;
  desc << config.points_per_axis << "^" << n << " tensor grid, inset " << config.margin_fraction
       << " of each axis (min " << min_margin << ")";
  grid.description = desc.str();
  return grid;
}

SampleGrid base_line_grid(const CoordinateBox<double>& box, const std::vector<double>& s_values) {
  SampleGrid grid;
  const Vec mid = 0.5 * (box.lower + box.upper);
  for (double s : s_values) {
    Vec x = mid;
    x(0) = s;
    grid.points.push_back(std::move(x));
  }
  grid.description = std::to_string(s_values.size()) + " points along the base, fiber coordinates at the chart centre";
  return grid;
}

}  // namespace einhyp
