#include "fsar/grid.hpp"

#include <cmath>

namespace fsar {

Grid Grid::uniform(int size) {
  if (size < 2) throw DomainError("Grid::uniform: size must be at least 2");
  const double h = 1.0 / (size + 1);
  Eigen::VectorXd pts(size);
  for (int k = 0; k < size; ++k) pts(k) = (k + 1) * h;
  return Grid(std::move(pts), h);
}

Grid Grid::from_points(Eigen::VectorXd points) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw DomainError("Grid::from_points: need at least 2 points");
  if (points(0) <= 0.0 || points(n - 1) >= 1.0)
    throw DomainError("Grid::from_points: points must lie strictly inside (0, 1)");
  const double h = points(1) - points(0);
  if (h <= 0.0) throw DomainError("Grid::from_points: points must be increasing");
  for (int k = 1; k < n; ++k) {
    const double gap = points(k) - points(k - 1);
    if (std::abs(gap - h) > 1e-12)
      throw DomainError("Grid::from_points: spacing is not uniform");
  }
  return Grid(std::move(points), h);
}

int Grid::node_index(double t) const {
  // Round to the nearest node and verify; O(1) thanks to equal spacing.
  const double pos = (t - points_(0)) / step_;
  const int g = static_cast<int>(std::lround(pos));
  if (g < 0 || g >= size()) return -1;
  return std::abs(points_(g) - t) <= 1e-12 ? g : -1;
}

bool Grid::operator==(const Grid& other) const {
  return points_.size() == other.points_.size() && points_ == other.points_;
}

double quadrature(const Eigen::VectorXd& values, const Grid& grid) {
  if (values.size() != grid.size())
    throw DimensionError("quadrature: values length does not match grid size");
  double acc = 0.0;
  for (int g = 0; g < grid.size(); ++g) acc += values(g);
  return acc * grid.step();
}

double interp_on_grid(const Eigen::Ref<const Eigen::VectorXd>& values,
                      const Grid& grid, double t) {
  const int n = grid.size();
  if (values.size() != n)
    throw DimensionError("interp_on_grid: values length does not match grid size");
  if (t <= grid.point(0)) return values(0);
  if (t >= grid.point(n - 1)) return values(n - 1);
  int lo = static_cast<int>((t - grid.point(0)) / grid.step());
  if (lo > n - 2) lo = n - 2;
  // Floating point may land us one cell off; nudge into the bracketing cell.
  while (lo > 0 && t < grid.point(lo)) --lo;
  while (lo < n - 2 && t > grid.point(lo + 1)) ++lo;
  const double w = (grid.point(lo + 1) - t) / grid.step();
  return w * values(lo) + (1.0 - w) * values(lo + 1);
}

}  // namespace fsar
