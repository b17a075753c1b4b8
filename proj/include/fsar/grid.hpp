#pragma once

#include <Eigen/Dense>

#include "fsar/common.hpp"

namespace fsar {

// Uniform evaluation grid on the open interval (0, 1).  All curves in the
// library live on such a grid; integrals are Riemann sums with weight step().
//
// Grid::uniform(G) places points k/(G+1) for k = 1..G, so G = 199 gives
// 0.005, 0.010, ..., 0.995 and G = 399 gives 0.0025, ..., 0.9975.
class Grid {
 public:
  static Grid uniform(int size);

  // Points must be strictly increasing, inside (0, 1), and equally spaced
  // (gaps may deviate from the leading gap by at most 1e-12).
  static Grid from_points(Eigen::VectorXd points);

  int size() const { return static_cast<int>(points_.size()); }
  double step() const { return step_; }
  double point(int g) const { return points_(g); }
  const Eigen::VectorXd& points() const { return points_; }

  // Index of the grid node equal to t (within 1e-12), or -1.
  int node_index(double t) const;

  bool operator==(const Grid& other) const;

 private:
  Grid(Eigen::VectorXd points, double step)
      : points_(std::move(points)), step_(step) {}

  Eigen::VectorXd points_;
  double step_;
};

// Riemann sum: step * (f_1 + ... + f_G), accumulated left to right so the
// result is identical regardless of build flags or thread count.
double quadrature(const Eigen::VectorXd& values, const Grid& grid);

// Value at t of the piecewise linear interpolant through (grid, values),
// extended as a constant beyond the first and last nodes.
double interp_on_grid(const Eigen::Ref<const Eigen::VectorXd>& values,
                      const Grid& grid, double t);

}  // namespace fsar
