#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsar/bspline.hpp"
#include "fsar/grid.hpp"

namespace fsar {

// n functional observations held as an n x G matrix of values on a shared
// grid: row i is the curve of unit i.
class FunctionalSample {
 public:
  FunctionalSample(Grid grid, Eigen::MatrixXd values);

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  int units() const { return static_cast<int>(values_.rows()); }

  // Column of all units at point s: exact when s is a grid node, linear
  // interpolation (constant beyond the boundary nodes) otherwise.
  Eigen::VectorXd values_at(double s) const;

 private:
  Grid grid_;
  Eigen::MatrixXd values_;
};

struct ObsPoint {
  double s;
  double y;
};

// Irregular per-unit observations (s_l, y_l) of otherwise-functional data.
// Construction sorts each unit by s, validates s in [0, 1], and deduplicates
// exactly-tied abscissae: ties whose ordinates agree within 1e-9 collapse to
// the first point, ties that disagree are an error.
class DiscreteFunctionObservations {
 public:
  static DiscreteFunctionObservations from_points(
      std::vector<std::vector<ObsPoint>> points);

  int units() const { return static_cast<int>(points_.size()); }
  const std::vector<ObsPoint>& unit(int i) const { return points_.at(i); }

 private:
  explicit DiscreteFunctionObservations(std::vector<std::vector<ObsPoint>> p)
      : points_(std::move(p)) {}

  std::vector<std::vector<ObsPoint>> points_;
};

// Piecewise linear interpolant of unit i at s, constant outside the observed
// range (the first / last ordinate is used beyond the ends).
double interpolate(const DiscreteFunctionObservations& obs, int unit, double s);

// Interpolate every unit onto a common grid, producing the functional sample
// the estimator consumes in the discretely-observed (feasible) setting.
FunctionalSample interpolate_sample(const DiscreteFunctionObservations& obs,
                                    const Grid& grid);

// n x K matrix of basis scores r_{i,k} = quadrature(q_i * phi_k).
Eigen::MatrixXd basis_scores(const FunctionalSample& sample,
                             const BSplineBasis& basis);

// Same scores from a precomputed G x K basis-values matrix.
Eigen::MatrixXd basis_scores(const Eigen::MatrixXd& values,
                             const Eigen::MatrixXd& phi, double step);

// Squared L2 distance between two curves on a grid.
double wasserstein2_sq(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const Grid& grid);

}  // namespace fsar
