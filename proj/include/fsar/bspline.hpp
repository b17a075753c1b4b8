#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsar/grid.hpp"

namespace fsar {

// B-spline basis on [0, 1] with a clamped (open) knot vector: the boundary
// knots 0 and 1 are repeated degree+1 times around the interior knots, so a
// basis with M interior knots and degree p has K = M + p + 1 functions.
// Evaluation uses the standard de Boor triangular recurrence, which keeps the
// partition-of-unity identity exact to rounding.
class BSplineBasis {
 public:
  // Interior knots must be strictly increasing and lie strictly inside (0, 1).
  BSplineBasis(int degree, std::vector<double> interior_knots);

  // Convenience: `count` equally spaced interior knots j/(count+1).
  static BSplineBasis cubic(int interior_knot_count);

  int degree() const { return degree_; }
  int size() const { return size_; }
  const std::vector<double>& knots() const { return knots_; }

  // Values of all K basis functions at t in [0, 1].
  Eigen::VectorXd eval(double t) const;

  // G x K matrix of basis values on a grid.
  Eigen::MatrixXd eval_on(const Grid& grid) const;

  // K x K Gram matrix, entries quadrature(phi_j * phi_k) on the given grid.
  Eigen::MatrixXd gram(const Grid& grid) const;

  // Gram matrix restricted to the sub-interval (a, b]: only grid nodes t with
  // a < t <= b contribute.  The half-open convention makes the matrices
  // additive across a shared endpoint: gram_on(0,c) + gram_on(c,1) equals
  // gram_on(0,1) node for node whenever c is itself a node.
  Eigen::MatrixXd gram_on(double a, double b, const Grid& grid) const;

 private:
  int degree_;
  int size_;
  std::vector<double> knots_;  // full clamped knot vector
};

// Least-squares coefficients of f in the basis, using the grid inner product.
// Throws NumericalError if the Gram matrix is numerically singular.
Eigen::VectorXd project(const Eigen::VectorXd& f, const BSplineBasis& basis,
                        const Grid& grid);

}  // namespace fsar
