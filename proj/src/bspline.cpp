#include "fsar/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace fsar {

BSplineBasis::BSplineBasis(int degree, std::vector<double> interior_knots) {
  if (degree < 1) throw DomainError("BSplineBasis: degree must be at least 1");
  for (std::size_t i = 0; i < interior_knots.size(); ++i) {
    if (interior_knots[i] <= 0.0 || interior_knots[i] >= 1.0)
      throw DomainError("BSplineBasis: interior knots must lie in (0, 1)");
    if (i > 0 && interior_knots[i] <= interior_knots[i - 1])
      throw DomainError("BSplineBasis: interior knots must be strictly increasing");
  }
  degree_ = degree;
  const int m = static_cast<int>(interior_knots.size());
  size_ = m + degree + 1;
  knots_.reserve(m + 2 * (degree + 1));
  knots_.insert(knots_.end(), degree + 1, 0.0);
  knots_.insert(knots_.end(), interior_knots.begin(), interior_knots.end());
  knots_.insert(knots_.end(), degree + 1, 1.0);
}

BSplineBasis BSplineBasis::cubic(int interior_knot_count) {
  if (interior_knot_count < 0)
    throw DomainError("BSplineBasis::cubic: knot count must be non-negative");
  std::vector<double> ik(interior_knot_count);
  for (int j = 0; j < interior_knot_count; ++j)
    ik[j] = static_cast<double>(j + 1) / (interior_knot_count + 1);
  return BSplineBasis(3, std::move(ik));
}

Eigen::VectorXd BSplineBasis::eval(double t) const {
  if (t < 0.0 || t > 1.0)
    throw DomainError("BSplineBasis::eval: t must lie in [0, 1]");
  const int p = degree_;
  const int last_span = size_ - 1;  // span index of [xi_M, 1)
  int span;
  if (t >= 1.0) {
    span = last_span;
  } else {
    // knots_[span] <= t < knots_[span+1] with span in [p, last_span].
    auto it = std::upper_bound(knots_.begin() + p + 1,
                               knots_.begin() + last_span + 1, t);
    span = static_cast<int>(it - knots_.begin()) - 1;
  }

  // de Boor: N[r] ends up as the value of basis function span-p+r at t.
  std::vector<double> left(p + 1), right(p + 1), nval(p + 1);
  nval[0] = 1.0;
  for (int d = 1; d <= p; ++d) {
    left[d] = t - knots_[span + 1 - d];
    right[d] = knots_[span + d] - t;
    double saved = 0.0;
    for (int r = 0; r < d; ++r) {
      const double tmp = nval[r] / (right[r + 1] + left[d - r]);
      nval[r] = saved + right[r + 1] * tmp;
      saved = left[d - r] * tmp;
    }
    nval[d] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(size_);
  for (int r = 0; r <= p; ++r) out(span - p + r) = nval[r];
  return out;
}

Eigen::MatrixXd BSplineBasis::eval_on(const Grid& grid) const {
  Eigen::MatrixXd phi(grid.size(), size_);
  for (int g = 0; g < grid.size(); ++g) phi.row(g) = eval(grid.point(g)).transpose();
  return phi;
}

Eigen::MatrixXd BSplineBasis::gram(const Grid& grid) const {
  return gram_on(0.0, 1.0, grid);
}

Eigen::MatrixXd BSplineBasis::gram_on(double a, double b, const Grid& grid) const {
  if (!(a >= 0.0 && b <= 1.0 && a < b))
    throw DomainError("BSplineBasis::gram_on: need 0 <= a < b <= 1");
  const Eigen::MatrixXd phi = eval_on(grid);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(size_, size_);
  for (int g = 0; g < grid.size(); ++g) {
    const double t = grid.point(g);
    if (t > a && t <= b)
      acc.selfadjointView<Eigen::Lower>().rankUpdate(phi.row(g).transpose());
  }
  Eigen::MatrixXd out = acc.selfadjointView<Eigen::Lower>();
  return out * grid.step();
}

Eigen::VectorXd project(const Eigen::VectorXd& f, const BSplineBasis& basis,
                        const Grid& grid) {
  if (f.size() != grid.size())
    throw DimensionError("project: function length does not match grid size");
  const Eigen::MatrixXd phi = basis.eval_on(grid);
  const Eigen::MatrixXd gram = basis.gram(grid);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success ||
      es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff())
    throw NumericalError(
        "project: Gram matrix is singular; refine the grid or drop knots");
  const Eigen::VectorXd rhs = grid.step() * (phi.transpose() * f);
  return es.eigenvectors() *
         (es.eigenvalues().cwiseInverse().asDiagonal() *
          (es.eigenvectors().transpose() * rhs));
}

}  // namespace fsar
