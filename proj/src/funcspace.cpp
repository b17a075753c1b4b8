#include "fsar/funcspace.hpp"

#include <algorithm>
#include <cmath>

namespace fsar {

FunctionalSample::FunctionalSample(Grid grid, Eigen::MatrixXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.cols() != grid_.size())
    throw DimensionError("FunctionalSample: value columns must match grid size");
  if (values_.rows() < 1)
    throw DimensionError("FunctionalSample: need at least one unit");
  if (!values_.allFinite())
    throw DataError("FunctionalSample: values contain NaN or Inf");
}

Eigen::VectorXd FunctionalSample::values_at(double s) const {
  const int g = grid_.node_index(s);
  if (g >= 0) return values_.col(g);
  const int n = units();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i)
    out(i) = interp_on_grid(values_.row(i).transpose(), grid_, s);
  return out;
}

DiscreteFunctionObservations DiscreteFunctionObservations::from_points(
    std::vector<std::vector<ObsPoint>> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& unit = points[i];
    if (unit.empty())
      throw DataError("DiscreteFunctionObservations: unit " + std::to_string(i) +
                      " has no observations");
    for (const auto& p : unit) {
      if (!(p.s >= 0.0 && p.s <= 1.0))
        throw DomainError("DiscreteFunctionObservations: abscissa outside [0, 1]");
      if (!std::isfinite(p.y))
        throw DataError("DiscreteFunctionObservations: non-finite ordinate");
    }
    std::sort(unit.begin(), unit.end(),
              [](const ObsPoint& a, const ObsPoint& b) {
                return a.s < b.s || (a.s == b.s && a.y < b.y);
              });
    std::vector<ObsPoint> dedup;
    dedup.reserve(unit.size());
    for (const auto& p : unit) {
      if (!dedup.empty() && dedup.back().s == p.s) {
        if (std::abs(dedup.back().y - p.y) > 1e-9)
          throw DataError(
              "DiscreteFunctionObservations: unit " + std::to_string(i) +
              " has duplicate abscissa s=" + std::to_string(p.s) +
              " with conflicting values");
        continue;  // equal within tolerance: keep the first
      }
      dedup.push_back(p);
    }
    unit = std::move(dedup);
  }
  return DiscreteFunctionObservations(std::move(points));
}

double interpolate(const DiscreteFunctionObservations& obs, int unit, double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw DomainError("interpolate: s must lie in [0, 1]");
  const auto& pts = obs.unit(unit);
  if (s <= pts.front().s) return pts.front().y;
  if (s >= pts.back().s) return pts.back().y;
  // Last l with pts[l].s <= s; the two-sided clamps above guarantee l < m-1.
  auto it = std::upper_bound(pts.begin(), pts.end(), s,
                             [](double v, const ObsPoint& p) { return v < p.s; });
  const std::size_t l = static_cast<std::size_t>(it - pts.begin()) - 1;
  const ObsPoint& a = pts[l];
  const ObsPoint& b = pts[l + 1];
  const double w = (b.s - s) / (b.s - a.s);
  return w * a.y + (1.0 - w) * b.y;
}

FunctionalSample interpolate_sample(const DiscreteFunctionObservations& obs,
                                    const Grid& grid) {
  const int n = obs.units();
  Eigen::MatrixXd vals(n, grid.size());
  for (int i = 0; i < n; ++i)
    for (int g = 0; g < grid.size(); ++g)
      vals(i, g) = interpolate(obs, i, grid.point(g));
  return FunctionalSample(grid, std::move(vals));
}

Eigen::MatrixXd basis_scores(const FunctionalSample& sample,
                             const BSplineBasis& basis) {
  const Eigen::MatrixXd phi = basis.eval_on(sample.grid());
  return basis_scores(sample.values(), phi, sample.grid().step());
}

Eigen::MatrixXd basis_scores(const Eigen::MatrixXd& values,
                             const Eigen::MatrixXd& phi, double step) {
  if (values.cols() != phi.rows())
    throw DimensionError("basis_scores: curve length does not match basis rows");
  return step * (values * phi);
}

double wasserstein2_sq(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const Grid& grid) {
  if (a.size() != b.size())
    throw DimensionError("wasserstein2_sq: curves have different lengths");
  Eigen::VectorXd diff2 = (a - b).array().square();
  return quadrature(diff2, grid);
}

}  // namespace fsar
