#include "fsar/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace fsar {

namespace {

void validate_entries(int n, const std::vector<Eigen::Triplet<double>>& entries) {
  for (const auto& e : entries) {
    if (e.row() < 0 || e.row() >= n || e.col() < 0 || e.col() >= n)
      throw DimensionError("SpatialWeights: entry index out of range");
    if (e.row() == e.col())
      throw DataError("SpatialWeights: diagonal entries are not allowed");
    if (!std::isfinite(e.value()) || e.value() < 0.0)
      throw DataError("SpatialWeights: weights must be finite and non-negative");
  }
}

}  // namespace

SpatialWeights SpatialWeights::from_entries(
    int n, const std::vector<Eigen::Triplet<double>>& entries,
    bool row_normalized) {
  if (n < 1) throw DimensionError("SpatialWeights: need at least one unit");
  validate_entries(n, entries);
  Sparse w(n, n);
  w.setFromTriplets(entries.begin(), entries.end());
  w.prune(0.0, 0.0);
  w.makeCompressed();
  if (row_normalized) {
    for (int i = 0; i < n; ++i) {
      double rs = 0.0;
      for (Sparse::InnerIterator it(w, i); it; ++it) rs += it.value();
      if (rs != 0.0 && std::abs(rs - 1.0) > 1e-12)
        throw DataError("SpatialWeights: row " + std::to_string(i) +
                        " sums to " + std::to_string(rs) +
                        " but was declared row-normalized");
    }
  }
  return SpatialWeights(std::move(w), row_normalized);
}

SpatialWeights SpatialWeights::rook_lattice(
    int rows, int cols, const std::vector<std::pair<int, int>>& cells) {
  const int n = static_cast<int>(cells.size());
  if (n < 1) throw DimensionError("rook_lattice: no units");
  std::map<std::pair<int, int>, int> where;
  for (int i = 0; i < n; ++i) {
    const auto& [r, c] = cells[i];
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw DomainError("rook_lattice: cell outside the lattice");
    if (!where.emplace(cells[i], i).second)
      throw DataError("rook_lattice: two units share a cell");
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < n; ++i) {
    const auto& [r, c] = cells[i];
    const std::pair<int, int> nbrs[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (const auto& nb : nbrs) {
      auto it = where.find(nb);
      if (it != where.end()) entries.emplace_back(i, it->second, 1.0);
    }
  }
  return from_entries(n, entries).row_normalized();
}

SpatialWeights SpatialWeights::size_weighted(
    int n, const std::vector<std::pair<int, int>>& edges,
    const Eigen::VectorXd& sizes) {
  if (sizes.size() != n)
    throw DimensionError("size_weighted: one size per unit required");
  std::vector<std::set<int>> nbr(n);
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw DimensionError("size_weighted: edge index out of range");
    if (i == j) throw DataError("size_weighted: self-edges are not allowed");
    nbr[i].insert(j);
    nbr[j].insert(i);
  }
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < n; ++i) {
    double denom = 0.0;
    for (int j : nbr[i]) {
      if (!(sizes(j) > 0.0))
        throw DataError("size_weighted: unit " + std::to_string(j) +
                        " has non-positive size but is someone's neighbour");
      denom += std::sqrt(sizes(j));
    }
    for (int j : nbr[i]) entries.emplace_back(i, j, std::sqrt(sizes(j)) / denom);
  }
  return from_entries(n, entries, /*row_normalized=*/true);
}

SpatialWeights SpatialWeights::row_normalized() const {
  Sparse w = w_;
  for (int i = 0; i < w.rows(); ++i) {
    double rs = 0.0;
    for (Sparse::InnerIterator it(w, i); it; ++it) rs += it.value();
    if (rs > 0.0)
      for (Sparse::InnerIterator it(w, i); it; ++it) it.valueRef() /= rs;
  }
  return SpatialWeights(std::move(w), true);
}

Eigen::MatrixXd SpatialWeights::lag(const Eigen::Ref<const Eigen::MatrixXd>& m) const {
  if (m.rows() != size())
    throw DimensionError("SpatialWeights::lag: row count does not match units");
  return w_ * m;
}

double SpatialWeights::inf_norm() const {
  double best = 0.0;
  for (int i = 0; i < w_.rows(); ++i) {
    double rs = 0.0;
    for (Sparse::InnerIterator it(w_, i); it; ++it) rs += std::abs(it.value());
    best = std::max(best, rs);
  }
  return best;
}

int SpatialWeights::isolated_count() const {
  int count = 0;
  for (int i = 0; i < w_.rows(); ++i) {
    bool any = false;
    for (Sparse::InnerIterator it(w_, i); it; ++it)
      if (it.value() != 0.0) { any = true; break; }
    if (!any) ++count;
  }
  return count;
}

Eigen::MatrixXd build_instruments(const SpatialWeights& w,
                                  const Eigen::MatrixXd& x, int max_order) {
  if (max_order < 1)
    throw DomainError("build_instruments: max_order must be at least 1");
  if (x.rows() != w.size())
    throw DimensionError("build_instruments: covariate rows do not match units");
  const int n = static_cast<int>(x.rows());
  const int c = static_cast<int>(x.cols()) + 1;
  Eigen::MatrixXd base(n, c);
  base.col(0).setOnes();
  base.rightCols(x.cols()) = x;
  Eigen::MatrixXd out(n, max_order * c);
  Eigen::MatrixXd cur = base;
  for (int p = 0; p < max_order; ++p) {
    cur = w.lag(cur);
    out.middleCols(p * c, c) = cur;
  }
  return out;
}

CompletenessReport completeness_check(const SpatialWeights& w,
                                      const Eigen::MatrixXd& alpha_grid,
                                      const Grid& grid) {
  if (alpha_grid.rows() != grid.size() || alpha_grid.cols() != grid.size())
    throw DimensionError("completeness_check: kernel values must be G x G");
  CompletenessReport rep;
  rep.kernel_sup = alpha_grid.cwiseAbs().maxCoeff();
  rep.row_sum_norm = w.inf_norm();
  rep.product = rep.kernel_sup * rep.row_sum_norm;
  rep.product_ok = rep.product < 1.0;
  // alpha_grid(g, g') = alpha(t_g, s_{g'}): column sums approximate the
  // integral over t at fixed s.
  const double max_col = (grid.step() * alpha_grid.cwiseAbs().colwise().sum())
                             .maxCoeff();
  rep.alt_product = rep.row_sum_norm * max_col;
  rep.alt_ok = rep.alt_product < 1.0;
  return rep;
}

}  // namespace fsar
