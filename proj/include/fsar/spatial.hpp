#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <utility>
#include <vector>

#include "fsar/grid.hpp"

namespace fsar {

// Sparse spatial weight matrix with a zero diagonal.  Rows may be empty
// (isolated units) — on a half-occupied lattice that happens naturally and
// everything downstream must cope.
class SpatialWeights {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  // General entry list.  Duplicated (i, j) pairs are summed.  Diagonal or
  // out-of-range entries, NaN or negative weights are rejected.
  static SpatialWeights from_entries(
      int n, const std::vector<Eigen::Triplet<double>>& entries,
      bool row_normalized = false);

  // Rook-contiguity weights for units placed on an r x c lattice: two units
  // are neighbours when their cells share an edge.  `cells` lists the occupied
  // (row, col) positions, one per unit, in unit order.  Rows are normalized.
  static SpatialWeights rook_lattice(int rows, int cols,
                                     const std::vector<std::pair<int, int>>& cells);

  // Weights w_ij = sqrt(size_j) / sum_{l adjacent to i} sqrt(size_l) over an
  // undirected 0/1 adjacency given as an edge list.  Sizes must be positive.
  static SpatialWeights size_weighted(int n,
                                      const std::vector<std::pair<int, int>>& edges,
                                      const Eigen::VectorXd& sizes);

  // Divide each row by its sum; zero rows stay zero.  Idempotent.
  SpatialWeights row_normalized() const;

  int size() const { return static_cast<int>(w_.rows()); }
  bool is_row_normalized() const { return normalized_; }
  const Sparse& matrix() const { return w_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(w_); }

  // Spatial lag W * M for an n x c matrix of unit rows.
  Eigen::MatrixXd lag(const Eigen::Ref<const Eigen::MatrixXd>& m) const;

  // Maximum absolute row sum.
  double inf_norm() const;

  int isolated_count() const;

 private:
  SpatialWeights(Sparse w, bool normalized)
      : w_(std::move(w)), normalized_(normalized) {}

  Sparse w_;
  bool normalized_;
};

// Instrument block [W c, W^2 c, ..., W^p c] for c = [1 | X], stacked by lag
// order: columns are ordered p = 1..max_order, within order as constant, x_1,
// ..., x_d.  Duplicate or collinear columns are left in place; the estimator
// handles them through generalized inverses.
Eigen::MatrixXd build_instruments(const SpatialWeights& w,
                                  const Eigen::MatrixXd& x, int max_order);

struct CompletenessReport {
  double kernel_sup;      // sup |alpha(t, s)| over the grid
  double row_sum_norm;    // ||W||_inf
  double product;         // kernel_sup * ||W||_inf
  bool product_ok;        // product < 1 (sufficient condition)
  double alt_product;     // ||W||_inf * max_s integral |alpha(t, s)| dt
  bool alt_ok;            // alternative sufficient condition
};

// Both sufficient conditions for invertibility of the model operator; callers
// treat a failure as a warning, because either bound alone is conservative.
CompletenessReport completeness_check(const SpatialWeights& w,
                                      const Eigen::MatrixXd& alpha_grid,
                                      const Grid& grid);

}  // namespace fsar
