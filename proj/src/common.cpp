#include "fsar/common.hpp"

#include <cmath>
#include <numbers>

namespace fsar {

Eigen::MatrixXd sym_pinv(const Eigen::MatrixXd& a, double rcond, int* rank_out) {
  if (a.rows() != a.cols())
    throw DimensionError("sym_pinv: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(a));
  if (es.info() != Eigen::Success)
    throw NumericalError("sym_pinv: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = rcond * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  int rank = 0;
  for (int k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) > cutoff) {
      inv(k) = 1.0 / ev(k);
      ++rank;
    }
  }
  if (rank_out) *rank_out = rank;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_upper_quantile(double alpha) {
  // Only the conventional test levels are needed; values are standard.
  if (alpha == 0.10) return 1.2815515655446004;
  if (alpha == 0.05) return 1.6448536269514722;
  if (alpha == 0.01) return 2.3263478740408408;
  throw DomainError("normal_upper_quantile: supported levels are 0.10, 0.05, 0.01");
}

}  // namespace fsar
