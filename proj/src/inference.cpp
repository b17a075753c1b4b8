#include "fsar/inference.hpp"

#include <cmath>

#include "fsar/common.hpp"

namespace fsar {

namespace {

void check_interval(double lo, double hi) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
    throw DomainError("wald: interval must satisfy 0 <= lo < hi <= 1");
}

WaldResult finish(double s, double lo, double hi, double t_n, double mu,
                  double v) {
  if (!(v > 0.0))
    throw NumericalError("wald: variance estimate is not positive");
  WaldResult res;
  res.s = s;
  res.interval_lo = lo;
  res.interval_hi = hi;
  res.t_n = t_n;
  res.mu_hat = mu;
  res.v_hat = v;
  res.z = (t_n - mu) / std::sqrt(v);
  res.p_value = 1.0 - normal_cdf(res.z);
  for (double level : {0.10, 0.05, 0.01})
    res.reject_at[level] = res.z > normal_upper_quantile(level);
  return res;
}

}  // namespace

double wald_statistic(const DesignSet& design, const Eigen::VectorXd& theta,
                      double lo, double hi) {
  check_interval(lo, hi);
  if (theta.size() != design.n_basis())
    throw DimensionError("wald_statistic: theta length does not match basis");
  const Eigen::MatrixXd gram_i = design.basis().gram_on(lo, hi, design.grid());
  return design.units() * theta.dot(gram_i * theta);
}

std::pair<double, double> wald_moments(const DesignSet& design,
                                       const Eigen::VectorXd& resid, double lo,
                                       double hi, const PenaltySpec& penalty) {
  check_interval(lo, hi);
  penalty.validate(design.n_basis());
  const int n = design.units();
  if (resid.size() != n)
    throw DimensionError("wald_moments: residual length does not match units");

  // Xi = [arx/n + lambda D]^{-1} (Rx'Z/n) (Z'Z/n)^-.  The two 1/n scalings
  // cancel against the pseudo-inverse: (Z'Z/n)^- = n (Z'Z)^-, so
  // Xi = Sigma^{-1} (Z'Rx)' (Z'Z)^-.
  const Eigen::MatrixXd sig = design.arx() / n + penalty.lambda * penalty.d;
  Eigen::MatrixXd xi;
  if (penalty.lambda == 0.0) {
    xi = sym_pinv(sig) * (design.zt_rx().transpose() * design.pz());
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sig);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("wald_moments: penalized system is singular");
    xi = ldlt.solve(design.zt_rx().transpose() * design.pz());
  }

  const Eigen::MatrixXd gram_i = design.basis().gram_on(lo, hi, design.grid());
  const Eigen::MatrixXd m1 = xi.transpose() * gram_i * xi;  // (L+dx)^2
  const Eigen::MatrixXd zvz =
      (design.z().transpose() * resid.array().square().matrix().asDiagonal() *
       design.z()) / n;
  const Eigen::MatrixXd p = m1 * zvz;
  const double mu = p.trace();
  const double v = 2.0 * p.cwiseProduct(p.transpose()).sum();  // 2 tr(P P)
  return {mu, v};
}

WaldResult wald_test(const DesignSet& design, double s, double lo, double hi,
                     const PenaltySpec& penalty) {
  check_interval(lo, hi);
  const Eigen::VectorXd theta = design.fit_theta(s, penalty);
  const Eigen::VectorXd resid = design.residuals(s);
  const double t_n = wald_statistic(design, theta, lo, hi);
  const auto [mu, v] = wald_moments(design, resid, lo, hi, penalty);
  return finish(s, lo, hi, t_n, mu, v);
}

WaldResult wald_test_general(const DesignSet& design, double s, double lo,
                             double hi, const PenaltySpec& penalty,
                             const Eigen::VectorXd& null_curve) {
  check_interval(lo, hi);
  const Grid& grid = design.grid();
  if (null_curve.size() != grid.size())
    throw DimensionError("wald_test_general: null curve must be on the grid");
  const Eigen::VectorXd theta = design.fit_theta(s, penalty);
  const Eigen::VectorXd resid = design.residuals(s);

  // n * integral over (lo, hi] of (alpha_hat - a)^2, summed on the same nodes
  // the Gram matrix uses so that a = 0 reproduces wald_statistic exactly.
  const Eigen::MatrixXd phi = design.basis().eval_on(grid);
  double acc = 0.0;
  for (int g = 0; g < grid.size(); ++g) {
    const double t = grid.point(g);
    if (t > lo && t <= hi) {
      const double dev = phi.row(g).dot(theta) - null_curve(g);
      acc += dev * dev;
    }
  }
  const double t_n = design.units() * grid.step() * acc;
  const auto [mu, v] = wald_moments(design, resid, lo, hi, penalty);
  return finish(s, lo, hi, t_n, mu, v);
}

}  // namespace fsar
