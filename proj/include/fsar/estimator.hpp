#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fsar/dgp.hpp"
#include "fsar/funcspace.hpp"
#include "fsar/spatial.hpp"

namespace fsar {

// Ridge-type penalty lambda * D added (scaled by n) to the normal equations
// of the second-stage coefficient block.
struct PenaltySpec {
  Eigen::MatrixXd d;
  double lambda = 0.0;

  static PenaltySpec ridge(double lambda, int k);

  // The rate used throughout: lambda = lambda_c * n^{-3/5}.
  static double lambda_rule(double lambda_c, int n);

  void validate(int k) const;
};

// Everything about a model fit that does not depend on the evaluation point s:
// instruments, basis scores of the lagged outcomes, and the cross-moment
// blocks of the two-stage estimator.  Projection matrices (M_z, M_x, S) are
// n x n and never formed; every product that involves one is routed through
// the instrument block, e.g. A' M_z B = (Z'A)' (Z'Z)^- (Z'B).
class DesignSet {
 public:
  DesignSet(FunctionalSample outcomes, SpatialWeights weights,
            Eigen::MatrixXd covariates, BSplineBasis basis,
            int max_iv_order = 2, bool add_intercept = true,
            Eigen::MatrixXd extra_instruments = Eigen::MatrixXd(),
            std::vector<std::string> covariate_names = {});

  const FunctionalSample& outcomes() const { return q_; }
  const SpatialWeights& weights() const { return w_; }
  const BSplineBasis& basis() const { return basis_; }
  const Grid& grid() const { return q_.grid(); }
  int units() const { return q_.units(); }
  int n_covariates() const { return static_cast<int>(x_.cols()); }
  int n_basis() const { return basis_.size(); }
  int n_instruments() const { return static_cast<int>(z_.cols()); }
  const std::vector<std::string>& covariate_names() const { return names_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::MatrixXd& z() const { return z_; }
  const Eigen::MatrixXd& rbar() const { return rbar_; }

  // Smallest eigenvalue of Rx' M_z Rx / n, the identification diagnostic
  // reported in run manifests.
  double min_eig_concentration() const { return min_eig_arx_n_; }

  // -- estimation at a point s (s must lie strictly inside (0, 1)) --

  // First-stage coefficient estimate beta_hat(s).
  Eigen::VectorXd fit_beta(double s) const;

  // Penalized second-stage coefficients theta_hat(s) in the basis.
  Eigen::VectorXd fit_theta(double s, const PenaltySpec& penalty) const;

  // Unpenalized solution (generalized inverse), used for residuals.
  Eigen::VectorXd theta_check(double s) const;

  // eps_hat(s) = q(s) - Rbar theta_check - X beta.
  Eigen::VectorXd residuals(double s, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& theta_chk) const;
  Eigen::VectorXd residuals(double s) const;

  // Heteroskedasticity-robust sandwich for beta_hat(s); standard errors are
  // sqrt(diag / n).
  Eigen::MatrixXd beta_cov(const Eigen::VectorXd& resid) const;

  // K x K middle matrix of the alpha_hat sandwich; the pointwise variance is
  // phi(t)' Sigma phi(t) and the standard error sqrt(of that / n).
  Eigen::MatrixXd alpha_cov_matrix(const PenaltySpec& penalty,
                                   const Eigen::VectorXd& resid) const;
  double alpha_se(double t, const PenaltySpec& penalty,
                  const Eigen::VectorXd& resid) const;

  double eval_alpha(const Eigen::VectorXd& theta, double t) const;

  // Internal blocks needed by the inference module.
  const Eigen::MatrixXd& arx() const { return arx_; }        // Rx' M_z Rx
  const Eigen::MatrixXd& umz() const { return umz_; }        // M_z Rx (n x K)
  const Eigen::MatrixXd& zt_rx() const { return zt_rx_; }    // Z' Rx
  const Eigen::MatrixXd& pz() const { return pz_; }          // (Z'Z)^-

 private:
  void check_s(double s) const;
  Eigen::VectorXd outcome_at(double s) const;

  FunctionalSample q_;
  SpatialWeights w_;
  BSplineBasis basis_;
  std::vector<std::string> names_;
  std::vector<std::string> warnings_;

  Eigen::MatrixXd x_;        // n x dx, intercept first when requested
  Eigen::MatrixXd z_;        // n x (L + dx): spatial instruments then X
  Eigen::MatrixXd phi_;      // G x K basis values on the grid
  Eigen::MatrixXd rbar_;     // n x K lagged basis scores
  Eigen::MatrixXd rx_;       // (I - M_x) Rbar
  Eigen::MatrixXd pz_;       // (Z'Z)^-
  Eigen::MatrixXd zt_rbar_, zt_rx_, zt_x_;
  Eigen::MatrixXd arx_;      // Rx' M_z Rx
  Eigen::MatrixXd arx_pinv_;
  Eigen::MatrixXd umz_;      // M_z Rx
  Eigen::MatrixXd isx_;      // (I - S) X
  Eigen::MatrixXd bread_;    // X' (I - S) X
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> bread_qr_;
  double min_eig_arx_n_ = 0.0;
};

struct PointFit {
  double s = 0.0;
  Eigen::VectorXd beta, beta_se;
  Eigen::VectorXd theta, theta_chk;
  Eigen::VectorXd alpha, alpha_se;  // evaluated on the requested t points
  std::string error;                // empty on success

  bool ok() const { return error.empty(); }
};

struct CurveFit {
  std::vector<double> t_values;
  std::vector<std::string> covariate_names;
  std::vector<PointFit> points;
};

// Fit at each s in turn.  A numerical failure at one s is recorded in that
// point's error field rather than aborting the sweep; domain errors (s outside
// (0, 1)) still throw.
CurveFit estimate_curve(const DesignSet& design,
                        const std::vector<double>& s_values,
                        const std::vector<double>& t_values,
                        const PenaltySpec& penalty);

// Feasible version for discretely observed outcomes: interpolate onto the
// grid, then proceed exactly as above.
CurveFit fit_feasible(const DiscreteFunctionObservations& obs,
                      const SpatialWeights& weights,
                      const Eigen::MatrixXd& covariates,
                      const BSplineBasis& basis, const Grid& grid,
                      const std::vector<double>& s_values,
                      const std::vector<double>& t_values,
                      const PenaltySpec& penalty, int max_iv_order = 2,
                      bool add_intercept = true);

}  // namespace fsar
