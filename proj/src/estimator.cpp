#include "fsar/estimator.hpp"

#include <cmath>
#include <string>

#include "fsar/common.hpp"

namespace fsar {

PenaltySpec PenaltySpec::ridge(double lambda, int k) {
  if (lambda < 0.0) throw DomainError("PenaltySpec: lambda must be non-negative");
  return PenaltySpec{Eigen::MatrixXd::Identity(k, k), lambda};
}

double PenaltySpec::lambda_rule(double lambda_c, int n) {
  if (lambda_c < 0.0) throw DomainError("lambda_rule: lambda_c must be non-negative");
  if (n < 1) throw DomainError("lambda_rule: n must be positive");
  return lambda_c * std::pow(static_cast<double>(n), -0.6);
}

void PenaltySpec::validate(int k) const {
  if (d.rows() != k || d.cols() != k)
    throw DimensionError("PenaltySpec: D must be K x K");
  if (lambda < 0.0) throw DomainError("PenaltySpec: lambda must be non-negative");
  if (!d.isApprox(d.transpose(), 1e-10))
    throw DataError("PenaltySpec: D must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw DataError("PenaltySpec: D must be positive semi-definite");
}

DesignSet::DesignSet(FunctionalSample outcomes, SpatialWeights weights,
                     Eigen::MatrixXd covariates, BSplineBasis basis,
                     int max_iv_order, bool add_intercept,
                     Eigen::MatrixXd extra_instruments,
                     std::vector<std::string> covariate_names)
    : q_(std::move(outcomes)), w_(std::move(weights)), basis_(std::move(basis)) {
  const int n = q_.units();
  if (w_.size() != n)
    throw DimensionError("DesignSet: weight matrix size does not match units");
  if (covariates.rows() != n)
    throw DimensionError("DesignSet: covariate rows do not match units");
  if (covariates.cols() < 1)
    throw DimensionError("DesignSet: need at least one covariate");
  if (!covariates.allFinite())
    throw DataError("DesignSet: covariates contain NaN or Inf");
  if (max_iv_order < 1)
    throw DomainError("DesignSet: max_iv_order must be at least 1");

  const int d_raw = static_cast<int>(covariates.cols());
  if (!covariate_names.empty() &&
      static_cast<int>(covariate_names.size()) != d_raw)
    throw DimensionError("DesignSet: covariate name count mismatch");
  if (covariate_names.empty()) {
    covariate_names.reserve(d_raw);
    for (int j = 0; j < d_raw; ++j)
      covariate_names.push_back("x" + std::to_string(j + 1));
  }

  // Regression design: intercept first when requested.
  if (add_intercept) {
    x_.resize(n, d_raw + 1);
    x_.col(0).setOnes();
    x_.rightCols(d_raw) = covariates;
    names_.push_back("intercept");
  } else {
    x_ = covariates;
  }
  names_.insert(names_.end(), covariate_names.begin(), covariate_names.end());

  // Instruments: spatial lags of [1 | X], user-supplied extras, then X itself.
  Eigen::MatrixXd z1 = build_instruments(w_, covariates, max_iv_order);
  const int extra = static_cast<int>(extra_instruments.cols());
  if (extra > 0 && extra_instruments.rows() != n)
    throw DimensionError("DesignSet: extra instrument rows do not match units");
  z_.resize(n, z1.cols() + extra + x_.cols());
  z_.leftCols(z1.cols()) = z1;
  if (extra > 0) z_.middleCols(z1.cols(), extra) = extra_instruments;
  z_.rightCols(x_.cols()) = x_;
  if (z_.cols() > n)
    throw DataError("DesignSet: more instruments than units (" +
                    std::to_string(z_.cols()) + " > " + std::to_string(n) + ")");

  const int k = basis_.size();
  phi_ = basis_.eval_on(q_.grid());
  rbar_ = w_.lag(basis_scores(q_.values(), phi_, q_.grid().step()));

  // M_x residualization of the score block via a least-squares solve.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> x_qr(x_);
  if (x_qr.rank() < x_.cols()) {
    std::string offenders;
    const auto& perm = x_qr.colsPermutation().indices();
    for (int j = x_qr.rank(); j < x_.cols(); ++j)
      offenders += (offenders.empty() ? "" : ", ") + names_[perm(j)];
    throw NumericalError("DesignSet: covariate matrix is rank deficient (" +
                         offenders + ")");
  }
  rx_ = rbar_ - x_ * x_qr.solve(rbar_);

  int z_rank = 0;
  pz_ = sym_pinv(z_.transpose() * z_, 1e-10, &z_rank);
  if (z_rank < z_.cols())
    warnings_.push_back("instrument matrix has rank " + std::to_string(z_rank) +
                        " < " + std::to_string(z_.cols()) +
                        "; redundant columns are absorbed by the generalized inverse");
  if (z_.cols() < x_.cols() + k)
    warnings_.push_back("order condition fails: " + std::to_string(z_.cols()) +
                        " instruments for " + std::to_string(x_.cols() + k) +
                        " unknowns");

  zt_rbar_ = z_.transpose() * rbar_;
  zt_rx_ = z_.transpose() * rx_;
  zt_x_ = z_.transpose() * x_;

  arx_ = symmetrize(zt_rx_.transpose() * pz_ * zt_rx_);
  arx_pinv_ = sym_pinv(arx_);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(arx_ / n);
    min_eig_arx_n_ = es.eigenvalues().minCoeff();
  }
  umz_ = z_ * (pz_ * zt_rx_);

  // S = M_z Rbar (Rbar' M_z Rbar)^- Rbar' M_z applied to X, without the n x n
  // projector: S X = Z (Z'Z)^- (Z'Rbar) G^- (Rbar' M_z X).
  const Eigen::MatrixXd g_r = symmetrize(zt_rbar_.transpose() * pz_ * zt_rbar_);
  const Eigen::MatrixXd g_r_pinv = sym_pinv(g_r);
  const Eigen::MatrixXd rbar_mz_x = zt_rbar_.transpose() * (pz_ * zt_x_);
  isx_ = x_ - z_ * (pz_ * (zt_rbar_ * (g_r_pinv * rbar_mz_x)));
  bread_ = symmetrize(x_.transpose() * isx_);
  bread_qr_.compute(bread_);
  if (bread_qr_.rank() < x_.cols()) {
    std::string offenders;
    const auto& perm = bread_qr_.colsPermutation().indices();
    for (int j = bread_qr_.rank(); j < x_.cols(); ++j)
      offenders += (offenders.empty() ? "" : ", ") + names_[perm(j)];
    throw NumericalError(
        "DesignSet: X'(I-S)X is singular; covariates involved: " + offenders);
  }
}

void DesignSet::check_s(double s) const {
  if (!(s > 0.0 && s < 1.0))
    throw DomainError("evaluation point s must lie strictly inside (0, 1)");
}

Eigen::VectorXd DesignSet::outcome_at(double s) const { return q_.values_at(s); }

Eigen::VectorXd DesignSet::fit_beta(double s) const {
  check_s(s);
  return bread_qr_.solve(isx_.transpose() * outcome_at(s));
}

Eigen::VectorXd DesignSet::fit_theta(double s, const PenaltySpec& penalty) const {
  check_s(s);
  penalty.validate(n_basis());
  const Eigen::VectorXd rhs = umz_.transpose() * outcome_at(s);
  if (penalty.lambda == 0.0) return arx_pinv_ * rhs;
  const int n = units();
  Eigen::MatrixXd m = arx_ + (penalty.lambda * n) * penalty.d;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("fit_theta: penalized normal equations are singular");
  return ldlt.solve(rhs);
}

Eigen::VectorXd DesignSet::theta_check(double s) const {
  check_s(s);
  return arx_pinv_ * (umz_.transpose() * outcome_at(s));
}

Eigen::VectorXd DesignSet::residuals(double s, const Eigen::VectorXd& beta,
                                     const Eigen::VectorXd& theta_chk) const {
  check_s(s);
  if (beta.size() != x_.cols() || theta_chk.size() != n_basis())
    throw DimensionError("residuals: coefficient lengths do not match design");
  return outcome_at(s) - rbar_ * theta_chk - x_ * beta;
}

Eigen::VectorXd DesignSet::residuals(double s) const {
  return residuals(s, fit_beta(s), theta_check(s));
}

Eigen::MatrixXd DesignSet::beta_cov(const Eigen::VectorXd& resid) const {
  const int n = units();
  if (resid.size() != n)
    throw DimensionError("beta_cov: residual length does not match units");
  const Eigen::MatrixXd meat =
      (isx_.transpose() * resid.array().square().matrix().asDiagonal() * isx_) / n;
  // C = (bread/n)^-1 meat (bread/n)^-1, using the rank-revealing factorization
  // of bread and its symmetry.
  const Eigen::MatrixXd tmp = bread_qr_.solve(meat);
  const Eigen::MatrixXd cov = bread_qr_.solve(tmp.transpose());
  return symmetrize(static_cast<double>(n) * static_cast<double>(n) * cov);
}

Eigen::MatrixXd DesignSet::alpha_cov_matrix(const PenaltySpec& penalty,
                                            const Eigen::VectorXd& resid) const {
  penalty.validate(n_basis());
  const int n = units();
  if (resid.size() != n)
    throw DimensionError("alpha_cov_matrix: residual length does not match units");
  const Eigen::MatrixXd inner =
      (umz_.transpose() * resid.array().square().matrix().asDiagonal() * umz_) / n;
  const Eigen::MatrixXd sig = arx_ / n + penalty.lambda * penalty.d;
  if (penalty.lambda == 0.0) {
    const Eigen::MatrixXd sig_pinv = sym_pinv(sig);
    return symmetrize(sig_pinv * inner * sig_pinv);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sig);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("alpha_cov_matrix: penalized system is singular");
  const Eigen::MatrixXd tmp = ldlt.solve(inner);
  return symmetrize(ldlt.solve(tmp.transpose()));
}

double DesignSet::alpha_se(double t, const PenaltySpec& penalty,
                           const Eigen::VectorXd& resid) const {
  const Eigen::MatrixXd cov = alpha_cov_matrix(penalty, resid);
  const Eigen::VectorXd phi_t = basis_.eval(t);
  const double var = phi_t.dot(cov * phi_t);
  return std::sqrt(std::max(0.0, var) / units());
}

double DesignSet::eval_alpha(const Eigen::VectorXd& theta, double t) const {
  if (theta.size() != n_basis())
    throw DimensionError("eval_alpha: theta length does not match basis");
  return basis_.eval(t).dot(theta);
}

CurveFit estimate_curve(const DesignSet& design,
                        const std::vector<double>& s_values,
                        const std::vector<double>& t_values,
                        const PenaltySpec& penalty) {
  penalty.validate(design.n_basis());
  for (double s : s_values)
    if (!(s > 0.0 && s < 1.0))
      throw DomainError("estimate_curve: every s must lie strictly inside (0, 1)");

  CurveFit out;
  out.t_values = t_values;
  out.covariate_names = design.covariate_names();
  out.points.reserve(s_values.size());
  const int nt = static_cast<int>(t_values.size());
  for (double s : s_values) {
    PointFit pf;
    pf.s = s;
    try {
      pf.beta = design.fit_beta(s);
      pf.theta = design.fit_theta(s, penalty);
      pf.theta_chk = design.theta_check(s);
      const Eigen::VectorXd resid = design.residuals(s, pf.beta, pf.theta_chk);
      const Eigen::MatrixXd bcov = design.beta_cov(resid);
      pf.beta_se = (bcov.diagonal() / design.units()).cwiseMax(0.0).cwiseSqrt();
      const Eigen::MatrixXd acov = design.alpha_cov_matrix(penalty, resid);
      pf.alpha.resize(nt);
      pf.alpha_se.resize(nt);
      for (int j = 0; j < nt; ++j) {
        const Eigen::VectorXd phi_t = design.basis().eval(t_values[j]);
        pf.alpha(j) = phi_t.dot(pf.theta);
        pf.alpha_se(j) =
            std::sqrt(std::max(0.0, phi_t.dot(acov * phi_t)) / design.units());
      }
    } catch (const NumericalError& e) {
      pf.error = e.what();
    }
    out.points.push_back(std::move(pf));
  }
  return out;
}

CurveFit fit_feasible(const DiscreteFunctionObservations& obs,
                      const SpatialWeights& weights,
                      const Eigen::MatrixXd& covariates,
                      const BSplineBasis& basis, const Grid& grid,
                      const std::vector<double>& s_values,
                      const std::vector<double>& t_values,
                      const PenaltySpec& penalty, int max_iv_order,
                      bool add_intercept) {
  FunctionalSample q = interpolate_sample(obs, grid);
  DesignSet design(std::move(q), weights, covariates, basis, max_iv_order,
                   add_intercept);
  return estimate_curve(design, s_values, t_values, penalty);
}

}  // namespace fsar
