#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fsar {

// Input data is malformed (bad CSV, inconsistent ids, ties that cannot be broken).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value lies outside the mathematical domain of the operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Matrix / vector shapes do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Run configuration is invalid or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iteration diverged, a system is singular beyond repair, or a result is not finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Symmetric generalized inverse via eigendecomposition.  Eigenvalues with
// |e| <= rcond * max|e| are treated as zero, which is the convention used for
// the A^- matrices throughout the estimator (projectors built from possibly
// collinear instrument blocks stay exact projectors this way).
Eigen::MatrixXd sym_pinv(const Eigen::MatrixXd& a, double rcond = 1e-10,
                         int* rank_out = nullptr);

// Standard normal CDF.
double normal_cdf(double z);

// Upper-tail standard normal quantiles for the test levels used by WaldResult.
// normal_upper_quantile(0.05) == 1.6448536...
double normal_upper_quantile(double alpha);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

}  // namespace fsar
