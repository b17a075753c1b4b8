#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>

#include "fsar/estimator.hpp"

namespace fsar {

struct WaldResult {
  double s = 0.0;
  double interval_lo = 0.0;
  double interval_hi = 1.0;
  double t_n = 0.0;      // n * integral of alpha_hat^2 over the interval
  double mu_hat = 0.0;   // estimated mean under the null
  double v_hat = 0.0;    // estimated variance under the null
  double z = 0.0;        // (t_n - mu_hat) / sqrt(v_hat)
  double p_value = 1.0;  // upper tail
  std::map<double, bool> reject_at;  // levels 0.10, 0.05, 0.01
};

// n * theta' Gram_I theta, the quadratic-form version of the statistic.
double wald_statistic(const DesignSet& design, const Eigen::VectorXd& theta,
                      double lo, double hi);

// Plug-in estimates (mu_hat, v_hat) of the null mean and variance of the
// statistic: with Xi = [Rx'M_z Rx/n + lambda D]^{-1} (Rx'Z/n)(Z'Z/n)^- and
// P = Xi' Gram_I Xi (Z'VZ/n), mu = tr P and v = 2 tr P^2.
std::pair<double, double> wald_moments(const DesignSet& design,
                                       const Eigen::VectorXd& resid, double lo,
                                       double hi, const PenaltySpec& penalty);

// One-sided test of alpha(., s) = 0 on [lo, hi] at evaluation point s.
WaldResult wald_test(const DesignSet& design, double s, double lo, double hi,
                     const PenaltySpec& penalty);

// Same test against a general null curve a(t) given by its values on the
// design grid; a = 0 reduces exactly to wald_test.
WaldResult wald_test_general(const DesignSet& design, double s, double lo,
                             double hi, const PenaltySpec& penalty,
                             const Eigen::VectorXd& null_curve);

}  // namespace fsar
