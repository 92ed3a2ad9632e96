#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "regdiag/problems.hpp"

namespace regdiag {

struct PicardData {
  Eigen::VectorXd sigma;
  Eigen::VectorXd coeff;  // |u_i^T b|
  Eigen::VectorXd ratio;  // coeff_i / sigma_i
};

struct TransitionReport {
  int k0 = 1;
  double eta_estimate = 0.0;
  std::string rule;
};

struct TsvdCurve {
  std::vector<double> rel_error;      // rel_error[k-1] for k = 1..kmax
  std::vector<double> residual_norm;  // ||A x_k - b||
  int argmin = 1;                     // 1-based best index
};

// Full SVD with descending singular values; sign convention: the
// largest-magnitude entry of each right singular vector is positive.
SvdFactors compute_svd(const Eigen::MatrixXd& A);

PicardData picard_data(const SvdFactors& svd, const Eigen::VectorXd& b);

Eigen::VectorXd tsvd_solve(const SvdFactors& svd, const Eigen::VectorXd& b, int k);

TsvdCurve tsvd_error_curve(const SvdFactors& svd, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& x_true, int kmax);

Eigen::VectorXd tikhonov_solve(const SvdFactors& svd, const Eigen::VectorXd& b, double lambda);

// Transition index k0 per the noise-floor rule: largest k such that the
// 3-point median of the Picard coefficients stays above nu*eta for all i <= k,
// clamped to [1, n-1]. nu = 1.5.
TransitionReport transition_index(const PicardData& pic, double eta);

}  // namespace regdiag
