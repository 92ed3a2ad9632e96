#include "regdiag/svdtools.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "regdiag/errors.hpp"

namespace regdiag {

SvdFactors compute_svd(const Eigen::MatrixXd& A) {
  if (A.rows() < A.cols() || A.cols() < 2)
    throw ValidationError("invalid-dimension: compute_svd requires m >= n >= 2");
  if (!A.allFinite()) throw ValidationError("invalid-matrix: non-finite entries");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  SvdFactors f;
  f.sigma = svd.singularValues();
  f.U = svd.matrixU();
  f.V = svd.matrixV();

  // Sign convention: largest-magnitude entry of each v_i positive.
  for (Eigen::Index j = 0; j < f.V.cols(); ++j) {
    Eigen::Index imax = 0;
    f.V.col(j).cwiseAbs().maxCoeff(&imax);
    if (f.V(imax, j) < 0.0) {
      f.V.col(j) = -f.V.col(j);
      f.U.col(j) = -f.U.col(j);
    }
  }
  return f;
}

PicardData picard_data(const SvdFactors& svd, const Eigen::VectorXd& b) {
  PicardData pd;
  pd.sigma = svd.sigma;
  pd.coeff = (svd.U.transpose() * b).cwiseAbs();
  pd.ratio = pd.coeff.cwiseQuotient(pd.sigma);
  return pd;
}

Eigen::VectorXd tsvd_solve(const SvdFactors& svd, const Eigen::VectorXd& b, int k) {
  if (k < 1) throw ValidationError("invalid-truncation: k must be >= 1");
  if (k > svd.n()) throw ValidationError("invalid-truncation: k exceeds n");
  const Eigen::VectorXd c = svd.U.leftCols(k).transpose() * b;
  return svd.V.leftCols(k) * c.cwiseQuotient(svd.sigma.head(k));
}

TsvdCurve tsvd_error_curve(const SvdFactors& svd, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& x_true, int kmax) {
  if (kmax < 1 || kmax > svd.n()) throw ValidationError("invalid-truncation: bad kmax");
  const double xnorm = x_true.norm();
  if (xnorm == 0.0) throw ValidationError("degenerate-truth: x_true is zero");

  TsvdCurve curve;
  Eigen::VectorXd c = svd.U.transpose() * b;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(svd.V.rows());
  // ||A x_k - b||^2 = ||b||^2 - sum_{i<=k} c_i^2 for b in the span sense
  double res2 = b.squaredNorm();
  for (int k = 1; k <= kmax; ++k) {
    x += (c(k - 1) / svd.sigma(k - 1)) * svd.V.col(k - 1);
    res2 -= c(k - 1) * c(k - 1);
    curve.rel_error.push_back((x - x_true).norm() / xnorm);
    curve.residual_norm.push_back(std::sqrt(std::max(res2, 0.0)));
  }
  curve.argmin = 1 + static_cast<int>(std::min_element(curve.rel_error.begin(),
                                                       curve.rel_error.end()) -
                                      curve.rel_error.begin());
  return curve;
}

Eigen::VectorXd tikhonov_solve(const SvdFactors& svd, const Eigen::VectorXd& b, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("invalid-parameter: lambda must be > 0");
  const Eigen::VectorXd c = svd.U.transpose() * b;
  Eigen::VectorXd w(svd.n());
  for (Eigen::Index i = 0; i < svd.n(); ++i) {
    const double s2 = svd.sigma(i) * svd.sigma(i);
    w(i) = (s2 / (s2 + lambda * lambda)) * c(i) / svd.sigma(i);
  }
  return svd.V * w;
}

namespace {
double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}
}  // namespace

TransitionReport transition_index(const PicardData& pic, double eta) {
  if (!(eta > 0.0)) throw ValidationError("invalid-parameter: eta must be > 0");
  const int n = static_cast<int>(pic.coeff.size());
  if (n < 2) throw ValidationError("invalid-dimension: need at least two coefficients");
  const double nu = 1.5;

  TransitionReport rep;
  rep.eta_estimate = eta;
  int k0 = 0;
  for (int i = 0; i < n; ++i) {
    const double lo = pic.coeff(std::max(i - 1, 0));
    const double mid = pic.coeff(i);
    const double hi = pic.coeff(std::min(i + 1, n - 1));
    if (median3(lo, mid, hi) > nu * eta)
      k0 = i + 1;
    else
      break;
  }
  if (k0 == 0) {
    rep.k0 = 1;
    rep.rule = "noise-floor-everywhere";
  } else {
    rep.k0 = std::min(k0, n - 1);
    rep.rule = "median-above-noise";
  }
  return rep;
}

}  // namespace regdiag
