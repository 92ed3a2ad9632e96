#include "regdiag/subspace.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace regdiag {

double sin_theta_exact(const SvdFactors& svd, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = svd.V.rows();
  const Eigen::Index k = Q.cols();
  if (k < 1 || k > n - 1) throw ValidationError("invalid-parameter: need 1 <= k <= n-1");
  const double defect =
      (Q.transpose() * Q - Eigen::MatrixXd::Identity(k, k)).norm();
  if (defect > 1e-9) throw ValidationError("invalid-basis: Q is not orthonormal");

  const Eigen::MatrixXd cross = svd.V.rightCols(n - k).transpose() * Q;
  Eigen::JacobiSVD<Eigen::MatrixXd> s(cross);
  return std::min(1.0, s.singularValues()(0));
}

double delta_norm_from_sin(double sin_theta) {
  if (!(sin_theta >= 0.0) || sin_theta > 1.0)
    throw ValidationError("invalid-parameter: sin_theta outside [0,1]");
  if (sin_theta == 1.0) return std::numeric_limits<double>::infinity();
  return sin_theta / std::sqrt((1.0 - sin_theta) * (1.0 + sin_theta));
}

LagrangeFactors lagrange_factors(const Eigen::VectorXd& sigma, int k) {
  if (k < 2) throw ValidationError("invalid-parameter: lagrange_factors needs k >= 2");
  if (sigma.size() < k) throw ValidationError("invalid-parameter: not enough singular values");
  for (int i = 0; i + 1 < k; ++i)
    if (!(sigma(i) > sigma(i + 1)) || !(sigma(i + 1) > 0.0))
      throw ValidationError("division-by-zero-gap: singular values must be strictly decreasing");

  // log |sigma_j^2 - sigma_i^2| = 2 log(hi) + log1p(-(lo/hi)^2)
  LagrangeFactors lf;
  lf.value.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    double acc = 0.0;
    for (int i = 0; i < k; ++i) {
      if (i == j) continue;
      const double hi = std::max(sigma(i), sigma(j));
      const double lo = std::min(sigma(i), sigma(j));
      const double r = lo / hi;
      acc += 2.0 * std::log(sigma(i)) - (2.0 * std::log(hi) + std::log1p(-r * r));
    }
    lf.value[static_cast<std::size_t>(j)] = std::exp(acc);
  }
  lf.k1 = 1;
  for (int j = 0; j < k; ++j)
    if (lf.value[static_cast<std::size_t>(j)] >= lf.value[static_cast<std::size_t>(lf.k1) - 1])
      lf.k1 = j + 1;  // ties toward larger j
  return lf;
}

double estimate_delta_severe(const Eigen::VectorXd& sigma, double coeff_ratio,
                             double rho, int k) {
  if (!(rho > 1.0)) throw ValidationError("invalid-decay: rho must be > 1");
  if (k < 1 || k >= sigma.size()) throw ValidationError("invalid-parameter: bad k");
  const double c = (k == 1) ? 2.0 : 3.0;
  return (sigma(k) / sigma(k - 1)) * coeff_ratio * (1.0 + c / (rho * rho));
}

double estimate_delta_moderate(const Eigen::VectorXd& sigma, double coeff_ratio,
                               double alpha, int k, double lagrange_max) {
  if (!(alpha > 0.5)) throw ValidationError("invalid-decay: alpha must be > 1/2");
  if (k < 1 || k >= sigma.size()) throw ValidationError("invalid-parameter: bad k");
  if (k == 1) return coeff_ratio * std::sqrt(1.0 / (2.0 * alpha - 1.0));
  const double kk = static_cast<double>(k);
  const double bound =
      std::sqrt(kk * kk / (4.0 * alpha * alpha - 1.0) + kk / (2.0 * alpha - 1.0));
  return coeff_ratio * bound * lagrange_max;
}

LagrangeSevereEstimate estimate_lagrange_severe(double rho, int k) {
  if (!(rho > 1.0)) throw ValidationError("invalid-decay: rho must be > 1");
  if (k < 1) throw ValidationError("invalid-parameter: k must be >= 1");
  LagrangeSevereEstimate est;
  est.max_estimate = 1.0 + 3.0 / (rho * rho);
  est.per_j.resize(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) {
    // prod_{i=j+1..k} (sigma_j/sigma_i)^2 = rho^{(k-j)(k-j+1)} for sigma_i = rho^{-i}
    const double d = static_cast<double>(k - j);
    est.per_j[static_cast<std::size_t>(j) - 1] =
        est.max_estimate * std::exp(-d * (d + 1.0) * std::log(rho));
  }
  return est;
}

LagrangeModerateEstimate estimate_lagrange_moderate(double alpha, int k) {
  if (!(alpha > 0.5)) throw ValidationError("invalid-decay: alpha must be > 1/2");
  if (k < 1) throw ValidationError("invalid-parameter: k must be >= 1");
  LagrangeModerateEstimate est;
  est.upper_estimate = 1.0 + static_cast<double>(k) / (2.0 * alpha + 1.0);
  est.lower_bound = static_cast<double>(k) / (2.0 * alpha + 1.0);
  est.lower_active = static_cast<double>(k) >= 2.0 * alpha + 1.0;
  return est;
}

RitzConditionReport ritz_condition_check(const SvdFactors& svd, double sin_theta,
                                         double theta_k, int k, double delta) {
  if (!(sin_theta >= 0.0) || sin_theta > 1.0)
    throw ValidationError("invalid-parameter: sin_theta outside [0,1]");
  if (!(delta > 0.0)) throw ValidationError("invalid-parameter: delta must be > 0");
  if (k < 1 || k >= svd.n()) throw ValidationError("invalid-parameter: bad k");

  RitzConditionReport rep;
  rep.k = k;
  rep.delta_for_small = delta;
  rep.theta_k = theta_k;
  rep.sigma_kplus1 = svd.sigma(k);
  rep.sigma_ratio = svd.sigma(k) / svd.sigma(k - 1);
  rep.theta_gt_sigma = theta_k > rep.sigma_kplus1;

  if (sin_theta == 1.0) {
    rep.degenerate = true;
    rep.eps_k = 0.0;
    return rep;
  }
  const double eps = std::sqrt((1.0 - sin_theta) * (1.0 + sin_theta));
  const double eps2 = eps * eps;
  rep.eps_k = eps;
  rep.sufficient_large_holds = eps >= rep.sigma_ratio;
  const double s1_over = svd.sigma(0) / svd.sigma(k);
  rep.sufficient_small_holds = eps2 <= delta / (s1_over * s1_over - 1.0);
  const double sk2 = svd.sigma(k - 1) * svd.sigma(k - 1);
  const double sn2 = svd.sigma(svd.n() - 1) * svd.sigma(svd.n() - 1);
  const double s12 = svd.sigma(0) * svd.sigma(0);
  const double skp2 = svd.sigma(k) * svd.sigma(k);
  rep.rayleigh_lower = eps2 * sk2 + (1.0 - eps2) * sn2;
  rep.rayleigh_upper = eps2 * s12 + (1.0 - eps2) * skp2;
  return rep;
}

KrylovBasis explicit_krylov_basis(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int k) {
  const Eigen::Index n = A.cols();
  if (k < 1 || k > 24) throw ValidationError("invalid-parameter: explicit powers need k <= 24");
  if (n > 128) throw ValidationError("invalid-parameter: explicit powers need n <= 128");

  Eigen::MatrixXd K(n, k);
  Eigen::VectorXd w = A.transpose() * b;
  if (w.norm() == 0.0) throw ValidationError("degenerate-start: A^T b is zero");
  K.col(0) = w / w.norm();
  for (int j = 1; j < k; ++j) {
    w = A.transpose() * (A * K.col(j - 1));
    const double nw = w.norm();
    if (nw == 0.0) throw NumericalError("rank-deficient-krylov: power column vanished");
    K.col(j) = w / nw;
  }

  KrylovBasis basis;
  basis.Q.resize(n, k);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = K.col(j);
    v.noalias() -= basis.Q.leftCols(j) * (basis.Q.leftCols(j).transpose() * v);
    const double first_pass = v.norm();
    if (first_pass <= 1e-13) throw NumericalError("rank-deficient-krylov: numerical rank < k");
    if (first_pass <= 1e-8) basis.conditioning_warning = true;
    v.noalias() -= basis.Q.leftCols(j) * (basis.Q.leftCols(j).transpose() * v);
    basis.Q.col(j) = v / v.norm();
  }
  return basis;
}

int diagnosable_kmax(const Eigen::VectorXd& sigma) {
  const Eigen::Index n = sigma.size();
  int k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sigma(0) / sigma(i) < 1e12)
      k = static_cast<int>(i) + 1;
    else
      break;
  }
  return std::min(k, static_cast<int>(n) - 1);
}

std::vector<SubspaceDiagnosticsRow> diagnose_subspace(const SvdFactors& svd,
                                                      const BidiagState& state,
                                                      const Eigen::VectorXd& b,
                                                      const DecayModel& decay,
                                                      int kmax, double delta) {
  const Eigen::VectorXd coeff = (svd.U.transpose() * b).cwiseAbs();
  const int kend = std::min({kmax, state.k, diagnosable_kmax(svd.sigma)});

  std::vector<SubspaceDiagnosticsRow> rows;
  rows.reserve(static_cast<std::size_t>(kend));
  for (int k = 1; k <= kend; ++k) {
    SubspaceDiagnosticsRow row;
    row.k = k;
    row.sin_exact = sin_theta_exact(svd, state.Q.leftCols(k));
    row.tan_theta = delta_norm_from_sin(row.sin_exact);
    row.coeff_ratio = coeff(k) / coeff(k - 1);
    if (k >= 2) {
      const LagrangeFactors lf = lagrange_factors(svd.sigma, k);
      row.lagrange_max = lf.max();
      row.k1 = lf.k1;
    }
    const double est_delta =
        decay.severe()
            ? estimate_delta_severe(svd.sigma, row.coeff_ratio, decay.rho, k)
            : estimate_delta_moderate(svd.sigma, row.coeff_ratio, decay.alpha, k,
                                      row.lagrange_max);
    row.sin_estimate = est_delta / std::sqrt(1.0 + est_delta * est_delta);
    row.eps_complement = std::sqrt((1.0 - row.sin_exact) * (1.0 + row.sin_exact));
    const std::vector<double> theta = ritz_values(state, k);
    row.ritz = ritz_condition_check(svd, row.sin_exact, theta.back(), k, delta);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace regdiag
