#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "regdiag/bidiag.hpp"
#include "regdiag/problems.hpp"

namespace regdiag {

struct RitzConditionReport {
  int k = 0;
  double eps_k = 0.0;                  // sqrt(1 - sin^2)
  double sigma_ratio = 0.0;            // sigma_{k+1} / sigma_k
  bool sufficient_large_holds = false; // eps_k >= sigma_{k+1}/sigma_k
  double delta_for_small = 0.1;
  bool sufficient_small_holds = false; // eps_k^2 <= delta / ((sigma_1/sigma_{k+1})^2 - 1)
  double rayleigh_lower = 0.0;         // eps^2 sigma_k^2 + (1-eps^2) sigma_n^2
  double rayleigh_upper = 0.0;         // eps^2 sigma_1^2 + (1-eps^2) sigma_{k+1}^2
  double theta_k = 0.0;
  double sigma_kplus1 = 0.0;
  bool theta_gt_sigma = false;
  bool degenerate = false;             // sin_theta == 1 exactly
};

struct LagrangeFactors {
  std::vector<double> value;  // |L_j^{(k)}(0)|, j = 1..k
  int k1 = 1;                 // 1-based argmax, ties toward larger j
  double max() const { return value[static_cast<std::size_t>(k1 - 1)]; }
};

struct SubspaceDiagnosticsRow {
  int k = 0;
  double sin_exact = 0.0;
  double tan_theta = 0.0;      // = ||Delta_k||, +inf at sin = 1
  double sin_estimate = 0.0;
  double coeff_ratio = 0.0;    // |u_{k+1}^T b| / |u_k^T b|
  double lagrange_max = 1.0;
  int k1 = 1;
  double eps_complement = 0.0; // sqrt(1 - sin^2)
  RitzConditionReport ritz;
};

double sin_theta_exact(const SvdFactors& svd, const Eigen::MatrixXd& Q);
double delta_norm_from_sin(double sin_theta);

LagrangeFactors lagrange_factors(const Eigen::VectorXd& sigma, int k);

double estimate_delta_severe(const Eigen::VectorXd& sigma, double coeff_ratio,
                             double rho, int k);
double estimate_delta_moderate(const Eigen::VectorXd& sigma, double coeff_ratio,
                               double alpha, int k, double lagrange_max);

struct LagrangeSevereEstimate {
  double max_estimate = 0.0;        // 1 + 3 rho^{-2}
  std::vector<double> per_j;        // (1 + 3 rho^{-2}) / prod_{i=j+1..k} (sigma_j/sigma_i)^2
};
LagrangeSevereEstimate estimate_lagrange_severe(double rho, int k);

struct LagrangeModerateEstimate {
  double upper_estimate = 0.0;  // 1 + k/(2 alpha + 1)
  double lower_bound = 0.0;     // k/(2 alpha + 1), valid when k >= 2 alpha + 1
  bool lower_active = false;
};
LagrangeModerateEstimate estimate_lagrange_moderate(double alpha, int k);

RitzConditionReport ritz_condition_check(const SvdFactors& svd, double sin_theta,
                                         double theta_k, int k, double delta);

struct KrylovBasis {
  Eigen::MatrixXd Q;
  bool conditioning_warning = false;
};
// Explicit-power Krylov oracle: columns A^T b, (A^T A) A^T b, ... orthonormalized
// by two-pass Gram-Schmidt. Small k/n only; errors out on numerical rank loss.
KrylovBasis explicit_krylov_basis(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int k);

// Largest diagnosable k: sigma_1/sigma_k < 1e12, clamped to n-1 (and to the
// available Lanczos steps by the caller).
int diagnosable_kmax(const Eigen::VectorXd& sigma);

// Per-k diagnostics for k = 1..kmax using the Lanczos basis in `state` and the
// (oracle or computed) SVD factors. The estimate follows the decay model.
std::vector<SubspaceDiagnosticsRow> diagnose_subspace(const SvdFactors& svd,
                                                      const BidiagState& state,
                                                      const Eigen::VectorXd& b,
                                                      const DecayModel& decay,
                                                      int kmax, double delta);

}  // namespace regdiag
