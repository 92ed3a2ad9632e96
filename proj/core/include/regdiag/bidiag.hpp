#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "regdiag/errors.hpp"

namespace regdiag {

enum class Reorth { None, Full };

// State of the k-step Lanczos bidiagonalization of (A, b).
//
// Invariants: alphas.size() == k, betas.size() == k+1 with betas[0] = ||b||.
// P normally has k+1 columns; if the run ended with a beta-breakdown at step
// k, betas[k] ~ 0 is recorded and P has only k columns (p_{k+1} was never
// formed). On an alpha-breakdown at step j the state keeps k = j-1.
struct BidiagState {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  std::vector<double> alphas;
  std::vector<double> betas;
  int k = 0;
  std::optional<int> breakdown;  // 1-based step at which breakdown occurred
  double sigma1_estimate = 0.0;

  // Half-step data for the (k+1)-st left relation; present when the run
  // completed kmax steps without breakdown and k < n.
  std::optional<double> alpha_next;
  std::optional<Eigen::VectorXd> q_next;

  double beta1() const { return betas.front(); }

  // The (j+1)-by-j lower-bidiagonal block B_j, j <= k.
  Eigen::MatrixXd B(int j) const;
};

struct RelationReport {
  double res_AQ_PB = 0.0;       // ||A Q_k - P B_k||_F
  double res_ATP_QBT = 0.0;     // ||A^T P - Q B^T - alpha_{k+1} q_{k+1} e^T||_F
  double orth_defect_P = 0.0;   // ||P^T P - I||_F
  double orth_defect_Q = 0.0;   // ||Q^T Q - I||_F
};

BidiagState lanczos_bidiag(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           int kmax, Reorth reorth = Reorth::Full);

// Singular values of B_k, descending. Computed by Givens QR of the lower
// bidiagonal followed by zero-shift QR on the resulting upper bidiagonal,
// which preserves small Ritz values to full relative accuracy.
std::vector<double> ritz_values(const BidiagState& state, int k);

RelationReport verify_relations(const BidiagState& state, const Eigen::MatrixXd& A);

// Singular values of the square upper-bidiagonal matrix with diagonal d and
// superdiagonal e (e.size() == d.size()-1), descending. Demmel-Kahan
// implicit zero-shift QR.
std::vector<double> bidiagonal_svd(std::vector<double> d, std::vector<double> e);

}  // namespace regdiag
